use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::verifier::in_capture_set;

use super::{HarnessError, Scenario};

/// Evenly spaced sample positions `min, min + step, …` up to `max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub step: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self, HarnessError> {
        if !(step > 0.0 && min <= max && min.is_finite() && max.is_finite()) {
            return Err(HarnessError::Invalid {
                field: "grid".into(),
                message: format!("bad axis {min}:{max}:{step}"),
            });
        }
        let count = ((max - min) / step + 1e-9).floor() as usize + 1;
        Ok(Self { min, step, count })
    }

    /// `count` points from `min` to `max` inclusive.
    pub fn linspace(min: f64, max: f64, count: usize) -> Self {
        let step = if count > 1 {
            (max - min) / (count - 1) as f64
        } else {
            1.0
        };
        Self { min, step, count }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + self.step * i as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.value(i))
    }
}

impl FromStr for GridAxis {
    type Err = HarnessError;

    /// Parses `min:max:step`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Invalid {
            field: "grid".into(),
            message: format!("expected min:max:step, got {s:?}"),
        };
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match parts[..] {
            [min, max, step] => GridAxis::new(min, max, step),
            _ => Err(bad()),
        }
    }
}

/// Parses a comma-separated list of axes.
pub fn parse_grid(s: &str) -> Result<Vec<GridAxis>, HarnessError> {
    s.split(',').map(str::parse).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapturePoint {
    pub positions: Vec<f64>,
    pub captured: bool,
}

/// Evaluates capture-set membership at every grid point, varying the last
/// axis fastest. Points are independent and evaluated in parallel.
pub fn sample_capture_set(
    scenario: &Scenario,
    axes: &[GridAxis],
) -> Result<Vec<CapturePoint>, HarnessError> {
    let n = scenario.len();
    if axes.len() != n {
        return Err(HarnessError::Invalid {
            field: "grid".into(),
            message: format!("{} axes for {n} vehicles", axes.len()),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let total: usize = axes.iter().map(|a| a.count).product();
    (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut ys = vec![0.0; n];
            for (j, axis) in axes.iter().enumerate().rev() {
                ys[j] = axis.value(idx % axis.count);
                idx /= axis.count;
            }
            let joint = scenario.initial.with_positions(&ys)?;
            let captured = in_capture_set(&joint, &scenario.routes)?;
            Ok(CapturePoint {
                positions: ys,
                captured,
            })
        })
        .collect()
}

pub fn write_capture_csv<W: Write>(
    points: &[CapturePoint],
    n: usize,
    out: W,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=n).map(|j| format!("y{j}")).collect();
    header.push("cs".into());
    w.write_record(&header)?;
    for p in points {
        let mut rec: Vec<String> = p.positions.iter().map(f64::to_string).collect();
        rec.push(u8::from(p.captured).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
