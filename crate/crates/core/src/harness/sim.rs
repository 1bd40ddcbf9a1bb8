use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{in_bad_set, predict, JointState, SpeedProfile, VehicleId};
use crate::supervisor::Supervisor;

use super::{HarnessError, Scenario};

/// Number of sub-steps per step at which the bad set is checked.
pub const SUBSAMPLES: u32 = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    /// `step · tau`.
    pub t: f64,
    /// Positions at `t`.
    pub positions: Vec<f64>,
    /// Drivers' inputs, or on override steps the mean speed of the stored
    /// plan over `[t, t + tau)`.
    pub inputs: Vec<f64>,
    pub overridden: bool,
    /// Wall-clock time of the supervisor step in milliseconds (0 when
    /// unsupervised).
    pub verify_ms: f64,
    /// Verdict on the drivers' prediction; `None` when unsupervised.
    pub answer_driver: Option<bool>,
    /// Verdict on the stored plan's prediction; only on override steps.
    pub answer_safe: Option<bool>,
}

/// First instant at which two vehicles were strictly inside one area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BadSetEntry {
    pub step: u64,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceLog {
    pub tau: f64,
    pub vehicles: Vec<VehicleId>,
    pub rows: Vec<TraceRow>,
    /// Positions after the last row.
    pub final_positions: Vec<f64>,
    pub first_collision: Option<BadSetEntry>,
}

impl TraceLog {
    pub fn override_steps(&self) -> impl Iterator<Item = u64> + '_ {
        self.rows.iter().filter(|r| r.overridden).map(|r| r.step)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let n = self.vehicles.len();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|j| format!("y{j}")));
        header.extend((1..=n).map(|j| format!("u{j}")));
        header.push("override".into());
        header.push("verify_ms".into());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.t.to_string()];
            rec.extend(row.positions.iter().map(f64::to_string));
            rec.extend(row.inputs.iter().map(f64::to_string));
            rec.push(u8::from(row.overridden).to_string());
            rec.push(format!("{:.4}", row.verify_ms));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the closed loop for `scenario.horizon_steps` steps.
///
/// Unsupervised runs apply the driver script directly and only record the
/// first bad-set entry. Supervised runs fail if the initial state is unsafe or
/// if any supervisor invariant breaks.
pub fn run(scenario: &Scenario, supervised: bool) -> Result<TraceLog, HarnessError> {
    let tau = scenario.tau;
    let mut trace = TraceLog {
        tau,
        vehicles: scenario.initial.vehicles().iter().map(|v| v.id).collect(),
        rows: Vec::new(),
        final_positions: scenario.initial.positions(),
        first_collision: None,
    };
    if scenario.is_empty() {
        return Ok(trace);
    }
    let routes = &scenario.routes;
    let mut supervisor = if supervised {
        Some(Supervisor::new(&scenario.initial, routes.clone(), tau)?)
    } else {
        None
    };

    let mut state = scenario.initial.clone();
    if in_bad_set(&state, routes) {
        trace.first_collision = Some(BadSetEntry { step: 0, t: 0.0 });
    }
    for k in 0..scenario.horizon_steps {
        let t = k as f64 * tau;
        let u = scenario.driver_inputs(k);
        let (applied, next, row) = match supervisor.as_mut() {
            Some(sup) => {
                let clock = Instant::now();
                let d = sup.step(&state, &u)?;
                let verify_ms = clock.elapsed().as_secs_f64() * 1e3;
                let row = TraceRow {
                    step: k,
                    t,
                    positions: state.positions(),
                    inputs: if d.overridden { d.mean_speeds(tau) } else { u },
                    overridden: d.overridden,
                    verify_ms,
                    answer_driver: Some(d.answer_driver),
                    answer_safe: d.answer_safe,
                };
                (d.applied, d.next_state, row)
            }
            None => {
                let next = predict(&state, &u, tau)?;
                let applied: Vec<_> = u.iter().map(|&s| SpeedProfile::constant(t, s)).collect();
                let row = TraceRow {
                    step: k,
                    t,
                    positions: state.positions(),
                    inputs: u,
                    overridden: false,
                    verify_ms: 0.0,
                    answer_driver: None,
                    answer_safe: None,
                };
                (applied, next, row)
            }
        };
        if trace.first_collision.is_none() {
            trace.first_collision = first_bad_subsample(&state, &applied, k, tau, routes)?;
        }
        trace.rows.push(row);
        state = next;
    }
    trace.final_positions = state.positions();
    Ok(trace)
}

/// Checks the bad set at `SUBSAMPLES` evenly spaced instants in
/// `(k·tau, (k+1)·tau]`.
fn first_bad_subsample(
    state: &JointState,
    applied: &[SpeedProfile],
    k: u64,
    tau: f64,
    routes: &[crate::intersection::Route],
) -> Result<Option<BadSetEntry>, HarnessError> {
    let t0 = k as f64 * tau;
    for m in 1..=SUBSAMPLES {
        let t = t0 + tau * f64::from(m) / f64::from(SUBSAMPLES);
        let ys = state
            .vehicles()
            .iter()
            .zip(applied)
            .map(|(v, p)| Ok(v.y + p.displacement(t0, t)?))
            .collect::<Result<Vec<_>, crate::dynamics::DynamicsError>>()?;
        if in_bad_set(&state.with_positions(&ys)?, routes) {
            return Ok(Some(BadSetEntry { step: k, t }));
        }
    }
    Ok(None)
}

/// Seeded random driver script: each vehicle holds a uniformly drawn
/// admissible speed for a random number of steps in `hold`, then redraws.
pub fn random_driver_script(
    joint: &JointState,
    horizon_steps: u64,
    hold: std::ops::RangeInclusive<u64>,
    seed: u64,
) -> Vec<Vec<(u64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    joint
        .vehicles()
        .iter()
        .map(|v| {
            let mut script = Vec::new();
            let mut k = 0;
            loop {
                script.push((k, rng.gen_range(v.u_min()..=v.u_max())));
                k += rng.gen_range(hold.clone()).max(1);
                if k >= horizon_steps {
                    break;
                }
            }
            script
        })
        .collect()
}
