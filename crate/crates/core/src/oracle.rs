//! Brute-force deciders used to cross-check the verifier.
//!
//! * [`dynamic_oracle`] searches quantized input signals directly, with no
//!   scheduling reasoning at all.
//! * [`enumeration_oracle`] tries every orientation of the disjunctive pairs.
//!
//! Neither is meant for production sizes.

use std::collections::HashSet;

use thiserror::Error;

use crate::dynamics::{in_bad_set, JointState};
use crate::intersection::{DisjunctiveGraph, RouteSet};
use crate::verifier::{build_system, BoundsTable, Direction, Orientation};

pub const MAX_ORACLE_VEHICLES: usize = 2;
pub const MAX_ORACLE_AREAS: usize = 2;
pub const MAX_ENUMERATED_PAIRS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance too large for brute force: {0}")]
    TooLarge(String),
    #[error("invalid oracle configuration: {0}")]
    InvalidConfig(String),
}

/// Quantization of the input space: every vehicle picks one of
/// `speed_levels` evenly spaced speeds in its bounds, held for
/// `switch_period` seconds, until `horizon`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleConfig {
    pub speed_levels: usize,
    pub switch_period: f64,
    pub horizon: f64,
}

impl OracleConfig {
    /// Shortest horizon after which every vehicle has cleared its last area
    /// even at minimum speed.
    pub fn clearing_horizon(joint: &JointState, routes: &RouteSet) -> f64 {
        joint
            .vehicles()
            .iter()
            .filter_map(|v| {
                let last = routes.route_of(v.id)?.intervals.last()?;
                Some(((last.beta - v.y) / v.u_min()).max(0.0))
            })
            .fold(0.0, f64::max)
    }

    /// `periods` switching periods over the clearing horizon. When every
    /// vehicle has already cleared, one unit period is used.
    pub fn for_instance(
        joint: &JointState,
        routes: &RouteSet,
        speed_levels: usize,
        periods: usize,
    ) -> Self {
        let horizon = Self::clearing_horizon(joint, routes);
        Self {
            speed_levels,
            switch_period: if horizon > 0.0 {
                horizon / periods.max(1) as f64
            } else {
                1.0
            },
            horizon,
        }
    }

    /// Every signal of `self` is also a signal of the refinement.
    pub fn refined(&self) -> Self {
        Self {
            speed_levels: 2 * self.speed_levels - 1,
            switch_period: self.switch_period / 2.0,
            horizon: self.horizon,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleAnswer {
    Yes,
    No,
    Undecided,
}

/// Searches quantized joint input signals for one that never enters the bad
/// set, at `config` and at its refinement.
///
/// `Yes` comes with a concrete admissible signal, so it is sound. `No` means
/// no quantized signal works at either resolution. If the two resolutions
/// disagree the answer is `Undecided`.
pub fn dynamic_oracle(
    joint: &JointState,
    routes: &RouteSet,
    config: &OracleConfig,
) -> Result<OracleAnswer, OracleError> {
    let coarse = quantized_search(joint, routes, config)?;
    let fine = quantized_search(joint, routes, &config.refined())?;
    Ok(match (coarse, fine) {
        (true, true) => OracleAnswer::Yes,
        (false, false) => OracleAnswer::No,
        _ => OracleAnswer::Undecided,
    })
}

/// True iff some quantized signal at exactly `config` avoids the bad set for
/// all time. Collisions are checked in continuous time: within a period each
/// vehicle moves linearly, so the time intervals spent strictly inside an
/// area are computed exactly.
pub fn quantized_search(
    joint: &JointState,
    routes: &RouteSet,
    config: &OracleConfig,
) -> Result<bool, OracleError> {
    if joint.len() > MAX_ORACLE_VEHICLES {
        return Err(OracleError::TooLarge(format!("{} vehicles", joint.len())));
    }
    let areas: HashSet<_> = routes
        .iter()
        .flat_map(|r| r.intervals.iter().map(|iv| iv.area))
        .collect();
    if areas.len() > MAX_ORACLE_AREAS {
        return Err(OracleError::TooLarge(format!("{} areas", areas.len())));
    }
    if config.speed_levels < 2 || config.switch_period.is_nan() || config.switch_period <= 0.0 {
        return Err(OracleError::InvalidConfig(format!("{config:?}")));
    }
    let needed = OracleConfig::clearing_horizon(joint, routes);
    if config.horizon < needed - 1e-12 {
        return Err(OracleError::InvalidConfig(format!(
            "horizon {} shorter than clearing time {needed}",
            config.horizon
        )));
    }
    if in_bad_set(joint, routes) {
        return Ok(false);
    }

    let n = joint.len();
    let levels = config.speed_levels;
    let period = config.switch_period;
    let periods = (config.horizon / period - 1e-9).ceil().max(0.0) as usize;
    let speed = |v: usize, level: usize| {
        let veh = &joint.vehicles()[v];
        veh.u_min() + (veh.u_max() - veh.u_min()) * level as f64 / (levels - 1) as f64
    };
    // Shared-area intervals per vehicle: (area, alpha, beta).
    let intervals: Vec<Vec<_>> = joint
        .vehicles()
        .iter()
        .map(|v| {
            routes
                .route_of(v.id)
                .map(|r| {
                    r.intervals
                        .iter()
                        .map(|iv| (iv.area, iv.alpha, iv.beta))
                        .collect()
                })
                .unwrap_or_default()
        })
        .collect();

    // A state is the per-vehicle sum of chosen level indices; position after
    // k periods is y0 + period·(k·u_min + sum·Δ).
    let position = |v: usize, k: usize, sum: usize| {
        let veh = &joint.vehicles()[v];
        let step = (veh.u_max() - veh.u_min()) / (levels - 1) as f64;
        veh.y + period * (k as f64 * veh.u_min() + sum as f64 * step)
    };

    let mut layer: HashSet<Vec<usize>> = HashSet::from([vec![0; n]]);
    for k in 0..periods {
        let mut next = HashSet::new();
        for state in &layer {
            let starts: Vec<f64> = (0..n).map(|v| position(v, k, state[v])).collect();
            let mut choice = vec![0usize; n];
            loop {
                let speeds: Vec<f64> = (0..n).map(|v| speed(v, choice[v])).collect();
                if !collides(&intervals, &starts, &speeds, period) {
                    next.insert(state.iter().zip(&choice).map(|(s, c)| s + c).collect());
                }
                // odometer over level choices
                let mut v = 0;
                while v < n {
                    choice[v] += 1;
                    if choice[v] < levels {
                        break;
                    }
                    choice[v] = 0;
                    v += 1;
                }
                if v == n {
                    break;
                }
            }
        }
        if next.is_empty() {
            return Ok(false);
        }
        layer = next;
    }
    Ok(!layer.is_empty())
}

/// Whether two vehicles moving at constant `speeds` from `starts` are ever
/// strictly inside the same area during `[0, duration]`.
fn collides(
    intervals: &[Vec<(crate::AreaId, f64, f64)>],
    starts: &[f64],
    speeds: &[f64],
    duration: f64,
) -> bool {
    let occupancy = |v: usize, alpha: f64, beta: f64| {
        let lo = ((alpha - starts[v]) / speeds[v]).max(0.0);
        let hi = ((beta - starts[v]) / speeds[v]).min(duration);
        (lo, hi)
    };
    for a in 0..intervals.len() {
        for b in a + 1..intervals.len() {
            for &(area, alpha_a, beta_a) in &intervals[a] {
                for &(_, alpha_b, beta_b) in intervals[b].iter().filter(|iv| iv.0 == area) {
                    let (lo_a, hi_a) = occupancy(a, alpha_a, beta_a);
                    let (lo_b, hi_b) = occupancy(b, alpha_b, beta_b);
                    if lo_a.max(lo_b) < hi_a.min(hi_b) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Feasibility by trying all `2^|D|` complete orientations.
pub fn enumeration_oracle(
    graph: &DisjunctiveGraph,
    bounds: &BoundsTable,
) -> Result<bool, OracleError> {
    let pairs = graph.disjunctive().len();
    if pairs > MAX_ENUMERATED_PAIRS {
        return Err(OracleError::TooLarge(format!("{pairs} disjunctive pairs")));
    }
    Ok((0u32..1 << pairs).any(|mask| {
        let orientation = Orientation::from_decisions(
            (0..pairs)
                .map(|k| {
                    Some(if mask >> k & 1 == 0 {
                        Direction::Forward
                    } else {
                        Direction::Reverse
                    })
                })
                .collect(),
        );
        build_system(graph, bounds, &orientation).feasible()
    }))
}
