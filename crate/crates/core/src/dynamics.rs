//! Longitudinal single-integrator vehicle model.
//!
//! Each vehicle moves along a fixed path with `dy/dt = u`, `u ∈ [u_min, u_max]`
//! and `u_min > 0`. Every trajectory used here is piecewise linear in time, so
//! all positions are computed in closed form.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intersection::Route;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VehicleId(pub u32);

impl std::fmt::Display for VehicleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("vehicle {vehicle}: speed {speed} outside [{min}, {max}]")]
    BoundsViolation {
        vehicle: VehicleId,
        speed: f64,
        min: f64,
        max: f64,
    },
    #[error("vehicle {vehicle}: invalid speed bounds [{min}, {max}] (need 0 < min <= max)")]
    InvalidBounds {
        vehicle: VehicleId,
        min: f64,
        max: f64,
    },
    #[error("negative duration {0}")]
    NegativeDuration(f64),
    #[error("profile starts at {start} and does not cover time {t}")]
    Domain { start: f64, t: f64 },
    #[error("invalid speed profile: {0}")]
    InvalidProfile(String),
    #[error("duplicate vehicle id {0}")]
    DuplicateVehicle(VehicleId),
    #[error("expected {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
}

/// Position and admissible speed range of one vehicle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleState<S = f64> {
    pub id: VehicleId,
    pub y: S,
    u_min: S,
    u_max: S,
}

impl<S: Scalar> VehicleState<S> {
    pub fn new(id: VehicleId, y: S, u_min: S, u_max: S) -> Result<Self, DynamicsError> {
        if !(u_min > S::zero() && u_min <= u_max && u_max.is_finite() && y.is_finite()) {
            return Err(DynamicsError::InvalidBounds {
                vehicle: id,
                min: u_min.as_f64(),
                max: u_max.as_f64(),
            });
        }
        Ok(Self {
            id,
            y,
            u_min,
            u_max,
        })
    }

    pub fn u_min(&self) -> S {
        self.u_min
    }

    pub fn u_max(&self) -> S {
        self.u_max
    }

    pub fn with_position(mut self, y: S) -> Self {
        self.y = y;
        self
    }

    pub fn check_speed(&self, u: S) -> Result<(), DynamicsError> {
        if u < self.u_min || u > self.u_max || u.is_nan() {
            return Err(DynamicsError::BoundsViolation {
                vehicle: self.id,
                speed: u.as_f64(),
                min: self.u_min.as_f64(),
                max: self.u_max.as_f64(),
            });
        }
        Ok(())
    }
}

/// One constant-speed piece of a [`SpeedProfile`], active from `start` until
/// the next segment begins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<S = f64> {
    pub start: S,
    pub speed: S,
}

/// Piecewise-constant speed signal. The last segment extends to infinity, so a
/// profile is defined on `[start, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeedProfile<S = f64> {
    segments: Vec<Segment<S>>,
}

impl<S: Scalar> SpeedProfile<S> {
    pub fn new(segments: Vec<Segment<S>>) -> Result<Self, DynamicsError> {
        if segments.is_empty() {
            return Err(DynamicsError::InvalidProfile("no segments".into()));
        }
        for s in &segments {
            if !s.start.is_finite() || !s.speed.is_finite() {
                return Err(DynamicsError::InvalidProfile("non-finite segment".into()));
            }
        }
        if segments.windows(2).any(|w| w[1].start <= w[0].start) {
            return Err(DynamicsError::InvalidProfile(
                "segment start times must be strictly increasing".into(),
            ));
        }
        Ok(Self { segments })
    }

    pub fn constant(start: S, speed: S) -> Self {
        Self {
            segments: vec![Segment { start, speed }],
        }
    }

    pub fn segments(&self) -> &[Segment<S>] {
        &self.segments
    }

    pub fn start(&self) -> S {
        self.segments[0].start
    }

    pub fn speed_at(&self, t: S) -> Option<S> {
        if t < self.start() {
            return None;
        }
        let idx = self.segments.partition_point(|s| s.start <= t);
        Some(self.segments[idx - 1].speed)
    }

    /// Checks every segment speed against a vehicle's bounds.
    pub fn check_bounds(&self, vehicle: &VehicleState<S>) -> Result<(), DynamicsError> {
        self.segments
            .iter()
            .try_for_each(|s| vehicle.check_speed(s.speed))
    }

    /// Distance travelled over `[from, to]`.
    pub fn displacement(&self, from: S, to: S) -> Result<S, DynamicsError> {
        if to < from {
            return Err(DynamicsError::NegativeDuration((to - from).as_f64()));
        }
        if from < self.start() {
            return Err(DynamicsError::Domain {
                start: self.start().as_f64(),
                t: from.as_f64(),
            });
        }
        let mut total = S::zero();
        for (k, seg) in self.segments.iter().enumerate() {
            let seg_end = self
                .segments
                .get(k + 1)
                .map_or(S::infinity(), |next| next.start);
            let lo = seg.start.max(from);
            let hi = seg_end.min(to);
            if hi > lo {
                total = total + seg.speed * (hi - lo);
            }
            if seg_end >= to {
                break;
            }
        }
        Ok(total)
    }

    /// The same signal with its time axis shifted by `offset`.
    pub fn shifted(&self, offset: S) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    start: s.start + offset,
                    speed: s.speed,
                })
                .collect(),
        }
    }

    /// Restriction to `[from, ∞)`, re-anchored so the profile starts at `from`.
    pub fn tail_from(&self, from: S) -> Result<Self, DynamicsError> {
        let first = self.speed_at(from).ok_or(DynamicsError::Domain {
            start: self.start().as_f64(),
            t: from.as_f64(),
        })?;
        let mut segments = vec![Segment {
            start: from,
            speed: first,
        }];
        segments.extend(self.segments.iter().copied().filter(|s| s.start > from));
        Ok(Self { segments })
    }
}

/// Positions of all vehicles, one per road.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState<S = f64> {
    vehicles: Vec<VehicleState<S>>,
}

impl<S: Scalar> JointState<S> {
    pub fn new(vehicles: Vec<VehicleState<S>>) -> Result<Self, DynamicsError> {
        let mut seen = HashMap::with_capacity(vehicles.len());
        for v in &vehicles {
            if seen.insert(v.id, ()).is_some() {
                return Err(DynamicsError::DuplicateVehicle(v.id));
            }
        }
        Ok(Self { vehicles })
    }

    pub fn empty() -> Self {
        Self {
            vehicles: Vec::new(),
        }
    }

    pub fn vehicles(&self) -> &[VehicleState<S>] {
        &self.vehicles
    }

    pub fn len(&self) -> usize {
        self.vehicles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicles.is_empty()
    }

    pub fn index_of(&self, id: VehicleId) -> Option<usize> {
        self.vehicles.iter().position(|v| v.id == id)
    }

    pub fn get(&self, id: VehicleId) -> Option<&VehicleState<S>> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    pub fn positions(&self) -> Vec<S> {
        self.vehicles.iter().map(|v| v.y).collect()
    }

    /// Same vehicles and bounds, new positions (in vehicle order).
    pub fn with_positions(&self, ys: &[S]) -> Result<Self, DynamicsError> {
        if ys.len() != self.vehicles.len() {
            return Err(DynamicsError::ArityMismatch {
                expected: self.vehicles.len(),
                got: ys.len(),
            });
        }
        Ok(Self {
            vehicles: self
                .vehicles
                .iter()
                .zip(ys)
                .map(|(v, &y)| v.with_position(y))
                .collect(),
        })
    }
}

/// Exact single-integrator step: `y + u·dt`.
pub fn step<S: Scalar>(
    state: &VehicleState<S>,
    u: S,
    dt: S,
) -> Result<VehicleState<S>, DynamicsError> {
    state.check_speed(u)?;
    if dt < S::zero() {
        return Err(DynamicsError::NegativeDuration(dt.as_f64()));
    }
    Ok(state.with_position(state.y + u * dt))
}

/// Position reached at time `t` when `state` is the position at time 0 and the
/// vehicle follows `profile`.
pub fn advance<S: Scalar>(
    state: &VehicleState<S>,
    profile: &SpeedProfile<S>,
    t: S,
) -> Result<S, DynamicsError> {
    profile.check_bounds(state)?;
    Ok(state.y + profile.displacement(S::zero(), t)?)
}

/// State prediction: every vehicle held at its own constant input for `tau`.
pub fn predict<S: Scalar>(
    joint: &JointState<S>,
    u: &[S],
    tau: S,
) -> Result<JointState<S>, DynamicsError> {
    if u.len() != joint.len() {
        return Err(DynamicsError::ArityMismatch {
            expected: joint.len(),
            got: u.len(),
        });
    }
    let vehicles = joint
        .vehicles
        .iter()
        .zip(u)
        .map(|(v, &ui)| step(v, ui, tau))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(JointState { vehicles })
}

/// True iff two distinct vehicles are strictly inside the same conflict area.
///
/// Interval endpoints are excluded, so a vehicle sitting exactly on `alpha` or
/// `beta` does not occupy the area. Routes of vehicles absent from `joint` are
/// ignored.
pub fn in_bad_set<S: Scalar>(joint: &JointState<S>, routes: &[Route<S>]) -> bool {
    let mut occupied = HashMap::new();
    for route in routes {
        let Some(v) = joint.get(route.vehicle) else {
            continue;
        };
        for iv in &route.intervals {
            if iv.alpha < v.y && v.y < iv.beta && occupied.insert(iv.area, v.id).is_some() {
                return true;
            }
        }
    }
    false
}

/// True iff two vehicles are strictly inside the same area at some instant
/// of `(0, dt]` while every vehicle holds its constant input `u`.
///
/// Each vehicle moves linearly, so the time it spends inside an interval is
/// an open interval computed in closed form; the check is exact, with no
/// sampling.
pub fn sweeps_bad_set<S: Scalar>(
    joint: &JointState<S>,
    u: &[S],
    dt: S,
    routes: &[Route<S>],
) -> Result<bool, DynamicsError> {
    if u.len() != joint.len() {
        return Err(DynamicsError::ArityMismatch {
            expected: joint.len(),
            got: u.len(),
        });
    }
    // (area, vehicle, entry time, exit time) of every visit within the step
    let mut visits = Vec::new();
    for route in routes {
        let Some(j) = joint.index_of(route.vehicle) else {
            continue;
        };
        let (y, v) = (joint.vehicles[j].y, u[j]);
        joint.vehicles[j].check_speed(v)?;
        for iv in &route.intervals {
            let lo = ((iv.alpha - y) / v).max(S::zero());
            let hi = ((iv.beta - y) / v).min(dt);
            if lo < hi {
                visits.push((iv.area, j, lo, hi));
            }
        }
    }
    Ok(visits.iter().enumerate().any(|(k, a)| {
        visits[k + 1..]
            .iter()
            .any(|b| a.0 == b.0 && a.1 != b.1 && a.2.max(b.2) < a.3.min(b.3))
    }))
}
