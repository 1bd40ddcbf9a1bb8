//! Least-restrictive, non-blocking supervisor.
//!
//! Every `tau` seconds the supervisor predicts where the drivers' inputs lead
//! and verifies that state. If it is safe the drivers keep control and a safe
//! plan from the predicted state is stored; otherwise every vehicle follows
//! the plan stored on the previous step for one step.

use thiserror::Error;

use crate::dynamics::{
    in_bad_set, predict, sweeps_bad_set, DynamicsError, JointState, Segment, SpeedProfile,
};
use crate::intersection::{DisjunctiveGraph, RouteSet, ScenarioError};
use crate::scalar::Scalar;
use crate::verifier::{verify, Schedule, VerifyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SupervisorError {
    #[error("initial state is in the capture set; no safe input exists")]
    InitiallyUnsafe,
    #[error("current state is already colliding: {0}")]
    PresentCollision(VerifyError),
    #[error("step {step}: state reached by the stored safe input failed verification")]
    NonBlockingViolation { step: u64 },
    #[error("stored plan starts at {anchor}, after the current step time {now}")]
    StalePlan { anchor: f64, now: f64 },
    #[error("plan synthesis invariant violated: {0}")]
    PlanInvariant(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

impl From<VerifyError> for SupervisorError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Scenario(s) => SupervisorError::Scenario(s),
            other => SupervisorError::PresentCollision(other),
        }
    }
}

/// Which verification produced a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanSource {
    Initial,
    /// Verification of the state predicted under the drivers' inputs at `step`.
    Driver {
        step: u64,
    },
    /// Second verification of an override step.
    Override {
        step: u64,
    },
}

/// Safe input signal for every vehicle on `[anchor, ∞)`, on the absolute time
/// axis. Profiles are in joint-state vehicle order.
#[derive(Clone, Debug, PartialEq)]
pub struct SafePlan<S = f64> {
    pub anchor: S,
    pub profiles: Vec<SpeedProfile<S>>,
    pub source: PlanSource,
}

impl<S: Scalar> SafePlan<S> {
    /// Positions reached at absolute time `t` from `anchor_state` at `anchor`.
    pub fn positions_at(
        &self,
        anchor_state: &JointState<S>,
        t: S,
    ) -> Result<Vec<S>, DynamicsError> {
        anchor_state
            .vehicles()
            .iter()
            .zip(&self.profiles)
            .map(|(v, p)| Ok(v.y + p.displacement(self.anchor, t)?))
            .collect()
    }
}

/// Safe input operator: turns a feasible schedule for `anchor_state` into
/// speed profiles that realize it.
///
/// Per vehicle, the waypoints are "reach alpha at T" and "reach beta at T + p"
/// for each remaining operation in route order; consecutive waypoints are
/// joined at constant speed, and `u_max` is held after the last one. The
/// schedule's windows guarantee every leg speed is admissible; a speed outside
/// the bounds by more than rounding noise means the schedule was not feasible.
pub fn sigma<S: Scalar>(
    anchor_state: &JointState<S>,
    anchor: S,
    graph: &DisjunctiveGraph<S>,
    schedule: &Schedule<S>,
    source: PlanSource,
) -> Result<SafePlan<S>, SupervisorError> {
    let tol = S::speed_tolerance();
    let mut profiles = Vec::with_capacity(anchor_state.len());

    for (vi, vehicle) in anchor_state.vehicles().iter().enumerate() {
        let mut waypoints = Vec::new();
        for n in graph.chain(vi) {
            let node = graph.node(n);
            if node.alpha > vehicle.y {
                waypoints.push((schedule.entry_time(n), node.alpha));
            }
            waypoints.push((schedule.exit_time(n), node.beta));
        }

        let mut segments: Vec<Segment<S>> = Vec::new();
        let mut push = |start: S, speed: S| match segments.last() {
            Some(last) if (last.speed - speed).abs() <= S::epsilon() * S::lit(8.0) * speed => {}
            _ => segments.push(Segment {
                start: anchor + start,
                speed,
            }),
        };

        let (mut t, mut y) = (S::zero(), vehicle.y);
        for (tw, yw) in waypoints {
            let (dt, dy) = (tw - t, yw - y);
            if dy <= S::zero() && dt <= S::zero() {
                continue;
            }
            if dt <= S::zero() {
                return Err(SupervisorError::PlanInvariant(format!(
                    "vehicle {}: waypoint {} reached with no time left",
                    vehicle.id,
                    yw.as_f64()
                )));
            }
            let raw = dy / dt;
            if raw < vehicle.u_min() - tol || raw > vehicle.u_max() + tol {
                return Err(SupervisorError::PlanInvariant(format!(
                    "vehicle {}: leg speed {} outside [{}, {}]",
                    vehicle.id,
                    raw.as_f64(),
                    vehicle.u_min().as_f64(),
                    vehicle.u_max().as_f64()
                )));
            }
            push(t, raw.max(vehicle.u_min()).min(vehicle.u_max()));
            t = tw;
            y = yw;
        }
        push(t, vehicle.u_max());
        profiles.push(SpeedProfile::new(segments)?);
    }
    Ok(SafePlan {
        anchor,
        profiles,
        source,
    })
}

/// What the supervisor did on one step.
#[derive(Clone, Debug, PartialEq)]
pub struct SupervisorDecision<S = f64> {
    pub step: u64,
    pub overridden: bool,
    /// Input applied to each vehicle on `[k·tau, (k+1)·tau)`, on the absolute
    /// time axis (constant driver input, or the stored plan).
    pub applied: Vec<SpeedProfile<S>>,
    /// Verdict on the state predicted under the drivers' inputs; also false
    /// when those inputs pass through the bad set during the step.
    pub answer_driver: bool,
    /// Verdict on the state predicted under the stored safe input; only
    /// computed on override steps.
    pub answer_safe: Option<bool>,
    /// State at `(k+1)·tau` under the applied input.
    pub next_state: JointState<S>,
}

impl<S: Scalar> SupervisorDecision<S> {
    /// Average applied speed of each vehicle over the step.
    pub fn mean_speeds(&self, tau: S) -> Vec<S> {
        let t0 = S::from_u64(self.step).unwrap() * tau;
        self.applied
            .iter()
            .map(|p| {
                if tau > S::zero() {
                    p.displacement(t0, t0 + tau).map_or(S::nan(), |d| d / tau)
                } else {
                    p.speed_at(t0).unwrap_or(S::nan())
                }
            })
            .collect()
    }
}

/// One supervisor step at time `k·tau`.
///
/// Returns the decision and the plan to store for step `k + 1`.
pub fn supervisor_step<S: Scalar>(
    joint: &JointState<S>,
    u_driver: &[S],
    stored: &SafePlan<S>,
    routes: &RouteSet<S>,
    step: u64,
    tau: S,
) -> Result<(SupervisorDecision<S>, SafePlan<S>), SupervisorError> {
    let now = S::from_u64(step).unwrap() * tau;
    let next = S::from_u64(step + 1).unwrap() * tau;
    if stored.anchor > now + S::cycle_tolerance() {
        return Err(SupervisorError::StalePlan {
            anchor: stored.anchor.as_f64(),
            now: now.as_f64(),
        });
    }
    if in_bad_set(joint, routes) {
        return Err(match verify(joint, routes) {
            Err(e) => e.into(),
            Ok(_) => SupervisorError::PlanInvariant("current state is in the bad set".into()),
        });
    }

    let driver_state = predict(joint, u_driver, tau)?;
    // a collision between samples is as certain as one at the next sample
    let first = if sweeps_bad_set(joint, u_driver, tau, routes)? {
        None
    } else {
        match verify(&driver_state, routes) {
            Ok(v) => v.schedule.map(|s| (v.graph, s)),
            Err(VerifyError::PresentCollision { .. }) => None,
            Err(VerifyError::Scenario(e)) => return Err(e.into()),
        }
    };

    if let Some((graph, schedule)) = first {
        let plan = sigma(
            &driver_state,
            next,
            &graph,
            &schedule,
            PlanSource::Driver { step },
        )?;
        let applied = u_driver
            .iter()
            .map(|&u| SpeedProfile::constant(now, u))
            .collect();
        return Ok((
            SupervisorDecision {
                step,
                overridden: false,
                applied,
                answer_driver: true,
                answer_safe: None,
                next_state: driver_state,
            },
            plan,
        ));
    }

    let applied = stored
        .profiles
        .iter()
        .map(|p| p.tail_from(now))
        .collect::<Result<Vec<_>, _>>()?;
    let ys = joint
        .vehicles()
        .iter()
        .zip(&applied)
        .map(|(v, p)| {
            p.check_bounds(v)?;
            Ok(v.y + p.displacement(now, next)?)
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    let safe_state = joint.with_positions(&ys)?;

    let second = match verify(&safe_state, routes) {
        Ok(v) => v.schedule.map(|s| (v.graph, s)),
        Err(VerifyError::PresentCollision { .. }) => None,
        Err(VerifyError::Scenario(e)) => return Err(e.into()),
    };
    let Some((graph, schedule)) = second else {
        return Err(SupervisorError::NonBlockingViolation { step });
    };
    let plan = sigma(
        &safe_state,
        next,
        &graph,
        &schedule,
        PlanSource::Override { step },
    )?;
    Ok((
        SupervisorDecision {
            step,
            overridden: true,
            applied,
            answer_driver: false,
            answer_safe: Some(true),
            next_state: safe_state,
        },
        plan,
    ))
}

/// Verifies the initial state and synthesizes the first safe plan, anchored
/// at time 0.
pub fn init<S: Scalar>(
    joint: &JointState<S>,
    routes: &RouteSet<S>,
) -> Result<SafePlan<S>, SupervisorError> {
    let v = match verify(joint, routes) {
        Ok(v) => v,
        Err(VerifyError::PresentCollision { .. }) => return Err(SupervisorError::InitiallyUnsafe),
        Err(VerifyError::Scenario(e)) => return Err(e.into()),
    };
    let schedule = v.schedule.ok_or(SupervisorError::InitiallyUnsafe)?;
    sigma(joint, S::zero(), &v.graph, &schedule, PlanSource::Initial)
}

/// Sequential supervisor state machine: owns the routes, the step counter and
/// the stored plan.
#[derive(Clone, Debug)]
pub struct Supervisor<S = f64> {
    routes: RouteSet<S>,
    tau: S,
    step: u64,
    plan: SafePlan<S>,
}

impl<S: Scalar> Supervisor<S> {
    pub fn new(
        joint: &JointState<S>,
        routes: RouteSet<S>,
        tau: S,
    ) -> Result<Self, SupervisorError> {
        let plan = init(joint, &routes)?;
        Ok(Self {
            routes,
            tau,
            step: 0,
            plan,
        })
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn plan(&self) -> &SafePlan<S> {
        &self.plan
    }

    pub fn routes(&self) -> &RouteSet<S> {
        &self.routes
    }

    pub fn tau(&self) -> S {
        self.tau
    }

    /// Runs one step from `joint` (the measured state at `k·tau`).
    pub fn step(
        &mut self,
        joint: &JointState<S>,
        u_driver: &[S],
    ) -> Result<SupervisorDecision<S>, SupervisorError> {
        let (decision, plan) = supervisor_step(
            joint,
            u_driver,
            &self.plan,
            &self.routes,
            self.step,
            self.tau,
        )?;
        self.plan = plan;
        self.step += 1;
        Ok(decision)
    }
}
