//! Exact collision-avoidance verification.
//!
//! A joint state is safe (some admissible input keeps every pair of vehicles
//! out of every shared conflict area forever) iff the job-shop scheduling
//! problem built from it has a feasible schedule. With single-integrator
//! vehicles that problem is linear apart from the either-or ordering of each
//! shared area, which [`solve`] settles by branching.

mod bounds;
mod solve;
mod system;

use thiserror::Error;

pub use bounds::{compute_bounds, BoundsTable, NodeBounds, Window};
pub use solve::{solve, solve_with_stats, SolveOutcome, SolveStats};
pub use system::{
    add_precedence, build_system, entry_var, exit_var, DiffConstraint, DifferenceConstraintSystem,
    Direction, Orientation, ORIGIN,
};

use crate::dynamics::{JointState, VehicleId};
use crate::intersection::{build_graph, AreaId, DisjunctiveGraph, NodeId, RouteSet, ScenarioError};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("vehicles {} and {} are both inside conflict area {area}", vehicles.0, vehicles.1)]
    PresentCollision {
        area: AreaId,
        vehicles: (VehicleId, VehicleId),
    },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Feasibility certificate: entry time and dwell of every node, plus the
/// orientation of every disjunctive pair. Times are relative to the state the
/// schedule was computed for.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule<S = f64> {
    pub entry: Vec<S>,
    pub dwell: Vec<S>,
    pub orientation: Orientation,
}

impl<S: Scalar> Schedule<S> {
    pub fn entry_time(&self, n: NodeId) -> S {
        self.entry[n.0]
    }

    pub fn exit_time(&self, n: NodeId) -> S {
        self.entry[n.0] + self.dwell[n.0]
    }
}

/// Result of verifying one joint state.
#[derive(Clone, Debug, PartialEq)]
pub struct Verification<S = f64> {
    pub graph: DisjunctiveGraph<S>,
    pub bounds: BoundsTable<S>,
    pub schedule: Option<Schedule<S>>,
}

impl<S: Scalar> Verification<S> {
    pub fn is_safe(&self) -> bool {
        self.schedule.is_some()
    }
}

/// Builds the graph and windows for `joint` and solves the scheduling problem.
///
/// `Ok` with a schedule means collisions can be avoided forever from `joint`;
/// `Ok` without one means they cannot. A state that is already colliding is
/// reported as [`VerifyError::PresentCollision`].
pub fn verify<S: Scalar>(
    joint: &JointState<S>,
    routes: &RouteSet<S>,
) -> Result<Verification<S>, VerifyError> {
    let graph = build_graph(routes, joint)?;
    let bounds = compute_bounds(&graph, joint)?;
    let schedule = solve(&graph, &bounds).into_schedule();
    Ok(Verification {
        graph,
        bounds,
        schedule,
    })
}

/// Capture-set membership: every admissible input eventually collides.
/// A present collision counts as captured.
pub fn in_capture_set<S: Scalar>(
    joint: &JointState<S>,
    routes: &RouteSet<S>,
) -> Result<bool, ScenarioError> {
    match verify(joint, routes) {
        Ok(v) => Ok(!v.is_safe()),
        Err(VerifyError::PresentCollision { .. }) => Ok(true),
        Err(VerifyError::Scenario(e)) => Err(e),
    }
}
