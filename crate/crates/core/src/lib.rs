//! Semi-autonomous intersection collision avoidance.
//!
//! Vehicles follow fixed paths through an intersection made of several
//! conflict areas. A supervisor checks every time step whether the drivers'
//! inputs keep the system able to avoid all conflict-area collisions forever,
//! and overrides them with a synthesized safe speed profile only when they do
//! not. The check is an exact job-shop scheduling feasibility problem, solved
//! by branching over area orderings on top of difference-constraint systems.
//!
//! The numeric core is generic over [`Scalar`] (`f64` and `f32`); the aliases
//! below fix it to `f64`, which is what the harness and the CLI use.

pub mod dynamics;
pub mod harness;
pub mod intersection;
pub mod oracle;
pub mod scalar;
pub mod supervisor;
pub mod verifier;

pub use scalar::Scalar;

pub use dynamics::{
    advance, in_bad_set, predict, step, sweeps_bad_set, DynamicsError, Segment, VehicleId,
};
pub use intersection::{build_graph, validate_scenario, AreaId, NodeId, ScenarioError};
pub use supervisor::{init, sigma, supervisor_step, PlanSource, SupervisorError};
pub use verifier::{
    build_system, compute_bounds, in_capture_set, solve, verify, Direction, Orientation,
    SolveOutcome, VerifyError,
};

pub type VehicleState = dynamics::VehicleState<f64>;
pub type SpeedProfile = dynamics::SpeedProfile<f64>;
pub type JointState = dynamics::JointState<f64>;
pub type ConflictInterval = intersection::ConflictInterval<f64>;
pub type Route = intersection::Route<f64>;
pub type RouteSet = intersection::RouteSet<f64>;
pub type DisjunctiveGraph = intersection::DisjunctiveGraph<f64>;
pub type BoundsTable = verifier::BoundsTable<f64>;
pub type DifferenceConstraintSystem = verifier::DifferenceConstraintSystem<f64>;
pub type Schedule = verifier::Schedule<f64>;
pub type Verification = verifier::Verification<f64>;
pub type SafePlan = supervisor::SafePlan<f64>;
pub type SupervisorDecision = supervisor::SupervisorDecision<f64>;
pub type Supervisor = supervisor::Supervisor<f64>;

pub type JointStateF32 = dynamics::JointState<f32>;
pub type RouteSetF32 = intersection::RouteSet<f32>;
pub type ScheduleF32 = verifier::Schedule<f32>;
pub type SupervisorF32 = supervisor::Supervisor<f32>;
