//! Conflict-area geometry along vehicle paths and the disjunctive graph built
//! from it.
//!
//! Vehicles are jobs and conflict areas are machines. Each remaining
//! (area, vehicle) crossing is an operation node; consecutive crossings of one
//! vehicle are joined by conjunctive arcs, and every pair of vehicles sharing
//! an area gets one disjunctive pair that a schedule must orient.

use std::collections::{BTreeMap, HashSet};
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{JointState, VehicleId};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AreaId(pub u32);

impl std::fmt::Display for AreaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("vehicle {vehicle}, area {area}: interval ({alpha}, {beta}) is empty or not finite")]
    EmptyInterval {
        vehicle: VehicleId,
        area: AreaId,
        alpha: f64,
        beta: f64,
    },
    #[error("vehicle {vehicle}: area {area} (ends at {beta}) overlaps or follows area {next} (starts at {next_alpha})")]
    Overlap {
        vehicle: VehicleId,
        area: AreaId,
        beta: f64,
        next: AreaId,
        next_alpha: f64,
    },
    #[error("vehicle {0} has more than one route")]
    DuplicateRoute(VehicleId),
    #[error("vehicle {vehicle} crosses area {area} more than once")]
    RepeatedArea { vehicle: VehicleId, area: AreaId },
    #[error("route references unknown vehicle {0}")]
    UnknownVehicle(VehicleId),
}

/// Location `(alpha, beta)` of a conflict area along one vehicle's path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConflictInterval<S = f64> {
    pub area: AreaId,
    pub alpha: S,
    pub beta: S,
}

/// Ordered conflict areas crossed by one vehicle.
#[derive(Clone, Debug, PartialEq)]
pub struct Route<S = f64> {
    pub vehicle: VehicleId,
    pub intervals: Vec<ConflictInterval<S>>,
}

/// Routes that passed [`validate_scenario`].
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RouteSet<S = f64> {
    routes: Vec<Route<S>>,
}

impl<S: Scalar> RouteSet<S> {
    pub fn new(routes: Vec<Route<S>>) -> Result<Self, ScenarioError> {
        validate_scenario(routes)
    }

    pub fn route_of(&self, vehicle: VehicleId) -> Option<&Route<S>> {
        self.routes.iter().find(|r| r.vehicle == vehicle)
    }

    pub fn into_inner(self) -> Vec<Route<S>> {
        self.routes
    }
}

impl<S> Deref for RouteSet<S> {
    type Target = [Route<S>];

    fn deref(&self) -> &[Route<S>] {
        &self.routes
    }
}

/// Checks that every route is a sequence of disjoint, ordered intervals
/// (`alpha < beta <= next alpha`), that no vehicle has two routes and that no
/// route revisits an area.
pub fn validate_scenario<S: Scalar>(routes: Vec<Route<S>>) -> Result<RouteSet<S>, ScenarioError> {
    let mut vehicles = HashSet::new();
    for route in &routes {
        if !vehicles.insert(route.vehicle) {
            return Err(ScenarioError::DuplicateRoute(route.vehicle));
        }
        let mut areas = HashSet::new();
        for iv in &route.intervals {
            if !(iv.alpha.is_finite() && iv.beta.is_finite() && iv.alpha < iv.beta) {
                return Err(ScenarioError::EmptyInterval {
                    vehicle: route.vehicle,
                    area: iv.area,
                    alpha: iv.alpha.as_f64(),
                    beta: iv.beta.as_f64(),
                });
            }
            if !areas.insert(iv.area) {
                return Err(ScenarioError::RepeatedArea {
                    vehicle: route.vehicle,
                    area: iv.area,
                });
            }
        }
        for w in route.intervals.windows(2) {
            if w[0].beta > w[1].alpha {
                return Err(ScenarioError::Overlap {
                    vehicle: route.vehicle,
                    area: w[0].area,
                    beta: w[0].beta.as_f64(),
                    next: w[1].area,
                    next_alpha: w[1].alpha.as_f64(),
                });
            }
        }
    }
    Ok(RouteSet { routes })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

/// Operation `(i, j)`: vehicle `j` crossing area `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperationNode<S = f64> {
    pub area: AreaId,
    pub vehicle: VehicleId,
    /// Index of the vehicle inside the joint state the graph was built from.
    pub vehicle_index: usize,
    pub alpha: S,
    pub beta: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisjunctiveGraph<S = f64> {
    nodes: Vec<OperationNode<S>>,
    conjunctive: Vec<(NodeId, NodeId)>,
    disjunctive: Vec<(NodeId, NodeId)>,
    first_ops: Vec<NodeId>,
    last_ops: Vec<NodeId>,
    pred: Vec<Option<NodeId>>,
    succ: Vec<Option<NodeId>>,
}

impl<S: Scalar> DisjunctiveGraph<S> {
    pub fn nodes(&self) -> &[OperationNode<S>] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &OperationNode<S> {
        &self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Route arcs `from -> to`, in route order.
    pub fn conjunctive(&self) -> &[(NodeId, NodeId)] {
        &self.conjunctive
    }

    /// Unordered pairs of operations sharing an area; the first element always
    /// has the smaller node index.
    pub fn disjunctive(&self) -> &[(NodeId, NodeId)] {
        &self.disjunctive
    }

    pub fn first_ops(&self) -> &[NodeId] {
        &self.first_ops
    }

    pub fn last_ops(&self) -> &[NodeId] {
        &self.last_ops
    }

    pub fn predecessor(&self, id: NodeId) -> Option<NodeId> {
        self.pred[id.0]
    }

    pub fn successor(&self, id: NodeId) -> Option<NodeId> {
        self.succ[id.0]
    }

    pub fn is_first(&self, id: NodeId) -> bool {
        self.pred[id.0].is_none()
    }

    pub fn is_last(&self, id: NodeId) -> bool {
        self.succ[id.0].is_none()
    }

    pub fn find(&self, area: AreaId, vehicle: VehicleId) -> Option<NodeId> {
        self.nodes
            .iter()
            .position(|n| n.area == area && n.vehicle == vehicle)
            .map(NodeId)
    }

    /// Nodes of the vehicle at `vehicle_index`, in route order.
    pub fn chain(&self, vehicle_index: usize) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.vehicle_index == vehicle_index)
            .map(|(k, _)| NodeId(k))
    }
}

/// Builds the disjunctive graph of the operations still ahead of each vehicle.
///
/// Operations whose exit `beta` is at or behind the vehicle are dropped; the
/// first and last sets are computed on what remains, so a vehicle that has
/// cleared its first area is re-rooted at its next one.
pub fn build_graph<S: Scalar>(
    routes: &RouteSet<S>,
    joint: &JointState<S>,
) -> Result<DisjunctiveGraph<S>, ScenarioError> {
    let mut nodes = Vec::new();
    let mut conjunctive = Vec::new();
    let mut pred = Vec::new();
    let mut succ: Vec<Option<NodeId>> = Vec::new();
    let mut first_ops = Vec::new();
    let mut last_ops = Vec::new();

    for route in routes.iter() {
        let vehicle_index = joint
            .index_of(route.vehicle)
            .ok_or(ScenarioError::UnknownVehicle(route.vehicle))?;
        let y = joint.vehicles()[vehicle_index].y;
        let mut prev: Option<NodeId> = None;
        for iv in route.intervals.iter().filter(|iv| iv.beta > y) {
            let id = NodeId(nodes.len());
            nodes.push(OperationNode {
                area: iv.area,
                vehicle: route.vehicle,
                vehicle_index,
                alpha: iv.alpha,
                beta: iv.beta,
            });
            pred.push(prev);
            succ.push(None);
            match prev {
                Some(p) => {
                    conjunctive.push((p, id));
                    succ[p.0] = Some(id);
                }
                None => first_ops.push(id),
            }
            prev = Some(id);
        }
        if let Some(last) = prev {
            last_ops.push(last);
        }
    }

    let mut by_area: BTreeMap<AreaId, Vec<NodeId>> = BTreeMap::new();
    for (k, n) in nodes.iter().enumerate() {
        by_area.entry(n.area).or_default().push(NodeId(k));
    }
    let mut disjunctive = Vec::new();
    for members in by_area.values() {
        for (a, &na) in members.iter().enumerate() {
            for &nb in &members[a + 1..] {
                disjunctive.push((na, nb));
            }
        }
    }

    Ok(DisjunctiveGraph {
        nodes,
        conjunctive,
        disjunctive,
        first_ops,
        last_ops,
        pred,
        succ,
    })
}
