//! Closed-form time windows for single-integrator vehicles.

use std::collections::HashMap;

use crate::dynamics::JointState;
use crate::intersection::{DisjunctiveGraph, NodeId};
use crate::scalar::Scalar;

use super::VerifyError;

/// Closed interval `[lo, hi]` of seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window<S = f64> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Window<S> {
    pub fn point(v: S) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn contains(&self, v: S, tol: S) -> bool {
        v >= self.lo - tol && v <= self.hi + tol
    }
}

/// Time windows attached to one operation node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeBounds<S = f64> {
    /// Entry window, present for first operations only.
    pub entry: Option<Window<S>>,
    /// Travel time from the predecessor's exit to this node's entry, present
    /// for non-first operations only.
    pub travel: Option<Window<S>>,
    /// Admissible time spent inside the area.
    pub dwell: Window<S>,
    /// Last operations have their dwell pinned to `dwell.lo`.
    pub dwell_pinned: bool,
}

impl<S: Scalar> NodeBounds<S> {
    /// Dwell window actually imposed on the schedule.
    pub fn effective_dwell(&self) -> Window<S> {
        if self.dwell_pinned {
            Window::point(self.dwell.lo)
        } else {
            self.dwell
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsTable<S = f64> {
    nodes: Vec<NodeBounds<S>>,
}

impl<S: Scalar> BoundsTable<S> {
    pub fn node(&self, id: NodeId) -> &NodeBounds<S> {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[NodeBounds<S>] {
        &self.nodes
    }
}

/// Computes the windows of every node of `graph` for the positions in `joint`.
///
/// For a first operation at distance `d = alpha - y > 0` the entry window is
/// `[d/u_max, d/u_min]`; a vehicle already at or past `alpha` is pinned to
/// entry time 0 and its dwell window is measured from `y` instead of `alpha`.
/// Travel windows cover the gap `alpha - beta_prev` between consecutive areas.
///
/// Fails if two vehicles are strictly inside the same area right now.
pub fn compute_bounds<S: Scalar>(
    graph: &DisjunctiveGraph<S>,
    joint: &JointState<S>,
) -> Result<BoundsTable<S>, VerifyError> {
    let mut occupant = HashMap::new();
    let mut nodes = Vec::with_capacity(graph.len());

    for (k, node) in graph.nodes().iter().enumerate() {
        let id = NodeId(k);
        let v = &joint.vehicles()[node.vehicle_index];
        let (u_min, u_max) = (v.u_min(), v.u_max());
        let window = |dist: S| Window {
            lo: dist / u_max,
            hi: dist / u_min,
        };

        let inside = node.alpha <= v.y;
        if node.alpha < v.y && v.y < node.beta {
            if let Some(other) = occupant.insert(node.area, node.vehicle) {
                return Err(VerifyError::PresentCollision {
                    area: node.area,
                    vehicles: (other, node.vehicle),
                });
            }
        }

        let entry = graph.is_first(id).then(|| {
            if inside {
                Window::point(S::zero())
            } else {
                window(node.alpha - v.y)
            }
        });
        let travel = graph
            .predecessor(id)
            .map(|p| window(node.alpha - graph.node(p).beta));
        let dwell = if inside {
            window(node.beta - v.y)
        } else {
            window(node.beta - node.alpha)
        };
        nodes.push(NodeBounds {
            entry,
            travel,
            dwell,
            dwell_pinned: graph.is_last(id),
        });
    }
    Ok(BoundsTable { nodes })
}
