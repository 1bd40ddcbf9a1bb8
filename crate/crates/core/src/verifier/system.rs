//! Difference-constraint systems and the encoding of the scheduling problem.
//!
//! # Encoding
//!
//! The scheduling constraints couple three quantities per conjunctive arc
//! `n' -> n`: the entry time of `n'`, its dwell `p` and the entry time of `n`
//! (`T_n' + p_n' + travel_lo <= T_n <= T_n' + p_n' + travel_hi`). Introducing
//! the exit time `E = T + p` as a variable of its own turns every constraint
//! into a two-variable difference `x_a - x_b <= w`:
//!
//! | constraint            | emitted                                         |
//! |-----------------------|-------------------------------------------------|
//! | first-op entry window | `T - z0 <= r_hi`, `z0 - T <= -r_lo`             |
//! | travel window         | `T - E_prev <= t_hi`, `E_prev - T <= -t_lo`     |
//! | dwell window          | `E - T <= p_hi`, `T - E <= -p_lo`               |
//! | oriented pair `a < b` | `E_a - T_b <= 0`                                |
//!
//! `z0` is the verification instant. With the order of each disjunctive pair
//! fixed, the either-or constraint collapses to the single arc in the last row,
//! so no big-M constant is ever needed: each 0/1 assignment of the ordering
//! binaries is exactly one orientation.
//!
//! A system is feasible iff its constraint graph has no negative cycle.

use std::collections::VecDeque;

use crate::intersection::{DisjunctiveGraph, NodeId};
use crate::scalar::Scalar;

use super::bounds::BoundsTable;

/// Index of the origin variable `z0`.
pub const ORIGIN: usize = 0;

pub fn entry_var(n: NodeId) -> usize {
    1 + 2 * n.0
}

pub fn exit_var(n: NodeId) -> usize {
    2 + 2 * n.0
}

/// `x[plus] - x[minus] <= bound`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffConstraint<S = f64> {
    pub plus: usize,
    pub minus: usize,
    pub bound: S,
}

/// Which of the two operations of a disjunctive pair `(a, b)` goes first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `a` exits before `b` enters.
    Forward,
    /// `b` exits before `a` enters.
    Reverse,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }

    /// `(leader, follower)` of the pair under this direction.
    pub fn order(self, pair: (NodeId, NodeId)) -> (NodeId, NodeId) {
        match self {
            Direction::Forward => pair,
            Direction::Reverse => (pair.1, pair.0),
        }
    }
}

/// Decisions over the disjunctive pairs of one graph, indexed like
/// [`DisjunctiveGraph::disjunctive`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Orientation {
    decisions: Vec<Option<Direction>>,
}

impl Orientation {
    pub fn undecided(pairs: usize) -> Self {
        Self {
            decisions: vec![None; pairs],
        }
    }

    pub fn from_decisions(decisions: Vec<Option<Direction>>) -> Self {
        Self { decisions }
    }

    pub fn get(&self, pair: usize) -> Option<Direction> {
        self.decisions[pair]
    }

    pub fn set(&mut self, pair: usize, dir: Option<Direction>) {
        self.decisions[pair] = dir;
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.decisions.iter().all(Option::is_some)
    }

    pub fn decisions(&self) -> &[Option<Direction>] {
        &self.decisions
    }
}

/// Conjunction of difference constraints over `n_vars` variables, variable 0
/// being the origin.
///
/// Every variable is implicitly constrained to `x >= x[0]`, so solutions are
/// times at or after the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceConstraintSystem<S = f64> {
    n_vars: usize,
    constraints: Vec<DiffConstraint<S>>,
    tolerance: S,
}

struct NegativeCycle;

impl<S: Scalar> DifferenceConstraintSystem<S> {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars: n_vars.max(1),
            constraints: Vec::new(),
            tolerance: S::cycle_tolerance(),
        }
    }

    pub fn with_tolerance(mut self, tolerance: S) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn tolerance(&self) -> S {
        self.tolerance
    }

    pub fn constraints(&self) -> &[DiffConstraint<S>] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Adds `x[plus] - x[minus] <= bound`.
    pub fn add(&mut self, plus: usize, minus: usize, bound: S) {
        assert!(
            plus < self.n_vars && minus < self.n_vars,
            "variable out of range"
        );
        self.constraints.push(DiffConstraint { plus, minus, bound });
    }

    /// Drops every constraint added after the first `len`.
    pub fn truncate(&mut self, len: usize) {
        self.constraints.truncate(len);
    }

    /// True iff no cycle of the constraint graph weighs less than `-tolerance`.
    pub fn feasible(&self) -> bool {
        self.earliest_solution().is_some()
    }

    /// Least solution with `x[0] = 0` and every `x >= 0`, or `None` when the
    /// system is infeasible.
    pub fn earliest_solution(&self) -> Option<Vec<S>> {
        self.solve_direction(true)
            .map(|d| d.into_iter().map(|v| -v).collect())
    }

    /// Greatest solution with `x[0] = 0`; variables not bounded from above
    /// are `+inf`.
    pub fn latest_solution(&self) -> Option<Vec<S>> {
        self.solve_direction(false)
    }

    /// Both extreme solutions from one feasibility decision.
    pub fn solution_bounds(&self) -> Option<(Vec<S>, Vec<S>)> {
        let lo = self.earliest_solution()?;
        let hi = self.latest_solution()?;
        Some((lo, hi))
    }

    fn solve_direction(&self, earliest: bool) -> Option<Vec<S>> {
        // Exact weights first. Rounding can make a zero-weight cycle look
        // slightly negative; in that case retry with every arc lengthened by
        // tolerance/n_vars, so only cycles lighter than -tolerance remain.
        match self.shortest_paths(earliest, S::zero()) {
            Ok(d) => Some(d),
            Err(NegativeCycle) => {
                let shift = self.tolerance / S::from_usize(self.n_vars).unwrap_or(S::one());
                self.shortest_paths(earliest, shift).ok()
            }
        }
    }

    /// Shortest distances from the origin, by queue-based Bellman-Ford.
    ///
    /// With `earliest`, the arc for `x_a - x_b <= w` runs `a -> b` (distances
    /// are `-x`); otherwise it runs `b -> a` (distances are `x`).
    fn shortest_paths(&self, earliest: bool, shift: S) -> Result<Vec<S>, NegativeCycle> {
        let n = self.n_vars;
        let mut arcs: Vec<(usize, usize, S)> = Vec::with_capacity(self.constraints.len() + n);
        for c in &self.constraints {
            let (from, to) = if earliest {
                (c.plus, c.minus)
            } else {
                (c.minus, c.plus)
            };
            arcs.push((from, to, c.bound + shift));
        }
        // x_v >= x_0, i.e. x_0 - x_v <= 0
        for v in 1..n {
            let (from, to) = if earliest { (ORIGIN, v) } else { (v, ORIGIN) };
            arcs.push((from, to, shift));
        }

        let mut offsets = vec![0usize; n + 1];
        for &(from, _, _) in &arcs {
            offsets[from + 1] += 1;
        }
        for k in 0..n {
            offsets[k + 1] += offsets[k];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0usize, S::zero()); arcs.len()];
        for &(from, to, w) in &arcs {
            adj[fill[from]] = (to, w);
            fill[from] += 1;
        }

        let mut dist = vec![S::infinity(); n];
        let mut in_queue = vec![false; n];
        let mut enqueued = vec![0usize; n];
        let mut queue = VecDeque::with_capacity(n);
        dist[ORIGIN] = S::zero();
        queue.push_back(ORIGIN);
        in_queue[ORIGIN] = true;

        while let Some(u) = queue.pop_front() {
            in_queue[u] = false;
            let du = dist[u];
            for &(v, w) in &adj[offsets[u]..offsets[u + 1]] {
                let cand = du + w;
                if cand < dist[v] {
                    dist[v] = cand;
                    if v == ORIGIN {
                        return Err(NegativeCycle);
                    }
                    if !in_queue[v] {
                        enqueued[v] += 1;
                        if enqueued[v] > n {
                            return Err(NegativeCycle);
                        }
                        in_queue[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        Ok(dist)
    }
}

/// Emits the constraints of the scheduling problem for `graph` under the
/// decided pairs of `orientation`; undecided pairs contribute nothing.
pub fn build_system<S: Scalar>(
    graph: &DisjunctiveGraph<S>,
    bounds: &BoundsTable<S>,
    orientation: &Orientation,
) -> DifferenceConstraintSystem<S> {
    let mut sys = DifferenceConstraintSystem::new(1 + 2 * graph.len());
    for k in 0..graph.len() {
        let n = NodeId(k);
        let nb = bounds.node(n);
        let (t, e) = (entry_var(n), exit_var(n));
        if let Some(entry) = nb.entry {
            sys.add(t, ORIGIN, entry.hi);
            sys.add(ORIGIN, t, -entry.lo);
        }
        if let (Some(prev), Some(travel)) = (graph.predecessor(n), nb.travel) {
            let pe = exit_var(prev);
            sys.add(t, pe, travel.hi);
            sys.add(pe, t, -travel.lo);
        }
        let dwell = nb.effective_dwell();
        sys.add(e, t, dwell.hi);
        sys.add(t, e, -dwell.lo);
    }
    for (idx, &pair) in graph.disjunctive().iter().enumerate() {
        if let Some(dir) = orientation.get(idx) {
            add_precedence(&mut sys, dir.order(pair));
        }
    }
    sys
}

/// `leader` exits before `follower` enters.
pub fn add_precedence<S: Scalar>(
    sys: &mut DifferenceConstraintSystem<S>,
    (leader, follower): (NodeId, NodeId),
) {
    sys.add(exit_var(leader), entry_var(follower), S::zero());
}
