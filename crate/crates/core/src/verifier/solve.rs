//! Depth-first search over disjunctive-pair orientations.

use crate::intersection::{DisjunctiveGraph, NodeId};
use crate::scalar::Scalar;

use super::bounds::BoundsTable;
use super::system::{
    add_precedence, build_system, entry_var, exit_var, DifferenceConstraintSystem, Direction,
    Orientation,
};
use super::Schedule;

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome<S = f64> {
    Feasible(Schedule<S>),
    Infeasible,
}

impl<S> SolveOutcome<S> {
    pub fn schedule(&self) -> Option<&Schedule<S>> {
        match self {
            SolveOutcome::Feasible(s) => Some(s),
            SolveOutcome::Infeasible => None,
        }
    }

    pub fn into_schedule(self) -> Option<Schedule<S>> {
        match self {
            SolveOutcome::Feasible(s) => Some(s),
            SolveOutcome::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveOutcome::Feasible(_))
    }
}

/// Search statistics, mostly useful for benchmarking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub branches: usize,
    pub forced: usize,
    pub feasibility_checks: usize,
}

/// Decides feasibility of the scheduling problem for `graph` exactly.
///
/// Vehicles that share no area cannot constrain each other, so the pairs are
/// split into connected components that are searched one after another
/// without backtracking between them. Inside a component, the search keeps
/// the earliest and latest solutions of the current partial system; a pair
/// whose one direction contradicts them (`earliest exit > latest entry`) is
/// forced the other way, and a pair with both directions contradicted prunes
/// the branch. Both rules only discard orientations whose system contains a
/// negative cycle, so the answer matches exhaustive enumeration.
pub fn solve<S: Scalar>(graph: &DisjunctiveGraph<S>, bounds: &BoundsTable<S>) -> SolveOutcome<S> {
    solve_with_stats(graph, bounds).0
}

pub fn solve_with_stats<S: Scalar>(
    graph: &DisjunctiveGraph<S>,
    bounds: &BoundsTable<S>,
) -> (SolveOutcome<S>, SolveStats) {
    let pairs = graph.disjunctive();
    let mut search = Search {
        pairs,
        sys: build_system(graph, bounds, &Orientation::undecided(pairs.len())),
        orientation: Orientation::undecided(pairs.len()),
        tol: S::cycle_tolerance(),
        stats: SolveStats::default(),
    };

    for component in components(graph) {
        if !search.dfs(&component) {
            return (SolveOutcome::Infeasible, search.stats);
        }
    }

    search.stats.feasibility_checks += 1;
    let Some(x) = search.sys.earliest_solution() else {
        return (SolveOutcome::Infeasible, search.stats);
    };
    let entry: Vec<S> = (0..graph.len()).map(|k| x[entry_var(NodeId(k))]).collect();
    let dwell = (0..graph.len())
        .map(|k| x[exit_var(NodeId(k))] - entry[k])
        .collect();
    (
        SolveOutcome::Feasible(Schedule {
            entry,
            dwell,
            orientation: search.orientation,
        }),
        search.stats,
    )
}

struct Search<'a, S> {
    pairs: &'a [(NodeId, NodeId)],
    sys: DifferenceConstraintSystem<S>,
    orientation: Orientation,
    tol: S,
    stats: SolveStats,
}

impl<S: Scalar> Search<'_, S> {
    /// Completes the orientation of `component` (pair indices) or reports that
    /// no completion is feasible. On failure the system and orientation are
    /// restored.
    fn dfs(&mut self, component: &[usize]) -> bool {
        let mark = self.sys.len();
        let mut forced = Vec::new();

        let lo = loop {
            self.stats.feasibility_checks += 1;
            let Some((lo, hi)) = self.sys.solution_bounds() else {
                self.undo(mark, &forced);
                return false;
            };
            let mut changed = false;
            for &idx in component {
                if self.orientation.get(idx).is_some() {
                    continue;
                }
                let fwd = self.possible(Direction::Forward.order(self.pairs[idx]), &lo, &hi);
                let rev = self.possible(Direction::Reverse.order(self.pairs[idx]), &lo, &hi);
                let dir = match (fwd, rev) {
                    (false, false) => {
                        self.undo(mark, &forced);
                        return false;
                    }
                    (true, false) => Direction::Forward,
                    (false, true) => Direction::Reverse,
                    (true, true) => continue,
                };
                self.decide(idx, dir);
                forced.push(idx);
                self.stats.forced += 1;
                changed = true;
            }
            if !changed {
                break lo;
            }
        };

        // Branch on the undecided pair with the smallest combined earliest
        // entry; try the earlier vehicle first.
        let entry_lo = |n: NodeId| lo[entry_var(n)];
        let Some(idx) = component
            .iter()
            .copied()
            .filter(|&idx| self.orientation.get(idx).is_none())
            .min_by(|&i, &j| {
                let key = |k: usize| entry_lo(self.pairs[k].0) + entry_lo(self.pairs[k].1);
                key(i).partial_cmp(&key(j)).unwrap().then(i.cmp(&j))
            })
        else {
            return true;
        };

        let (a, b) = self.pairs[idx];
        let a_first = (entry_lo(a), lo[exit_var(a)]) <= (entry_lo(b), lo[exit_var(b)]);
        let first = if a_first {
            Direction::Forward
        } else {
            Direction::Reverse
        };

        for dir in [first, first.flipped()] {
            self.stats.branches += 1;
            let branch_mark = self.sys.len();
            self.decide(idx, dir);
            if self.dfs(component) {
                return true;
            }
            self.sys.truncate(branch_mark);
            self.orientation.set(idx, None);
        }
        self.undo(mark, &forced);
        false
    }

    /// Necessary condition for `leader` to exit before `follower` enters.
    fn possible(&self, (leader, follower): (NodeId, NodeId), lo: &[S], hi: &[S]) -> bool {
        lo[exit_var(leader)] <= hi[entry_var(follower)] + self.tol
    }

    fn decide(&mut self, idx: usize, dir: Direction) {
        self.orientation.set(idx, Some(dir));
        add_precedence(&mut self.sys, dir.order(self.pairs[idx]));
    }

    fn undo(&mut self, mark: usize, forced: &[usize]) {
        self.sys.truncate(mark);
        for &idx in forced {
            self.orientation.set(idx, None);
        }
    }
}

/// Disjunctive pair indices grouped by connected components of the
/// vehicle-interaction graph, ordered by their smallest pair index.
fn components<S: Scalar>(graph: &DisjunctiveGraph<S>) -> Vec<Vec<usize>> {
    let n_vehicles = graph
        .nodes()
        .iter()
        .map(|n| n.vehicle_index + 1)
        .max()
        .unwrap_or(0);
    let mut parent: Vec<usize> = (0..n_vehicles).collect();
    fn root(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for &(a, b) in graph.disjunctive() {
        let ra = root(&mut parent, graph.node(a).vehicle_index);
        let rb = root(&mut parent, graph.node(b).vehicle_index);
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (idx, &(a, _)) in graph.disjunctive().iter().enumerate() {
        let r = root(&mut parent, graph.node(a).vehicle_index);
        match groups.iter_mut().find(|(g, _)| *g == r) {
            Some((_, members)) => members.push(idx),
            None => groups.push((r, vec![idx])),
        }
    }
    groups.into_iter().map(|(_, m)| m).collect()
}
