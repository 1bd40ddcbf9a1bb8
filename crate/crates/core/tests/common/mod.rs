//! Instance generators and independent checks shared by the integration
//! tests and the acceptance suite.
#![allow(dead_code)]

use isect_core::dynamics::Segment;
use isect_core::verifier::{entry_var, exit_var, DifferenceConstraintSystem, ORIGIN};
use isect_core::{
    advance, build_graph, build_system, sigma, step, verify, AreaId, ConflictInterval, Direction,
    DisjunctiveGraph, JointState, NodeId, PlanSource, Route, RouteSet, Schedule, SpeedProfile,
    VehicleId, VehicleState, VerifyError,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Instance {
    pub joint: JointState,
    pub routes: RouteSet,
}

#[derive(Clone, Copy, Debug)]
pub struct InstanceShape {
    pub vehicles: (usize, usize),
    pub areas: (usize, usize),
    pub max_pairs: usize,
    /// Every vehicle visits every area.
    pub full_routes: bool,
    pub speed_ratio: (f64, f64),
}

pub const SOLVER_SHAPE: InstanceShape = InstanceShape {
    vehicles: (2, 4),
    areas: (1, 3),
    max_pairs: 8,
    full_routes: false,
    speed_ratio: (1.0, 3.0),
};

pub const ORACLE_SHAPE: InstanceShape = InstanceShape {
    vehicles: (2, 2),
    areas: (1, 2),
    max_pairs: 2,
    full_routes: true,
    speed_ratio: (1.2, 2.5),
};

/// Random instance with no vehicle pair currently colliding. Positions may
/// lie before, inside or past any interval.
pub fn random_instance(seed: u64, shape: &InstanceShape) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(shape.vehicles.0..=shape.vehicles.1);
        let m = rng.gen_range(shape.areas.0..=shape.areas.1);
        let mut vehicles = Vec::new();
        let mut routes = Vec::new();
        for j in 0..n {
            let id = VehicleId(j as u32 + 1);
            let mut areas: Vec<u32> = (1..=m as u32)
                .filter(|_| shape.full_routes || rng.gen_bool(0.75))
                .collect();
            areas.shuffle(&mut rng);
            let mut at = rng.gen_range(1.0..6.0);
            let intervals: Vec<_> = areas
                .iter()
                .map(|&a| {
                    let alpha = at;
                    let beta = alpha + rng.gen_range(0.5..3.0);
                    at = beta
                        + if rng.gen_bool(0.2) {
                            0.0
                        } else {
                            rng.gen_range(0.0..4.0)
                        };
                    ConflictInterval {
                        area: AreaId(a),
                        alpha,
                        beta,
                    }
                })
                .collect();
            let last = intervals.last().map_or(5.0, |iv| iv.beta);
            let y = rng.gen_range(-4.0..last + 1.0);
            let u_min = rng.gen_range(0.3..1.0);
            let u_max = u_min * rng.gen_range(shape.speed_ratio.0..=shape.speed_ratio.1);
            vehicles.push(VehicleState::new(id, y, u_min, u_max).unwrap());
            routes.push(Route {
                vehicle: id,
                intervals,
            });
        }
        let joint = JointState::new(vehicles).unwrap();
        let routes = RouteSet::new(routes).unwrap();
        let graph = build_graph(&routes, &joint).unwrap();
        if graph.disjunctive().len() > shape.max_pairs {
            continue;
        }
        if matches!(
            verify(&joint, &routes),
            Err(VerifyError::PresentCollision { .. })
        ) {
            continue;
        }
        return Instance { joint, routes };
    }
}

/// Windows recomputed from the closed forms, without the verifier's table.
struct Windows {
    entry: Option<(f64, f64)>,
    travel: Option<(f64, f64)>,
    dwell: (f64, f64),
}

fn windows(graph: &DisjunctiveGraph, joint: &JointState, n: NodeId) -> Windows {
    let node = graph.node(n);
    let v = joint.get(node.vehicle).unwrap();
    let span = |d: f64| (d / v.u_max(), d / v.u_min());
    let inside = node.alpha <= v.y;
    let is_first = graph.first_ops().contains(&n);
    let is_last = graph.last_ops().contains(&n);
    let entry = is_first.then(|| {
        if inside {
            (0.0, 0.0)
        } else {
            span(node.alpha - v.y)
        }
    });
    let travel = graph
        .conjunctive()
        .iter()
        .find(|&&(_, b)| b == n)
        .map(|&(a, _)| span(node.alpha - graph.node(a).beta));
    let mut dwell = span(node.beta - if inside { v.y } else { node.alpha });
    if is_last {
        dwell.1 = dwell.0;
    }
    Windows {
        entry,
        travel,
        dwell,
    }
}

/// Checks a schedule against the scheduling constraints written out
/// directly: entry windows, travel windows, dwell windows and one decided
/// direction per shared-area pair with the leader out before the follower
/// enters. Returns a description of the first violation.
pub fn check_certificate(
    graph: &DisjunctiveGraph,
    joint: &JointState,
    s: &Schedule,
    eps: f64,
) -> Result<(), String> {
    let within = |x: f64, (lo, hi): (f64, f64)| lo - eps <= x && x <= hi + eps;
    if s.entry.len() != graph.len() || s.dwell.len() != graph.len() {
        return Err("schedule size mismatch".into());
    }
    for k in 0..graph.len() {
        let n = NodeId(k);
        let w = windows(graph, joint, n);
        let (t, p) = (s.entry[k], s.dwell[k]);
        if t < -eps {
            return Err(format!("node {k}: negative entry {t}"));
        }
        if let Some(e) = w.entry {
            if !within(t, e) {
                return Err(format!("node {k}: entry {t} outside {e:?}"));
            }
        }
        if let Some(tr) = w.travel {
            let (a, _) = *graph.conjunctive().iter().find(|&&(_, b)| b == n).unwrap();
            let gap = t - (s.entry[a.0] + s.dwell[a.0]);
            if !within(gap, tr) {
                return Err(format!("node {k}: travel {gap} outside {tr:?}"));
            }
        }
        if !within(p, w.dwell) {
            return Err(format!("node {k}: dwell {p} outside {:?}", w.dwell));
        }
    }
    if s.orientation.len() != graph.disjunctive().len() {
        return Err("orientation size mismatch".into());
    }
    for (idx, &(a, b)) in graph.disjunctive().iter().enumerate() {
        let (lead, follow) = match s.orientation.get(idx) {
            Some(Direction::Forward) => (a, b),
            Some(Direction::Reverse) => (b, a),
            None => return Err(format!("pair {idx} undecided")),
        };
        let exit = s.entry[lead.0] + s.dwell[lead.0];
        if exit > s.entry[follow.0] + eps {
            return Err(format!(
                "pair {idx}: leader exits at {exit} after follower enters at {}",
                s.entry[follow.0]
            ));
        }
    }
    Ok(())
}

/// Same instance with speed bounds scaled to `[u_min·lo, u_max·hi]`.
pub fn scale_bounds(joint: &JointState, lo: f64, hi: f64) -> Option<JointState> {
    let vehicles = joint
        .vehicles()
        .iter()
        .map(|v| VehicleState::new(v.id, v.y, v.u_min() * lo, v.u_max() * hi).ok())
        .collect::<Option<Vec<_>>>()?;
    JointState::new(vehicles).ok()
}

/// Every conflict interval widened by `frac` of its width on both sides
/// (narrowed when negative). `None` if the result is not a valid route set.
pub fn scale_areas(routes: &RouteSet, frac: f64) -> Option<RouteSet> {
    let routes = routes
        .iter()
        .map(|r| Route {
            vehicle: r.vehicle,
            intervals: r
                .intervals
                .iter()
                .map(|iv| {
                    let pad = frac * (iv.beta - iv.alpha);
                    ConflictInterval {
                        area: iv.area,
                        alpha: iv.alpha - pad,
                        beta: iv.beta + pad,
                    }
                })
                .collect(),
        })
        .collect();
    RouteSet::new(routes).ok()
}

/// Verifier answer; a present collision counts as unsafe.
pub fn is_safe(joint: &JointState, routes: &RouteSet) -> bool {
    match verify(joint, routes) {
        Ok(v) => v.is_safe(),
        Err(VerifyError::PresentCollision { .. }) => false,
        Err(e) => panic!("{e}"),
    }
}

/// Speeds of two profiles that share breakpoints, with `slow ≤ fast`
/// everywhere.
pub fn ordered_profiles(breaks: &[f64], pairs: &[(f64, f64)]) -> (SpeedProfile, SpeedProfile) {
    let mut t = 0.0;
    let mut slow = Vec::new();
    let mut fast = Vec::new();
    for (k, &(a, b)) in pairs.iter().enumerate() {
        slow.push(Segment {
            start: t,
            speed: a.min(b),
        });
        fast.push(Segment {
            start: t,
            speed: a.max(b),
        });
        t += breaks[k % breaks.len()];
    }
    (
        SpeedProfile::new(slow).unwrap(),
        SpeedProfile::new(fast).unwrap(),
    )
}

/// `advance` under the slower profile never exceeds `advance` under the
/// faster one.
pub fn order_preserved(
    y: f64,
    slow: &SpeedProfile,
    fast: &SpeedProfile,
    times: &[f64],
) -> Result<(), String> {
    let v = VehicleState::new(VehicleId(1), y, 0.1, 2.0).unwrap();
    for &t in times {
        let a = advance(&v, slow, t).map_err(|e| e.to_string())?;
        let b = advance(&v, fast, t).map_err(|e| e.to_string())?;
        if a > b + 1e-12 * (1.0 + b.abs()) {
            return Err(format!("t = {t}: {a} > {b}"));
        }
    }
    Ok(())
}

/// `n` exact steps at constant `u` match one `advance` over `n·dt`.
pub fn steps_compose(y: f64, u: f64, dt: f64, n: u32, tol: f64) -> Result<(), String> {
    let v0 = VehicleState::new(VehicleId(1), y, 0.1, 2.0).unwrap();
    let mut v = v0;
    for _ in 0..n {
        v = step(&v, u, dt).map_err(|e| e.to_string())?;
    }
    let direct = advance(&v0, &SpeedProfile::constant(0.0, u), f64::from(n) * dt).unwrap();
    if (v.y - direct).abs() > tol {
        return Err(format!("{} vs {direct}", v.y));
    }
    Ok(())
}

/// Builds a system that is feasible by construction (constraints slack
/// around a hidden potential) and checks that it is accepted with a solution
/// satisfying every constraint. Then closes a cycle of total weight
/// `-deficit` and checks that it is rejected.
pub fn negative_cycle_case(
    potential: &[f64],
    arcs: &[(usize, usize, f64)],
    cycle: &[usize],
    deficit: f64,
) -> Result<(), String> {
    let n = potential.len();
    // Variables never precede the origin, so the origin gets the lowest value.
    let mut potential = potential.to_vec();
    potential[0] = potential.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sys = DifferenceConstraintSystem::<f64>::new(n);
    for &(a, b, slack) in arcs {
        let (a, b) = (a % n, b % n);
        sys.add(a, b, potential[a] - potential[b] + slack);
    }
    if !sys.feasible() {
        return Err("system with a potential was rejected".into());
    }
    let x = sys.earliest_solution().ok_or("no earliest solution")?;
    for c in sys.constraints() {
        if x[c.plus] - x[c.minus] > c.bound + 1e-9 {
            return Err(format!("solution violates {c:?}"));
        }
    }
    let cyc: Vec<usize> = cycle.iter().map(|&k| k % n).collect();
    let mut distinct = cyc.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Ok(());
    }
    let mut sys = DifferenceConstraintSystem::<f64>::new(n);
    for w in distinct.windows(2) {
        sys.add(w[0], w[1], 1.0);
    }
    let last = *distinct.last().unwrap();
    sys.add(last, distinct[0], -(distinct.len() as f64 - 1.0) - deficit);
    if sys.feasible() {
        return Err(format!(
            "cycle {distinct:?} with weight -{deficit} accepted"
        ));
    }
    Ok(())
}

/// Earliest entry times cannot be lowered by `delta` under the same
/// orientation.
pub fn earliest_is_minimal(inst: &Instance, delta: f64) -> Result<(), String> {
    let v = verify(&inst.joint, &inst.routes).map_err(|e| e.to_string())?;
    let Some(s) = v.schedule else {
        return Ok(());
    };
    let base = build_system(&v.graph, &v.bounds, &s.orientation);
    for k in 0..v.graph.len() {
        let n = NodeId(k);
        let mut sys = base.clone();
        sys.add(entry_var(n), ORIGIN, s.entry[k] - delta);
        if sys.feasible() {
            return Err(format!(
                "node {k}: entry below {} still feasible",
                s.entry[k]
            ));
        }
        let mut sys = base.clone();
        sys.add(exit_var(n), ORIGIN, s.entry[k] + s.dwell[k] - delta);
        if sys.feasible() {
            return Err(format!("node {k}: exit below earliest still feasible"));
        }
    }
    Ok(())
}

/// Every waypoint of the synthesized plan is reached within `tol` metres:
/// `alpha` at the scheduled entry (unless already past it) and `beta` at the
/// scheduled exit.
pub fn sigma_waypoints(inst: &Instance, anchor: f64, tol: f64) -> Result<usize, String> {
    let v = verify(&inst.joint, &inst.routes).map_err(|e| e.to_string())?;
    let Some(s) = v.schedule else {
        return Ok(0);
    };
    let plan =
        sigma(&inst.joint, anchor, &v.graph, &s, PlanSource::Initial).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (k, node) in v.graph.nodes().iter().enumerate() {
        let j = node.vehicle_index;
        let y0 = inst.joint.vehicles()[j].y;
        let mut targets = vec![(s.entry[k] + s.dwell[k], node.beta)];
        if node.alpha > y0 {
            targets.push((s.entry[k], node.alpha));
        }
        for (t, want) in targets {
            let got = plan
                .positions_at(&inst.joint, anchor + t)
                .map_err(|e| e.to_string())?[j];
            if (got - want).abs() > tol {
                return Err(format!(
                    "node {k}: at t = {t} position {got}, expected {want}"
                ));
            }
            checked += 1;
        }
    }
    for (p, veh) in plan.profiles.iter().zip(inst.joint.vehicles()) {
        p.check_bounds(veh).map_err(|e| e.to_string())?;
    }
    Ok(checked)
}
