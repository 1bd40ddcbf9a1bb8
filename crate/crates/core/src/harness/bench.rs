//! Scaling benchmark on a generated multi-road intersection.
//!
//! The generator places `n` straight roads as chords of a circle. Road `j`
//! enters at angle `2πj/n` and spans an arc of `(s − 0.5)·2π/n`, so it crosses
//! exactly the `s − 1` roads entering just before it and the `s − 1` entering
//! just after it, with `s = min(3, ⌈n/2⌉)`. That gives `n(s − 1)` conflict
//! areas, 40 for 20 roads. On every road the crossings are ordered
//! geometrically and get the intervals (10, 20), (32, 42), (54, 64), …

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{JointState, VehicleId, VehicleState};
use crate::intersection::{AreaId, ConflictInterval, Route, RouteSet};
use crate::supervisor::{init, supervisor_step};
use crate::verifier::verify;

use super::{random_driver_script, HarnessError, Scenario};

pub const U_MIN: f64 = 0.1;
pub const U_MAX: f64 = 0.3;
pub const TAU: f64 = 0.1;

/// Routes of the generated `n`-road topology, vehicle ids `1..=n`.
pub fn chord_routes(n: usize) -> RouteSet {
    let delta = std::f64::consts::TAU / n.max(1) as f64;
    let s = n.div_ceil(2).min(3);
    let span = ((s as f64 - 0.5) * delta).min(std::f64::consts::PI - delta / 4.0);
    let endpoints: Vec<_> = (0..n)
        .map(|j| {
            let a = delta * j as f64;
            ((a.cos(), a.sin()), ((a + span).cos(), (a + span).sin()))
        })
        .collect();

    // (distance along road, area) per road
    let mut crossings: Vec<Vec<(f64, AreaId)>> = vec![Vec::new(); n];
    let mut next_area = 1;
    for j in 0..n {
        for k in j + 1..n {
            if let Some((tj, tk)) = segment_intersection(endpoints[j], endpoints[k]) {
                crossings[j].push((tj, AreaId(next_area)));
                crossings[k].push((tk, AreaId(next_area)));
                next_area += 1;
            }
        }
    }
    let routes = crossings
        .into_iter()
        .enumerate()
        .map(|(j, mut c)| {
            c.sort_by(|a, b| a.0.total_cmp(&b.0));
            Route {
                vehicle: VehicleId(j as u32 + 1),
                intervals: c
                    .into_iter()
                    .enumerate()
                    .map(|(i, (_, area))| ConflictInterval {
                        area,
                        alpha: 10.0 + 22.0 * i as f64,
                        beta: 20.0 + 22.0 * i as f64,
                    })
                    .collect(),
            }
        })
        .collect();
    RouteSet::new(routes).expect("generated routes are valid")
}

type Point = (f64, f64);

/// Parameters along both segments of their proper crossing, if any.
fn segment_intersection((p, q): (Point, Point), (r, s): (Point, Point)) -> Option<(f64, f64)> {
    let d1 = (q.0 - p.0, q.1 - p.1);
    let d2 = (s.0 - r.0, s.1 - r.1);
    let den = d1.0 * d2.1 - d1.1 * d2.0;
    if den.abs() < 1e-12 {
        return None;
    }
    let w = (r.0 - p.0, r.1 - p.1);
    let t = (w.0 * d2.1 - w.1 * d2.0) / den;
    let u = (w.0 * d1.1 - w.1 * d1.0) / den;
    let inside = |x: f64| x > 1e-9 && x < 1.0 - 1e-9;
    (inside(t) && inside(u)).then_some((t, u))
}

/// Generated scenario with seeded start positions in `[-10, 0]` and a seeded
/// random driver script. Seeds whose initial state is unsafe are skipped, so
/// the result always admits a supervised run.
pub fn generated_scenario(n: usize, horizon_steps: u64, seed: u64) -> Scenario {
    let routes = chord_routes(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let vehicles = (0..n)
            .map(|j| {
                VehicleState::new(
                    VehicleId(j as u32 + 1),
                    rng.gen_range(-10.0..=0.0),
                    U_MIN,
                    U_MAX,
                )
                .expect("valid bounds")
            })
            .collect();
        let initial = JointState::new(vehicles).expect("unique ids");
        if !matches!(verify(&initial, &routes), Ok(v) if v.is_safe()) {
            continue;
        }
        let script = random_driver_script(&initial, horizon_steps, 50..=300, rng.gen());
        return Scenario::new(TAU, initial, routes, script, Some(horizon_steps))
            .expect("generated scenario is valid");
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BenchConfig {
    pub steps: u64,
    /// Number of timed passes over each run; every step keeps its fastest
    /// time, which filters scheduler noise out of the worst case.
    pub repeats: usize,
    /// Independent generated scenarios per vehicle count, seeded
    /// `seed, seed + 1, …`; the worst case is taken over all of them.
    pub replicates: u64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            steps: 3000,
            repeats: 5,
            replicates: 3,
            seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub areas: usize,
    pub overrides: usize,
    pub worst_ms: f64,
    pub mean_ms: f64,
}

/// Times `supervisor_step` along a supervised run of the generated topology
/// for every `n`.
pub fn benchmark(ns: &[usize], config: &BenchConfig) -> Result<Vec<BenchRow>, HarnessError> {
    ns.iter()
        .map(|&n| {
            let runs = (0..config.replicates.max(1))
                .map(|r| {
                    benchmark_scenario(
                        &generated_scenario(n, config.steps, config.seed + r),
                        config,
                    )
                })
                .collect::<Result<Vec<_>, _>>()?;
            let count = runs.len() as f64;
            Ok(BenchRow {
                n,
                areas: runs[0].areas,
                overrides: runs.iter().map(|r| r.overrides).sum(),
                worst_ms: runs.iter().map(|r| r.worst_ms).fold(0.0, f64::max),
                mean_ms: runs.iter().map(|r| r.mean_ms).sum::<f64>() / count,
            })
        })
        .collect()
}

pub fn benchmark_scenario(
    scenario: &Scenario,
    config: &BenchConfig,
) -> Result<BenchRow, HarnessError> {
    let routes = &scenario.routes;
    let mut times = vec![f64::INFINITY; scenario.horizon_steps as usize];
    let mut overrides = 0;
    // The closed loop is deterministic, so every pass replays the same steps.
    for _ in 0..config.repeats.max(1) {
        let mut plan = init(&scenario.initial, routes)?;
        let mut state = scenario.initial.clone();
        overrides = 0;
        for (k, best) in times.iter_mut().enumerate() {
            let u = scenario.driver_inputs(k as u64);
            let clock = Instant::now();
            let (decision, next_plan) =
                supervisor_step(&state, &u, &plan, routes, k as u64, scenario.tau)?;
            *best = best.min(clock.elapsed().as_secs_f64() * 1e3);
            overrides += usize::from(decision.overridden);
            state = decision.next_state;
            plan = next_plan;
        }
    }
    let areas: std::collections::HashSet<_> = routes
        .iter()
        .flat_map(|r| r.intervals.iter().map(|iv| iv.area))
        .collect();
    Ok(BenchRow {
        n: scenario.len(),
        areas: areas.len(),
        overrides,
        worst_ms: times.iter().copied().fold(0.0, f64::max),
        mean_ms: times.iter().sum::<f64>() / times.len().max(1) as f64,
    })
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "worst_ms", "mean_ms"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            format!("{:.4}", r.worst_ms),
            format!("{:.4}", r.mean_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area_count(routes: &RouteSet) -> usize {
        routes.iter().map(|r| r.intervals.len()).sum::<usize>() / 2
    }

    #[test]
    fn topology_sizes() {
        for (n, areas) in [(1, 0), (3, 3), (6, 12), (10, 20), (15, 30), (20, 40)] {
            let routes = chord_routes(n);
            assert_eq!(area_count(&routes), areas, "n = {n}");
        }
    }

    #[test]
    fn three_roads_match_fig2_shape() {
        let routes = chord_routes(3);
        for r in routes.iter() {
            assert_eq!(r.intervals.len(), 2);
            assert_eq!((r.intervals[1].alpha, r.intervals[1].beta), (32.0, 42.0));
        }
    }

    #[test]
    fn generated_scenarios_are_deterministic() {
        assert_eq!(generated_scenario(6, 100, 3), generated_scenario(6, 100, 3));
    }

    #[test]
    fn single_vehicle_bench() {
        let cfg = BenchConfig {
            steps: 20,
            repeats: 1,
            replicates: 2,
            seed: 0,
        };
        let rows = benchmark(&[1], &cfg).unwrap();
        assert_eq!(rows[0].n, 1);
        assert_eq!(rows[0].overrides, 0);
        let mut buf = Vec::new();
        write_bench_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("n,worst_ms,mean_ms\n1,"));
    }
}
