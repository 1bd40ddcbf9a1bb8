mod common;

use common::*;
use isect_core::oracle::enumeration_oracle;
use isect_core::verifier::{build_system, compute_bounds, solve};
use isect_core::{build_graph, verify};
use proptest::prelude::*;

fn speed() -> impl Strategy<Value = f64> {
    0.1f64..2.0
}

fn profile_pair() -> impl Strategy<Value = (Vec<f64>, Vec<(f64, f64)>)> {
    (
        prop::collection::vec(0.01f64..20.0, 1..6),
        prop::collection::vec((speed(), speed()), 1..8),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn order_preservation((breaks, pairs) in profile_pair(), y in -50.0f64..50.0,
                          times in prop::collection::vec(0.0f64..100.0, 1..10)) {
        let (slow, fast) = ordered_profiles(&breaks, &pairs);
        prop_assert_eq!(order_preserved(y, &slow, &fast, &times), Ok(()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn step_composition(y in -50.0f64..50.0, u in speed(), dt in 0.001f64..1.0, n in 1u32..500) {
        prop_assert_eq!(steps_compose(y, u, dt, n, 1e-9), Ok(()));
    }

    #[test]
    fn step_composition_exact_on_dyadics(y in -4096i32..4096, u in 103u32..2048, dt in 1u32..64, n in 1u32..200) {
        let (y, u, dt) = (f64::from(y) / 64.0, f64::from(u) / 1024.0, f64::from(dt) / 64.0);
        prop_assert_eq!(steps_compose(y, u, dt, n, 0.0), Ok(()));
    }

    #[test]
    fn negative_cycles(potential in prop::collection::vec(-100.0f64..100.0, 2..12),
                       arcs in prop::collection::vec((0usize..12, 0usize..12, 0.0f64..10.0), 0..40),
                       cycle in prop::collection::vec(0usize..12, 2..6),
                       deficit in 1e-6f64..10.0) {
        prop_assert_eq!(negative_cycle_case(&potential, &arcs, &cycle, deficit), Ok(()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_matches_enumeration(seed in any::<u64>()) {
        let inst = random_instance(seed, &SOLVER_SHAPE);
        let graph = build_graph(&inst.routes, &inst.joint).unwrap();
        let bounds = compute_bounds(&graph, &inst.joint).unwrap();
        let outcome = solve(&graph, &bounds);
        prop_assert_eq!(outcome.is_feasible(), enumeration_oracle(&graph, &bounds).unwrap());
        if let Some(s) = outcome.schedule() {
            prop_assert_eq!(check_certificate(&graph, &inst.joint, s, EPS), Ok(()));
        }
    }

    #[test]
    fn earliest_schedule_is_minimal(seed in any::<u64>()) {
        prop_assert_eq!(earliest_is_minimal(&random_instance(seed, &SOLVER_SHAPE), 1e-6), Ok(()));
    }

    #[test]
    fn sigma_reaches_waypoints(seed in any::<u64>(), anchor in 0.0f64..1000.0) {
        prop_assert!(sigma_waypoints(&random_instance(seed, &SOLVER_SHAPE), anchor, 1e-6).is_ok());
    }

    #[test]
    fn dropping_a_pair_keeps_feasibility(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let inst = random_instance(seed, &SOLVER_SHAPE);
        let v = verify(&inst.joint, &inst.routes).unwrap();
        if let Some(s) = v.schedule {
            if !s.orientation.is_empty() {
                let mut o = s.orientation.clone();
                o.set(pick.index(o.len()), None);
                prop_assert!(build_system(&v.graph, &v.bounds, &o).feasible());
            }
        }
    }

    #[test]
    fn windows_are_ordered(seed in any::<u64>()) {
        let inst = random_instance(seed, &SOLVER_SHAPE);
        let v = verify(&inst.joint, &inst.routes).unwrap();
        for b in v.bounds.nodes() {
            prop_assert!(b.dwell.lo <= b.dwell.hi);
            if let Some(e) = b.entry {
                prop_assert!(0.0 <= e.lo && e.lo <= e.hi);
            }
            if let Some(t) = b.travel {
                prop_assert!(0.0 <= t.lo && t.lo <= t.hi);
            }
        }
    }

    #[test]
    fn advancing_never_adds_nodes(seed in any::<u64>(), dy in prop::collection::vec(0.0f64..5.0, 4)) {
        let inst = random_instance(seed, &SOLVER_SHAPE);
        let before = build_graph(&inst.routes, &inst.joint).unwrap();
        let ys: Vec<f64> = inst.joint.positions().iter().zip(&dy).map(|(y, d)| y + d).collect();
        let after = build_graph(&inst.routes, &inst.joint.with_positions(&ys).unwrap()).unwrap();
        prop_assert!(after.len() <= before.len());
        for n in after.nodes() {
            prop_assert!(before.find(n.area, n.vehicle).is_some());
        }
    }
}
