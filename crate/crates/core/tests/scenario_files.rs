use std::io::Write;

use isect_core::harness::{load_scenario, run, HarnessError, Scenario};

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn bundled_scenario_round_trips_through_a_file() {
    let fig2 = Scenario::fig2();
    let f = write_temp(&fig2.to_json());
    assert_eq!(load_scenario(f.path()).unwrap(), fig2);
}

#[test]
fn missing_file_reports_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("absent.json");
    match load_scenario(&path).unwrap_err() {
        HarnessError::Io { path: p, .. } => assert!(p.ends_with("absent.json")),
        other => panic!("{other}"),
    }
}

#[test]
fn parse_errors_name_the_file_and_line() {
    let f = write_temp("{\n  \"tau\": 0.1,\n  \"vehicles\": [}\n");
    match load_scenario(f.path()).unwrap_err() {
        HarnessError::Parse {
            source_name, line, ..
        } => {
            assert_eq!(source_name, f.path().display().to_string());
            assert_eq!(line, 3);
        }
        other => panic!("{other}"),
    }
}

#[test]
fn invalid_scenarios_are_rejected() {
    let bad = [
        // negative step
        r#"{"tau": -0.1, "vehicles": []}"#,
        // route for a vehicle that does not exist
        r#"{"tau": 0.1, "vehicles": [], "routes": [{"vehicle": 4, "intervals": []}]}"#,
        // overlapping intervals
        r#"{"tau": 0.1,
            "vehicles": [{"id": 1, "y0": 0.0, "u_min": 0.1, "u_max": 0.3}],
            "routes": [{"vehicle": 1, "intervals": [
                {"area": 1, "alpha": 1.0, "beta": 3.0},
                {"area": 2, "alpha": 2.0, "beta": 4.0}]}],
            "driver_script": [{"vehicle": 1, "inputs": [[0, 0.2]]}]}"#,
        // script speed above the bound
        r#"{"tau": 0.1,
            "vehicles": [{"id": 1, "y0": 0.0, "u_min": 0.1, "u_max": 0.3}],
            "driver_script": [{"vehicle": 1, "inputs": [[0, 0.5]]}]}"#,
    ];
    for text in bad {
        let f = write_temp(text);
        assert!(load_scenario(f.path()).is_err(), "{text}");
    }
}

#[test]
fn loaded_scenario_runs() {
    let text = r#"{
        "tau": 0.5,
        "vehicles": [
            {"id": 1, "y0": 0.0, "u_min": 0.5, "u_max": 1.0},
            {"id": 2, "y0": 0.0, "u_min": 0.5, "u_max": 1.0}
        ],
        "routes": [
            {"vehicle": 1, "intervals": [{"area": 1, "alpha": 5.0, "beta": 6.0}]},
            {"vehicle": 2, "intervals": [{"area": 1, "alpha": 5.0, "beta": 6.0}]}
        ],
        "driver_script": [
            {"vehicle": 1, "inputs": [[0, 1.0]]},
            {"vehicle": 2, "inputs": [[0, 1.0]]}
        ]
    }"#;
    let f = write_temp(text);
    let s = load_scenario(f.path()).unwrap();
    assert!(run(&s, false).unwrap().first_collision.is_some());
    let trace = run(&s, true).unwrap();
    assert!(trace.first_collision.is_none());
    assert!(trace.override_steps().count() > 0);
}
