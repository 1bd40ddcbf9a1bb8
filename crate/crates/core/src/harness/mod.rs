//! Scenario files, closed-loop simulation, capture-set sampling and the
//! scaling benchmark.
//!
//! # Scenario format
//!
//! A scenario is a JSON object, SI units throughout:
//!
//! ```json
//! {
//!   "tau": 0.1,
//!   "horizon_steps": 4570,
//!   "vehicles": [{ "id": 1, "y0": -2.8, "u_min": 0.1, "u_max": 0.3 }],
//!   "routes": [
//!     { "vehicle": 1, "intervals": [{ "area": 1, "alpha": 10.0, "beta": 20.0 }] }
//!   ],
//!   "driver_script": [{ "vehicle": 1, "inputs": [[0, 0.15], [300, 0.2]] }]
//! }
//! ```
//!
//! `horizon_steps` is optional. Every vehicle needs a driver script whose
//! first `[step, speed]` entry is at step 0; each speed holds until the next
//! entry.

mod bench;
mod capture;
mod scenario;
mod sim;

use thiserror::Error;

pub use bench::{
    benchmark, benchmark_scenario, chord_routes, generated_scenario, write_bench_csv, BenchConfig,
    BenchRow,
};
pub use capture::{parse_grid, sample_capture_set, write_capture_csv, CapturePoint, GridAxis};
pub use scenario::{load_scenario, parse_scenario, Scenario, FIG2_JSON};
pub use sim::{random_driver_script, run, BadSetEntry, TraceLog, TraceRow, SUBSAMPLES};

use crate::dynamics::DynamicsError;
use crate::intersection::ScenarioError;
use crate::supervisor::SupervisorError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{source_name}:{line}:{column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Supervisor(#[from] SupervisorError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}
