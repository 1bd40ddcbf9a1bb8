use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use isect_core::harness::{
    self, load_scenario, parse_grid, sample_capture_set, write_bench_csv, write_capture_csv,
    BenchConfig, Scenario,
};
use isect_core::{verify, VerifyError};

/// Supervisory collision avoidance at multi-area intersections.
#[derive(Parser)]
#[command(name = "isect", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the closed loop and write the trace as CSV.
    Run {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Apply the driver script without the supervisor.
        #[arg(long)]
        unsupervised: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether the scenario's initial state is safe.
    Verify {
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Sample capture-set membership on a position grid.
    CaptureSet {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// One `min:max:step` axis per vehicle, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time supervisor steps on generated intersections.
    Bench {
        /// Comma-separated vehicle counts.
        #[arg(long, value_delimiter = ',', default_value = "3,6,10,15,20")]
        vehicles: Vec<usize>,
        #[arg(long, default_value_t = BenchConfig::default().steps)]
        steps: u64,
        #[arg(long, default_value_t = BenchConfig::default().seed)]
        seed: u64,
        /// Generated scenarios per vehicle count.
        #[arg(long, default_value_t = BenchConfig::default().replicates)]
        replicates: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Outcome {
    Safe,
    Unsafe,
}

fn scenario_or_default(path: Option<&Path>) -> Result<Scenario> {
    match path {
        Some(p) => Ok(load_scenario(p)?),
        None => Ok(Scenario::fig2()),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn execute(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Run {
            scenario,
            unsupervised,
            out,
        } => {
            let scenario = scenario_or_default(scenario.as_deref())?;
            let trace = harness::run(&scenario, !unsupervised)?;
            trace.write_csv(output(out.as_deref())?)?;
            match trace.first_collision {
                Some(hit) => {
                    eprintln!("bad set entered at t = {:.3} s (step {})", hit.t, hit.step);
                    Ok(Outcome::Unsafe)
                }
                None => {
                    let overrides = trace.override_steps().count();
                    eprintln!(
                        "{} steps, {overrides} overridden, no collision",
                        trace.rows.len()
                    );
                    Ok(Outcome::Safe)
                }
            }
        }
        Command::Verify { scenario } => {
            let scenario = scenario_or_default(scenario.as_deref())?;
            match verify(&scenario.initial, &scenario.routes) {
                Ok(v) => match v.schedule {
                    Some(s) => {
                        println!("safe");
                        for (node, t) in v.graph.nodes().iter().zip(&s.entry) {
                            println!(
                                "  vehicle {} enters area {} at {t:.4} s",
                                node.vehicle, node.area
                            );
                        }
                        Ok(Outcome::Safe)
                    }
                    None => {
                        println!("unsafe: every admissible input leads to a collision");
                        Ok(Outcome::Unsafe)
                    }
                },
                Err(e @ VerifyError::PresentCollision { .. }) => {
                    println!("unsafe: {e}");
                    Ok(Outcome::Unsafe)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::CaptureSet {
            scenario,
            grid,
            out,
        } => {
            let scenario = scenario_or_default(scenario.as_deref())?;
            let axes = parse_grid(&grid)?;
            let points = sample_capture_set(&scenario, &axes)?;
            write_capture_csv(&points, scenario.len(), output(out.as_deref())?)?;
            let captured = points.iter().filter(|p| p.captured).count();
            eprintln!("{captured} of {} points in the capture set", points.len());
            Ok(Outcome::Safe)
        }
        Command::Bench {
            vehicles,
            steps,
            seed,
            replicates,
            out,
        } => {
            let config = BenchConfig {
                steps,
                seed,
                replicates,
                ..BenchConfig::default()
            };
            let rows = harness::benchmark(&vehicles, &config)?;
            for r in &rows {
                eprintln!(
                    "n = {:2}: {:2} areas, {:4} overrides, worst {:8.3} ms, mean {:7.3} ms",
                    r.n, r.areas, r.overrides, r.worst_ms, r.mean_ms
                );
            }
            write_bench_csv(&rows, output(out.as_deref())?)?;
            Ok(Outcome::Safe)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(Outcome::Safe) => ExitCode::SUCCESS,
        Ok(Outcome::Unsafe) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
