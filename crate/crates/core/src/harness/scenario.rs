use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{JointState, VehicleId, VehicleState};
use crate::intersection::{validate_scenario, AreaId, ConflictInterval, Route, RouteSet};

use super::HarnessError;

/// The bundled three-vehicle, three-area scenario.
pub const FIG2_JSON: &str = include_str!("../../scenarios/fig2.json");

/// A validated closed-loop simulation setup.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub tau: f64,
    /// Initial joint state.
    pub initial: JointState,
    pub routes: RouteSet,
    /// Per vehicle (joint-state order), `(step, speed)` change points sorted
    /// by step. Each script starts at step 0.
    pub driver_script: Vec<Vec<(u64, f64)>>,
    pub horizon_steps: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon_steps: Option<u64>,
    vehicles: Vec<VehicleSpec>,
    #[serde(default)]
    routes: Vec<RouteSpec>,
    #[serde(default)]
    driver_script: Vec<ScriptSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehicleSpec {
    id: u32,
    y0: f64,
    u_min: f64,
    u_max: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteSpec {
    vehicle: u32,
    intervals: Vec<IntervalSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalSpec {
    area: u32,
    alpha: f64,
    beta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptSpec {
    vehicle: u32,
    inputs: Vec<(u64, f64)>,
}

fn invalid(field: impl Into<String>, message: impl std::fmt::Display) -> HarnessError {
    HarnessError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

impl Scenario {
    /// Assembles and validates a scenario. With `horizon_steps = None` the
    /// horizon is the number of steps the slowest vehicle needs to clear its
    /// last area at minimum speed.
    pub fn new(
        tau: f64,
        initial: JointState,
        routes: RouteSet,
        driver_script: Vec<Vec<(u64, f64)>>,
        horizon_steps: Option<u64>,
    ) -> Result<Self, HarnessError> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(invalid("tau", format!("must be positive, got {tau}")));
        }
        for route in routes.iter() {
            if initial.get(route.vehicle).is_none() {
                return Err(invalid(
                    "routes",
                    format!("route for unknown vehicle {}", route.vehicle),
                ));
            }
        }
        if driver_script.len() != initial.len() {
            return Err(invalid(
                "driver_script",
                format!(
                    "{} scripts for {} vehicles",
                    driver_script.len(),
                    initial.len()
                ),
            ));
        }
        for (v, script) in initial.vehicles().iter().zip(&driver_script) {
            let field = || format!("driver_script[vehicle {}]", v.id);
            match script.first() {
                None => return Err(invalid(field(), "no inputs")),
                Some(&(s, _)) if s != 0 => {
                    return Err(invalid(
                        field(),
                        format!("first input at step {s}, expected 0"),
                    ))
                }
                _ => {}
            }
            if script.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(invalid(field(), "steps must be strictly increasing"));
            }
            for &(s, u) in script {
                v.check_speed(u)
                    .map_err(|e| invalid(format!("{} step {s}", field()), e))?;
            }
        }
        let horizon_steps =
            horizon_steps.unwrap_or_else(|| default_horizon(&initial, &routes, tau));
        Ok(Self {
            tau,
            initial,
            routes,
            driver_script,
            horizon_steps,
        })
    }

    /// Drivers' inputs for step `k`, in joint-state order.
    pub fn driver_inputs(&self, k: u64) -> Vec<f64> {
        self.driver_script
            .iter()
            .map(|script| {
                let idx = script.partition_point(|&(s, _)| s <= k);
                script[idx.saturating_sub(1)].1
            })
            .collect()
    }

    pub fn with_driver_script(
        mut self,
        script: Vec<Vec<(u64, f64)>>,
    ) -> Result<Self, HarnessError> {
        self.driver_script = script;
        let horizon = self.horizon_steps;
        Scenario::new(
            self.tau,
            self.initial,
            self.routes,
            self.driver_script,
            Some(horizon),
        )
    }

    pub fn len(&self) -> usize {
        self.initial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_empty()
    }

    pub fn fig2() -> Self {
        parse_scenario(FIG2_JSON).expect("bundled scenario is valid")
    }

    /// JSON text in the same schema `load_scenario` reads.
    pub fn to_json(&self) -> String {
        let file = ScenarioFile {
            tau: self.tau,
            horizon_steps: Some(self.horizon_steps),
            vehicles: self
                .initial
                .vehicles()
                .iter()
                .map(|v| VehicleSpec {
                    id: v.id.0,
                    y0: v.y,
                    u_min: v.u_min(),
                    u_max: v.u_max(),
                })
                .collect(),
            routes: self
                .routes
                .iter()
                .map(|r| RouteSpec {
                    vehicle: r.vehicle.0,
                    intervals: r
                        .intervals
                        .iter()
                        .map(|iv| IntervalSpec {
                            area: iv.area.0,
                            alpha: iv.alpha,
                            beta: iv.beta,
                        })
                        .collect(),
                })
                .collect(),
            driver_script: self
                .initial
                .vehicles()
                .iter()
                .zip(&self.driver_script)
                .map(|(v, s)| ScriptSpec {
                    vehicle: v.id.0,
                    inputs: s.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("scenario serializes")
    }
}

fn default_horizon(initial: &JointState, routes: &RouteSet, tau: f64) -> u64 {
    let seconds = initial
        .vehicles()
        .iter()
        .filter_map(|v| {
            let last = routes.route_of(v.id)?.intervals.last()?;
            Some(((last.beta - v.y) / v.u_min()).max(0.0))
        })
        .fold(0.0, f64::max);
    (seconds / tau - 1e-9).ceil().max(0.0) as u64
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text).map_err(|e| match e {
        HarnessError::Parse {
            line,
            column,
            message,
            ..
        } => HarnessError::Parse {
            source_name: path.display().to_string(),
            line,
            column,
            message,
        },
        other => other,
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, HarnessError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| HarnessError::Parse {
        source_name: "<input>".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let vehicles = file
        .vehicles
        .iter()
        .enumerate()
        .map(|(k, v)| {
            VehicleState::new(VehicleId(v.id), v.y0, v.u_min, v.u_max)
                .map_err(|e| invalid(format!("vehicles[{k}]"), e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let initial = JointState::new(vehicles).map_err(|e| invalid("vehicles", e))?;

    let routes = file
        .routes
        .iter()
        .map(|r| Route {
            vehicle: VehicleId(r.vehicle),
            intervals: r
                .intervals
                .iter()
                .map(|iv| ConflictInterval {
                    area: AreaId(iv.area),
                    alpha: iv.alpha,
                    beta: iv.beta,
                })
                .collect(),
        })
        .collect();
    let routes = validate_scenario(routes)?;

    let mut scripts = vec![None; initial.len()];
    for (k, s) in file.driver_script.iter().enumerate() {
        let idx = initial.index_of(VehicleId(s.vehicle)).ok_or_else(|| {
            invalid(
                format!("driver_script[{k}]"),
                format!("unknown vehicle {}", s.vehicle),
            )
        })?;
        if scripts[idx].replace(s.inputs.clone()).is_some() {
            return Err(invalid(
                format!("driver_script[{k}]"),
                format!("second script for vehicle {}", s.vehicle),
            ));
        }
    }
    let scripts = scripts
        .into_iter()
        .zip(initial.vehicles())
        .map(|(s, v)| {
            s.ok_or_else(|| {
                invalid(
                    "driver_script",
                    format!("missing script for vehicle {}", v.id),
                )
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Scenario::new(file.tau, initial, routes, scripts, file.horizon_steps)
}
