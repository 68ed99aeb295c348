//! TOML scenario files.
//!
//! ```toml
//! name = "head-on"
//!
//! [sim]
//! dt = 0.01
//! steps = 3000
//! steering_limit = 0.5
//! steering_rate_limit = 0.01
//! pixel_noise_std = 0.0   # optional
//! seed = 0                # optional
//!
//! [camera]
//! focal_length = 160.0
//! width = 320
//! height = 240
//! # cx, cy optional; default to the image center
//!
//! [controller]
//! time_headway = 3.0
//! w_theta = 61
//! w_a = 21
//! epsilon = 0.1
//! k_p = 0.5
//! tau_dot_e = 0.0               # optional
//! selection = "safe-membership" # or "literal"; optional
//!
//! [estimator]                   # whole table optional
//! smoothing_alpha = 1.0
//! min_samples = 2
//!
//! [[agents]]
//! id = 0
//! x = 0.0
//! y = 0.0
//! heading = 0.0
//! speed = 15.0
//! body_width = 2.0
//! body_height = 2.0
//! a_min = -5.0
//! a_max = 3.0
//! setpoint_speed = 15.0
//! goal = [200.0, -5.0]          # optional
//! mode = "controlled"           # or "scripted"
//! script = [{ steps = 100, steering = 0.0, accel = -0.2 }]
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path;

use ispnav_core::camera::Point2;
use ispnav_core::sim::ScriptSegment;
use ispnav_core::{
    AgentMode, AgentSpec, AgentState, CameraIntrinsics, ControllerParams, EstimatorParams, Scenario, SimConfig,
    SteeringSelection,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(#[from] ispnav_core::Error),
    #[error("agent {id}: a script is only allowed with mode = \"scripted\"")]
    UnexpectedScript { id: u32 },
    #[error("cannot serialize scenario: {0}")]
    Serialize(#[from] toml::ser::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    name: String,
    sim: Sim,
    camera: Camera,
    controller: Controller,
    #[serde(default)]
    estimator: Estimator,
    agents: Vec<Agent>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sim {
    dt: f64,
    steps: usize,
    steering_limit: f64,
    steering_rate_limit: f64,
    #[serde(default)]
    pixel_noise_std: f64,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Camera {
    focal_length: f64,
    width: usize,
    height: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cy: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Controller {
    time_headway: f64,
    w_theta: usize,
    w_a: usize,
    epsilon: f64,
    k_p: f64,
    #[serde(default)]
    tau_dot_e: f64,
    #[serde(default)]
    selection: Selection,
}

#[derive(Debug, Default, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Selection {
    #[default]
    SafeMembership,
    Literal,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Estimator {
    smoothing_alpha: f64,
    min_samples: usize,
}

impl Default for Estimator {
    fn default() -> Self {
        let d = EstimatorParams::default();
        Self {
            smoothing_alpha: d.smoothing_alpha,
            min_samples: d.min_samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Controlled,
    Scripted,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Agent {
    id: u32,
    x: f64,
    y: f64,
    heading: f64,
    speed: f64,
    #[serde(default)]
    steering: f64,
    body_width: f64,
    body_height: f64,
    a_min: f64,
    a_max: f64,
    setpoint_speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    goal: Option<[f64; 2]>,
    mode: Mode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    script: Vec<Segment>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Segment {
    steps: usize,
    steering: f64,
    accel: f64,
}

fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())].iter().filter(|&&b| b == b'\n').count() + 1
}

/// Parses and validates a scenario document.
pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    let file: File = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().trim_end().to_owned(),
    })?;
    from_file(file)
}

pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

pub fn to_toml(scenario: &Scenario) -> Result<String, ScenarioError> {
    Ok(toml::to_string(&to_file(scenario))?)
}

pub fn save(scenario: &Scenario, path: &Path) -> Result<(), ScenarioError> {
    std::fs::write(path, to_toml(scenario)?).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn from_file(f: File) -> Result<Scenario, ScenarioError> {
    let intrinsics = match (f.camera.cx, f.camera.cy) {
        (None, None) => CameraIntrinsics::centered(f.camera.focal_length, f.camera.width, f.camera.height)?,
        (cx, cy) => {
            let (w, h) = (f.camera.width as f64, f.camera.height as f64);
            CameraIntrinsics::new(
                f.camera.focal_length,
                cx.unwrap_or(w / 2.0),
                cy.unwrap_or(h / 2.0),
                f.camera.width,
                f.camera.height,
            )?
        }
    };
    let config = SimConfig {
        dt: f.sim.dt,
        steps: f.sim.steps,
        intrinsics,
        controller: ControllerParams {
            time_headway: f.controller.time_headway,
            w_theta: f.controller.w_theta,
            w_a: f.controller.w_a,
            epsilon: f.controller.epsilon,
            tau_dot_e: f.controller.tau_dot_e,
            k_p: f.controller.k_p,
            selection: match f.controller.selection {
                Selection::SafeMembership => SteeringSelection::SafeMembership,
                Selection::Literal => SteeringSelection::Literal,
            },
        },
        estimator: EstimatorParams {
            smoothing_alpha: f.estimator.smoothing_alpha,
            min_samples: f.estimator.min_samples,
        },
        steering_limit: f.sim.steering_limit,
        steering_rate_limit: f.sim.steering_rate_limit,
        pixel_noise_std: f.sim.pixel_noise_std,
        seed: f.sim.seed,
    };
    let mut agents = Vec::with_capacity(f.agents.len());
    for a in f.agents {
        let mode = match a.mode {
            Mode::Controlled if !a.script.is_empty() => return Err(ScenarioError::UnexpectedScript { id: a.id }),
            Mode::Controlled => AgentMode::Controlled,
            Mode::Scripted => AgentMode::Scripted(
                a.script
                    .iter()
                    .map(|s| ScriptSegment {
                        steps: s.steps,
                        steering: s.steering,
                        accel: s.accel,
                    })
                    .collect(),
            ),
        };
        agents.push(AgentSpec {
            initial: AgentState {
                id: a.id,
                position: Point2::new(a.x, a.y),
                heading: a.heading,
                speed: a.speed,
                steering: a.steering,
                body_width: a.body_width,
                body_height: a.body_height,
                accel_limits: (a.a_min, a.a_max),
                goal: a.goal.map(|[x, y]| Point2::new(x, y)),
                setpoint_speed: a.setpoint_speed,
            },
            mode,
        });
    }
    let scenario = Scenario {
        name: f.name,
        config,
        agents,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn to_file(s: &Scenario) -> File {
    let c = &s.config;
    let (cx, cy) = c.intrinsics.principal_point();
    File {
        name: s.name.clone(),
        sim: Sim {
            dt: c.dt,
            steps: c.steps,
            steering_limit: c.steering_limit,
            steering_rate_limit: c.steering_rate_limit,
            pixel_noise_std: c.pixel_noise_std,
            seed: c.seed,
        },
        camera: Camera {
            focal_length: c.intrinsics.focal_length(),
            width: c.intrinsics.width(),
            height: c.intrinsics.height(),
            cx: Some(cx),
            cy: Some(cy),
        },
        controller: Controller {
            time_headway: c.controller.time_headway,
            w_theta: c.controller.w_theta,
            w_a: c.controller.w_a,
            epsilon: c.controller.epsilon,
            k_p: c.controller.k_p,
            tau_dot_e: c.controller.tau_dot_e,
            selection: match c.controller.selection {
                SteeringSelection::SafeMembership => Selection::SafeMembership,
                SteeringSelection::Literal => Selection::Literal,
            },
        },
        estimator: Estimator {
            smoothing_alpha: c.estimator.smoothing_alpha,
            min_samples: c.estimator.min_samples,
        },
        agents: s
            .agents
            .iter()
            .map(|a| {
                let st = &a.initial;
                let (mode, script) = match &a.mode {
                    AgentMode::Controlled => (Mode::Controlled, Vec::new()),
                    AgentMode::Scripted(segs) => (
                        Mode::Scripted,
                        segs.iter()
                            .map(|g| Segment {
                                steps: g.steps,
                                steering: g.steering,
                                accel: g.accel,
                            })
                            .collect(),
                    ),
                };
                Agent {
                    id: st.id,
                    x: st.position.x,
                    y: st.position.y,
                    heading: st.heading,
                    speed: st.speed,
                    steering: st.steering,
                    body_width: st.body_width,
                    body_height: st.body_height,
                    a_min: st.accel_limits.0,
                    a_max: st.accel_limits.1,
                    setpoint_speed: st.setpoint_speed,
                    goal: st.goal.map(|p| [p.x, p.y]),
                    mode,
                    script,
                }
            })
            .collect(),
    }
}
