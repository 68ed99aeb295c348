//! Closed-loop 2D multi-agent simulation.
//!
//! Every step, each agent senses the others through its forward-facing
//! camera (project, track, estimate `tau`, compose into its field), picks
//! controls, and then all agents advance together under bicycle kinematics.
//! Sensing reads a frozen snapshot of the world; stepping happens after every
//! agent has decided.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{cos, floor, sin, tan};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::camera::{normalize_angle, project_billboard, BodyBillboard, CameraIntrinsics, CameraPose, Point2, NEAR_PLANE};
use crate::control::{choose_controls, safe_controls, AccelInterval, ControllerParams};
use crate::field::{min_tau, IspField, PotentialTuple};
use crate::tau::{EstimatorParams, ScaleTrack};
use crate::{Error, ExtendedReal, Result};

pub const WHEELBASE: f64 = 2.5;

/// Smallest scale a noisy measurement is allowed to drop to, pixels.
const MIN_NOISY_SCALE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: u32,
    pub position: Point2,
    /// Counter-clockwise from `+X`, in `(-pi, pi]`.
    pub heading: f64,
    /// Never negative.
    pub speed: f64,
    /// Front-wheel angle, positive turns left.
    pub steering: f64,
    pub body_width: f64,
    pub body_height: f64,
    /// `(a_min, a_max)` with `a_min < 0 < a_max`, m/s^2.
    pub accel_limits: (f64, f64),
    pub goal: Option<Point2>,
    pub setpoint_speed: f64,
}

impl AgentState {
    pub fn billboard(&self) -> BodyBillboard {
        BodyBillboard {
            object_id: self.id,
            center: self.position,
            world_width: self.body_width,
            world_height: self.body_height,
        }
    }

    /// The camera always looks along the direction of travel.
    pub fn camera_pose(&self) -> CameraPose {
        CameraPose::new(self.position, self.heading)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.position.x,
            self.position.y,
            self.heading,
            self.speed,
            self.steering,
            self.setpoint_speed,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidScenario("agent state must be finite"));
        }
        if self.speed < 0.0 {
            return Err(Error::InvalidScenario("agent speed must be non-negative"));
        }
        if !(self.body_width > 0.0 && self.body_height > 0.0) {
            return Err(Error::InvalidScenario("agent body extents must be positive"));
        }
        let (lo, hi) = self.accel_limits;
        if !(lo < 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidScenario("accel limits must satisfy a_min < 0 < a_max"));
        }
        if let Some(g) = self.goal {
            if !(g.x.is_finite() && g.y.is_finite()) {
                return Err(Error::InvalidScenario("goal must be finite"));
            }
        }
        Ok(())
    }
}

/// Proximity metric: center distance minus both bodies' half-diagonals.
/// Zero or negative means the bodies touch.
pub fn min_separation(a: &AgentState, b: &AgentState) -> f64 {
    a.position.distance(&b.position) - a.billboard().half_diagonal() - b.billboard().half_diagonal()
}

/// A scripted command held for `steps` steps. `steering` uses the vehicle
/// convention (positive left).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScriptSegment {
    pub steps: usize,
    pub steering: f64,
    pub accel: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum AgentMode {
    #[default]
    Controlled,
    /// Follows the segments in order, then holds its steering and coasts.
    Scripted(Vec<ScriptSegment>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub initial: AgentState,
    pub mode: AgentMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub steps: usize,
    pub intrinsics: CameraIntrinsics,
    pub controller: ControllerParams,
    pub estimator: EstimatorParams,
    /// Largest front-wheel angle, radians.
    pub steering_limit: f64,
    /// Largest change of front-wheel angle per step, radians.
    pub steering_rate_limit: f64,
    /// Standard deviation of Gaussian noise added to measured scales, pixels.
    pub pixel_noise_std: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidScenario("dt must be positive"));
        }
        if self.steps == 0 {
            return Err(Error::InvalidScenario("steps must be at least 1"));
        }
        if !(self.steering_limit >= 0.0) || !(self.steering_rate_limit >= 0.0) {
            return Err(Error::InvalidScenario("steering limits must be non-negative"));
        }
        if !(self.steering_limit < core::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidScenario("steering limit must be below pi/2"));
        }
        if !(self.pixel_noise_std >= 0.0) || !self.pixel_noise_std.is_finite() {
            return Err(Error::InvalidScenario("pixel noise must be non-negative"));
        }
        self.controller.validate(self.intrinsics.width())?;
        self.estimator.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: SimConfig,
    pub agents: Vec<AgentSpec>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.agents.is_empty() {
            return Err(Error::InvalidScenario("at least one agent is required"));
        }
        for (i, a) in self.agents.iter().enumerate() {
            a.initial.validate()?;
            if self.agents[..i].iter().any(|b| b.initial.id == a.initial.id) {
                return Err(Error::InvalidScenario("agent ids must be unique"));
            }
        }
        Ok(())
    }
}

/// One row of output per agent per step, describing the state after the step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub time: f64,
    pub agent: u32,
    pub position: Point2,
    pub heading: f64,
    pub speed: f64,
    /// Commanded front-wheel angle (positive left).
    pub steer_cmd: f64,
    pub accel_scaled: f64,
    pub accel_ms2: f64,
    /// Smallest `tau` anywhere in the field the agent sensed this step.
    pub min_tau: ExtendedReal,
    pub safe_cols: usize,
    pub accel_interval: AccelInterval,
    /// `+inf` when the agent is alone.
    pub min_sep: f64,
    pub collided: bool,
}

/// Advances one agent by `dt` with bicycle kinematics. Commands are clamped:
/// acceleration into `[-1, 1]`, steering into the configured limit and rate.
pub fn step_agent(state: &AgentState, steering_cmd: f64, accel_scaled: f64, dt: f64, config: &SimConfig) -> AgentState {
    let accel_scaled = if accel_scaled.is_nan() { 0.0 } else { accel_scaled.clamp(-1.0, 1.0) };
    let accel = physical_accel(state, accel_scaled);
    let speed = (state.speed + accel * dt).max(0.0);

    let target = if steering_cmd.is_nan() { state.steering } else { steering_cmd }
        .clamp(-config.steering_limit, config.steering_limit);
    let rate = config.steering_rate_limit;
    let steering = state.steering + (target - state.steering).clamp(-rate, rate);

    let heading = normalize_angle(state.heading + speed * tan(steering) / WHEELBASE * dt);
    let position = Point2::new(
        state.position.x + speed * cos(heading) * dt,
        state.position.y + speed * sin(heading) * dt,
    );
    AgentState {
        position,
        heading,
        speed,
        steering,
        ..state.clone()
    }
}

fn physical_accel(state: &AgentState, accel_scaled: f64) -> f64 {
    if accel_scaled >= 0.0 {
        accel_scaled * state.accel_limits.1
    } else {
        accel_scaled * -state.accel_limits.0
    }
}

pub type Tracks = BTreeMap<u32, ScaleTrack>;

/// Senses `others` from `observer`'s camera at time `t` into `field`, which
/// is reset first. Tracks of bodies that are not visible are dropped.
///
/// Each visible track writes its tuple over its ROI by min-`tau`
/// composition, so the result equals composing the per-object fields.
/// Returns the min-`tau` tuple of the resulting field.
pub fn sense_into(
    observer: &AgentState,
    others: &[AgentState],
    tracks: &mut Tracks,
    t: f64,
    config: &SimConfig,
    field: &mut IspField,
    mut noise: Option<(&mut ChaCha8Rng, &Normal<f64>)>,
) -> Result<PotentialTuple> {
    if field.dimensions() != config.intrinsics.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: config.intrinsics.dimensions(),
            found: field.dimensions(),
        });
    }
    field.reset();
    let pose = observer.camera_pose();
    let min_samples = config.estimator.effective_min_samples();
    let mut field_min = PotentialTuple::BACKGROUND;
    for other in others.iter().filter(|o| o.id != observer.id) {
        let Some(projection) = project_billboard(&config.intrinsics, &pose, &other.billboard()) else {
            tracks.remove(&other.id);
            continue;
        };
        let mut scale = projection.scale;
        if let Some((rng, normal)) = noise.as_mut() {
            scale = (scale + normal.sample(*rng)).max(MIN_NOISY_SCALE);
        }
        let track = tracks.entry(other.id).or_insert_with(|| ScaleTrack::new(other.id));
        if track.push(t, scale, projection.roi, &config.estimator).is_err() {
            // e.g. a time reset; start the track over from this sample
            *track = ScaleTrack::new(other.id);
            track.push(t, scale, projection.roi, &config.estimator)?;
        }
        if track.sample_count() >= min_samples {
            track.write_into(field)?;
            if let Some(v) = track.tuple() {
                field_min = min_tau(field_min, v);
            }
        }
    }
    Ok(field_min)
}

/// Allocating, noise-free form of [`sense_into`].
pub fn sense(observer: &AgentState, others: &[AgentState], tracks: &mut Tracks, t: f64, config: &SimConfig) -> Result<IspField> {
    let (w, h) = config.intrinsics.dimensions();
    let mut field = IspField::new(w, h)?;
    sense_into(observer, others, tracks, t, config, &mut field, None)?;
    Ok(field)
}

/// Goal pixel for an agent: the projection of its world goal clamped into the
/// image, the principal point when it has no goal, `None` when the goal is
/// behind the camera.
pub fn goal_pixel(state: &AgentState, intrinsics: &CameraIntrinsics) -> Option<(usize, usize)> {
    let (cx, cy) = intrinsics.principal_point();
    let clamp = |v: f64, n: usize| (floor(v).max(0.0) as usize).min(n - 1);
    let row = clamp(cy, intrinsics.height());
    let Some(goal) = state.goal else {
        return Some((clamp(cx, intrinsics.width()), row));
    };
    let (lateral, depth) = state.camera_pose().to_camera_frame(goal);
    if depth <= NEAR_PLANE {
        return None;
    }
    let x = intrinsics.image_x(lateral, depth).clamp(-1.0, intrinsics.width() as f64);
    Some((clamp(x, intrinsics.width()), row))
}

struct Decision {
    steering: f64,
    accel: f64,
    safe_cols: usize,
    interval: AccelInterval,
}

/// Stepwise driver for a [`Scenario`].
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    states: Vec<AgentState>,
    tracks: Vec<Tracks>,
    fields: Vec<IspField>,
    field_mins: Vec<PotentialTuple>,
    step: usize,
    collided: bool,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        scenario.validate()?;
        let (w, h) = scenario.config.intrinsics.dimensions();
        let n = scenario.agents.len();
        let mut fields = Vec::with_capacity(n);
        for _ in 0..n {
            fields.push(IspField::new(w, h)?);
        }
        let noise = if scenario.config.pixel_noise_std > 0.0 {
            Some(
                Normal::new(0.0, scenario.config.pixel_noise_std)
                    .map_err(|_| Error::InvalidScenario("pixel noise must be non-negative"))?,
            )
        } else {
            None
        };
        Ok(Self {
            scenario,
            states: scenario.agents.iter().map(|a| a.initial.clone()).collect(),
            tracks: (0..n).map(|_| Tracks::new()).collect(),
            fields,
            field_mins: alloc::vec![PotentialTuple::BACKGROUND; n],
            step: 0,
            collided: false,
            rng: ChaCha8Rng::seed_from_u64(scenario.config.seed),
            noise,
        })
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.scenario.config.dt
    }

    pub fn states(&self) -> &[AgentState] {
        &self.states
    }

    /// Field sensed by agent `index` at the most recent sensing pass.
    pub fn field(&self, index: usize) -> &IspField {
        &self.fields[index]
    }

    pub fn tracks(&self, index: usize) -> &Tracks {
        &self.tracks[index]
    }

    pub fn is_finished(&self) -> bool {
        self.collided || self.step >= self.scenario.config.steps
    }

    /// Every agent senses the current snapshot; nothing moves.
    pub fn sense_all(&mut self) -> Result<()> {
        let t = self.time();
        let config = &self.scenario.config;
        for i in 0..self.states.len() {
            let noise = self.noise.as_ref().map(|n| (&mut self.rng, n));
            self.field_mins[i] =
                sense_into(&self.states[i], &self.states, &mut self.tracks[i], t, config, &mut self.fields[i], noise)?;
        }
        Ok(())
    }

    fn scripted_command(&self, index: usize, segments: &[ScriptSegment]) -> (f64, f64) {
        let mut remaining = self.step;
        for seg in segments {
            if remaining < seg.steps {
                return (seg.steering, seg.accel);
            }
            remaining -= seg.steps;
        }
        (self.states[index].steering, 0.0)
    }

    fn decide(&self, index: usize) -> Result<Decision> {
        let config = &self.scenario.config;
        let state = &self.states[index];
        let set = safe_controls(&self.fields[index], &config.intrinsics, &config.controller)?;
        let safe_cols = set.safe_columns.len();

        let (steering, accel, interval) = match &self.scenario.agents[index].mode {
            AgentMode::Scripted(segments) => {
                let (steering, accel) = self.scripted_command(index, segments);
                (steering, accel, set.accel)
            }
            AgentMode::Controlled => match goal_pixel(state, &config.intrinsics) {
                None => (0.0, -1.0, AccelInterval::FULL_BRAKE),
                Some((x, _)) => {
                    let goal_angle = config.intrinsics.column_to_angle(x)?;
                    // Image bearings are positive to the right, steering positive to the left.
                    let c = choose_controls(
                        &set,
                        goal_angle,
                        -state.steering,
                        state.speed,
                        state.setpoint_speed,
                        &config.controller,
                    );
                    (-c.steering, c.accel, set.accel)
                }
            },
        };
        Ok(Decision {
            steering,
            accel,
            safe_cols,
            interval,
        })
    }

    /// Senses, decides and advances every agent by one step. Returns one
    /// record per agent, or `None` once the run is over.
    pub fn step(&mut self) -> Result<Option<Vec<TraceRecord>>> {
        if self.is_finished() {
            return Ok(None);
        }
        self.sense_all()?;
        let decisions = (0..self.states.len()).map(|i| self.decide(i)).collect::<Result<Vec<_>>>()?;
        let config = &self.scenario.config;
        let next: Vec<AgentState> = self
            .states
            .iter()
            .zip(&decisions)
            .map(|(s, d)| step_agent(s, d.steering, d.accel, config.dt, config))
            .collect();

        let mut records = Vec::with_capacity(next.len());
        for (i, (state, d)) in next.iter().zip(&decisions).enumerate() {
            let min_sep = next
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, o)| min_separation(state, o))
                .fold(f64::INFINITY, f64::min);
            let collided = min_sep <= 0.0;
            self.collided |= collided;
            let accel_scaled = d.accel.clamp(-1.0, 1.0);
            records.push(TraceRecord {
                step: self.step,
                time: (self.step + 1) as f64 * config.dt,
                agent: state.id,
                position: state.position,
                heading: state.heading,
                speed: state.speed,
                steer_cmd: d.steering,
                accel_scaled,
                accel_ms2: physical_accel(state, accel_scaled),
                min_tau: self.field_mins[i].tau(),
                safe_cols: d.safe_cols,
                accel_interval: d.interval,
                min_sep,
                collided,
            });
        }
        self.states = next;
        self.step += 1;
        Ok(Some(records))
    }

    pub fn collided(&self) -> bool {
        self.collided
    }
}

/// Runs a scenario to completion, or until the first collision.
pub fn run(scenario: &Scenario) -> Result<Vec<TraceRecord>> {
    let mut sim = Simulation::new(scenario)?;
    let mut trace = Vec::with_capacity(scenario.config.steps * scenario.agents.len());
    while let Some(records) = sim.step()? {
        trace.extend(records);
    }
    Ok(trace)
}
