//! The stepping environment shared by the batch runner and the service.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::detect::{detect_humans, DetectionModel};
use super::lidar::raycast_lidar;
use super::metrics::{PassEvent, PassTracker};
use super::raster::{local_window, rasterize};
use super::reward::{check_termination, compute_reward, RewardBreakdown, RewardParams, Status};
use super::robot::{step_robot, RobotParams, RobotState};
use super::scenario::{generate_scenario, ScenarioError, Template};
use super::world::World;
use crate::action::Action;
use crate::encoding::{
    assemble_observation, EncodingError, EncodingParams, HumanState, LaserRay, ObservationFrame,
    PolarVector, SensorSnapshot,
};
use crate::guidance::{extract_guidance, GuidanceParams, GuidancePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Fixed step, seconds.
    pub dt: f64,
    pub lidar_rays: usize,
    /// Cell size of the map handed to guidance extraction, meters.
    pub raster_resolution: f64,
    pub robot: RobotParams,
    pub reward: RewardParams,
    pub encoding: EncodingParams,
    pub guidance: GuidanceParams,
    pub detection: DetectionModel,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.2,
            lidar_rays: 720,
            raster_resolution: 0.1,
            robot: RobotParams::default(),
            reward: RewardParams::default(),
            encoding: EncodingParams::default(),
            guidance: GuidanceParams::default(),
            detection: DetectionModel::Truth,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: String| Err(EnvError::Config(m));
        if !(self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.lidar_rays < self.encoding.n {
            return bad(format!(
                "lidar_rays ({}) must be at least n ({})",
                self.lidar_rays, self.encoding.n
            ));
        }
        if !(self.raster_resolution > 0.0) {
            return bad("raster_resolution must be positive".into());
        }
        if !(self.robot.wheelbase > 0.0) {
            return bad("wheelbase must be positive".into());
        }
        self.reward.validate().map_err(EnvError::Config)?;
        self.encoding.validate()?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("action has non-finite values")]
    NonFiniteAction,
    #[error("episode already finished")]
    EpisodeOver,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

/// What the sensors produced at one instant, kept for rendering and logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perception {
    pub scan: Vec<LaserRay>,
    pub detections: Vec<HumanState>,
    pub guidance: Vec<GuidancePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub obs: ObservationFrame,
    pub reward: RewardBreakdown,
    pub status: Status,
    /// The command after clamping into the limits.
    pub applied: Action,
    pub clamped: bool,
    pub clearance: f64,
    pub pass_events: Vec<PassEvent>,
}

/// One episode in progress. All randomness comes from the seed.
#[derive(Debug, Clone)]
pub struct Env {
    config: SimConfig,
    template: String,
    seed: u64,
    world: World,
    steps: u64,
    status: Status,
    prev_laser: PolarVector,
    history: [Action; 3],
    detect_rng: ChaCha8Rng,
    tracker: PassTracker,
    perception: Perception,
    obs: ObservationFrame,
}

impl Env {
    /// Generates the scenario and returns the environment with its first
    /// observation (previous laser all zeros).
    pub fn reset(config: &SimConfig, template: &Template, seed: u64) -> Result<Self, EnvError> {
        config.validate()?;
        let scenario = generate_scenario(template, seed)?;
        Self::from_world(config, &template.name, seed, scenario.world)
    }

    /// Starts an episode from an explicit world.
    pub fn from_world(
        config: &SimConfig,
        template: &str,
        seed: u64,
        world: World,
    ) -> Result<Self, EnvError> {
        config.validate()?;
        let mut env = Env {
            config: *config,
            template: template.to_string(),
            seed,
            world,
            steps: 0,
            status: Status::Running,
            prev_laser: PolarVector::zeros(config.encoding.n),
            history: [Action::default(); 3],
            detect_rng: super::seeded_rng(seed, super::STREAM_DETECTION),
            tracker: PassTracker::new(),
            perception: Perception {
                scan: Vec::new(),
                detections: Vec::new(),
                guidance: Vec::new(),
            },
            obs: empty_frame(config.encoding.n),
        };
        env.tracker
            .update(env.world.robot.pose.position(), &env.truth(), 0.0);
        env.obs = env.observe(None)?;
        env.prev_laser = env.obs.laser_now.clone();
        Ok(env)
    }

    fn truth(&self) -> Vec<HumanState> {
        self.world.pedestrians.iter().map(|p| p.state()).collect()
    }

    fn observe(&mut self, prev: Option<&PolarVector>) -> Result<ObservationFrame, EnvError> {
        let cfg = &self.config;
        let pose = self.world.robot.pose;
        let d_max = cfg.encoding.d_max;
        let scan = raycast_lidar(&self.world, pose, cfg.lidar_rays, d_max);
        let detections = detect_humans(&self.world, pose, &cfg.detection, d_max, &mut self.detect_rng);
        let window = local_window(&self.world, pose, d_max);
        let grid = rasterize(&self.world, &detections, window, cfg.raster_resolution);
        let guidance = extract_guidance(&grid, pose, &cfg.guidance);
        let snap = SensorSnapshot {
            pose,
            goal: self.world.goal,
            guidance,
            scan,
            humans: detections,
        };
        let frame = assemble_observation(&snap, prev, &self.history, &cfg.robot.limits, &cfg.encoding)?;
        self.perception = Perception {
            scan: snap.scan,
            detections: snap.humans,
            guidance: snap.guidance,
        };
        Ok(frame)
    }

    /// Advances one `dt`. A non-finite action is rejected before anything
    /// changes.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome, EnvError> {
        if self.status.is_done() {
            return Err(EnvError::EpisodeOver);
        }
        if !action.is_finite() {
            return Err(EnvError::NonFiniteAction);
        }
        let cfg = self.config;
        let (applied, clamped) = cfg.robot.limits.clamp(action);
        let (robot, _) = step_robot(&self.world.robot, applied, cfg.dt, &cfg.robot);
        self.world.robot = robot;
        self.world.step_pedestrians(cfg.dt);
        self.steps += 1;
        self.world.time = self.steps as f64 * cfg.dt;

        let clearance = self.world.clearance(&cfg.robot);
        let status = check_termination(&self.world, &cfg.robot, &cfg.reward);
        let reward = compute_reward(&robot, self.world.goal, clearance, status, &cfg.reward);
        self.status = status;
        self.history = [self.history[1], self.history[2], applied];

        let prev = std::mem::replace(&mut self.prev_laser, PolarVector::zeros(0));
        let obs = self.observe(Some(&prev))?;
        self.prev_laser = obs.laser_now.clone();
        self.obs = obs.clone();
        let pass_events = self
            .tracker
            .update(robot.pose.position(), &self.truth(), self.world.time);
        Ok(StepOutcome {
            obs,
            reward,
            status,
            applied,
            clamped,
            clearance,
            pass_events,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn robot(&self) -> &RobotState {
        &self.world.robot
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.world.time
    }

    /// The latest observation.
    pub fn observation(&self) -> &ObservationFrame {
        &self.obs
    }

    pub fn perception(&self) -> &Perception {
        &self.perception
    }

    pub fn action_history(&self) -> &[Action; 3] {
        &self.history
    }
}

fn empty_frame(n: usize) -> ObservationFrame {
    ObservationFrame {
        version: crate::encoding::FRAME_VERSION,
        n,
        guidance: PolarVector::zeros(n),
        laser_now: PolarVector::zeros(n),
        laser_prev: PolarVector::zeros(n),
        humans: vec![PolarVector::zeros(n)],
        human_ids: Vec::new(),
        goal: crate::encoding::GoalPolar {
            distance: 0.0,
            angle: 0.0,
        },
        action_history: [[0.0; 2]; 3],
    }
}
