//! Per-step reward and episode termination.

use serde::{Deserialize, Serialize};

use super::robot::{RobotParams, RobotState};
use super::world::World;
use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardParams {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub d_safe: f64,
    pub d_danger: f64,
    /// Episode time limit, seconds.
    pub timeout: f64,
    /// Success radius around the goal, meters.
    pub goal_radius: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            w1: 1.0,
            w2: 0.1,
            w3: 1.0,
            d_safe: 0.5,
            d_danger: 0.1,
            timeout: 60.0,
            goal_radius: 0.3,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.w1 >= 0.0 && self.w2 >= 0.0 && self.w3 >= 0.0) {
            return Err("reward weights must be nonnegative".into());
        }
        if !(self.d_danger < self.d_safe) {
            return Err(format!(
                "d_danger ({}) must be below d_safe ({})",
                self.d_danger, self.d_safe
            ));
        }
        if !(self.timeout > 0.0) || !(self.goal_radius > 0.0) {
            return Err("timeout and goal_radius must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Success,
    Collision,
    Timeout,
}

impl Status {
    pub fn is_done(self) -> bool {
        self != Status::Running
    }
}

/// Which branch of the safety term fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardCase {
    Goal,
    Danger,
    Timeout,
    Band,
    Clear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// `w1·v∥`
    pub progress: f64,
    /// `−w2·|φ|`
    pub steering: f64,
    pub case: RewardCase,
    /// Unweighted safety value `c`.
    pub case_value: f64,
    /// `w3·c`
    pub safety: f64,
    pub total: f64,
}

/// Speed projected onto the direction from the robot to the goal; zero when
/// the robot sits exactly on the goal.
pub fn projected_speed(state: &RobotState, goal: Vec2) -> f64 {
    let to_goal = goal - state.pose.position();
    let d = to_goal.norm();
    if d == 0.0 {
        return 0.0;
    }
    state.velocity().dot(to_goal) / d
}

/// Safety case by priority: goal, then danger (collision or clearance below
/// `d_danger`), then timeout, then the proximity band, else clear.
pub fn reward_case(clearance: f64, status: Status, params: &RewardParams) -> (RewardCase, f64) {
    if status == Status::Success {
        (RewardCase::Goal, 5.0)
    } else if status == Status::Collision || clearance < params.d_danger {
        (RewardCase::Danger, -10.0)
    } else if status == Status::Timeout {
        (RewardCase::Timeout, -5.0)
    } else if clearance < params.d_safe {
        (RewardCase::Band, clearance - params.d_safe)
    } else {
        (RewardCase::Clear, 0.0)
    }
}

/// `r = w1·v∥ − w2·|φ| + w3·c` for the state after a step. `clearance` is the
/// body-to-nearest-obstacle distance `d_t` in that state.
pub fn compute_reward(
    state: &RobotState,
    goal: Vec2,
    clearance: f64,
    status: Status,
    params: &RewardParams,
) -> RewardBreakdown {
    let progress = params.w1 * projected_speed(state, goal);
    let steering = -params.w2 * state.steer.abs();
    let (case, case_value) = reward_case(clearance, status, params);
    let safety = params.w3 * case_value;
    RewardBreakdown {
        progress,
        steering,
        case,
        case_value,
        safety,
        total: progress + steering + safety,
    }
}

/// Collision (body touches anything or leaves the bounds) beats success
/// (center within `goal_radius`), which beats timeout (clock reached the
/// limit).
pub fn check_termination(world: &World, robot: &RobotParams, params: &RewardParams) -> Status {
    if !world.robot_in_bounds(robot) || world.clearance(robot) <= 0.0 {
        Status::Collision
    } else if world.robot.pose.position().distance(world.goal) <= params.goal_radius {
        Status::Success
    } else if world.time >= params.timeout - 1e-9 {
        Status::Timeout
    } else {
        Status::Running
    }
}
