//! Bicycle-model kinematics with first-order actuation limits.

use serde::{Deserialize, Serialize};

use crate::action::{Action, ActionLimits};
use crate::encoding::Footprint;
use crate::geom::{wrap_pi, Obb, Pose, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotParams {
    pub wheelbase: f64,
    /// Body length along the heading and width across it, meters.
    pub length: f64,
    pub width: f64,
    /// Speed change limit, m/s².
    pub accel_max: f64,
    /// Steering change limit, rad/s.
    pub steer_rate_max: f64,
    /// Reach commanded values within one step, ignoring the rate limits.
    pub instant: bool,
    pub limits: ActionLimits,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            wheelbase: 0.6,
            length: 0.824,
            width: 0.624,
            accel_max: 1.0,
            steer_rate_max: std::f64::consts::FRAC_PI_2,
            instant: false,
            limits: ActionLimits::default(),
        }
    }
}

impl RobotParams {
    pub fn footprint(&self) -> Footprint {
        Footprint::Rect {
            length: self.length,
            width: self.width,
        }
    }

    pub fn body(&self, pose: Pose) -> Obb {
        Obb {
            center: pose.position(),
            half: Vec2::new(self.length / 2.0, self.width / 2.0),
            theta: pose.theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotState {
    pub pose: Pose,
    pub speed: f64,
    pub steer: f64,
}

impl RobotState {
    pub fn at(pose: Pose) -> Self {
        Self {
            pose,
            speed: 0.0,
            steer: 0.0,
        }
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::from_angle(self.pose.theta) * self.speed
    }
}

fn approach(current: f64, target: f64, max_delta: f64) -> f64 {
    current + (target - current).clamp(-max_delta, max_delta)
}

/// Advances one step: clamp the command into the limits, ramp speed and
/// steering toward it, then integrate heading and position (position along
/// the mean of the old and new heading). Returns the new state and whether
/// the command was clamped.
pub fn step_robot(state: &RobotState, action: Action, dt: f64, params: &RobotParams) -> (RobotState, bool) {
    let (cmd, clamped) = params.limits.clamp(action);
    let (speed, steer) = if params.instant {
        (cmd.speed, cmd.steer)
    } else {
        (
            approach(state.speed, cmd.speed, params.accel_max * dt),
            approach(state.steer, cmd.steer, params.steer_rate_max * dt),
        )
    };
    let theta0 = state.pose.theta;
    let theta1 = theta0 + speed / params.wheelbase * steer.tan() * dt;
    let mid = Vec2::from_angle(0.5 * (theta0 + theta1));
    let p = state.pose.position() + mid * (speed * dt);
    let next = RobotState {
        pose: Pose::new(p.x, p.y, wrap_pi(theta1)),
        speed,
        steer,
    };
    (next, clamped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instant() -> RobotParams {
        RobotParams {
            instant: true,
            ..RobotParams::default()
        }
    }

    #[test]
    fn zero_speed_keeps_pose() {
        let s = RobotState::at(Pose::new(1.0, 2.0, 0.3));
        let (n, clamped) = step_robot(&s, Action::new(0.0, 0.5), 0.2, &instant());
        assert_eq!(n.pose, s.pose);
        assert!(!clamped);
    }

    #[test]
    fn straight_line() {
        let s = RobotState::at(Pose::new(0.0, 0.0, 0.0));
        let (n, _) = step_robot(&s, Action::new(1.0, 0.0), 1.0, &instant());
        assert_eq!(n.pose, Pose::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn ramps_respect_rates() {
        let s = RobotState::at(Pose::default());
        let p = RobotParams::default();
        let (n, clamped) = step_robot(&s, Action::new(5.0, 1.0), 0.2, &p);
        assert!(clamped);
        assert!((n.speed - 0.2).abs() < 1e-15);
        assert!((n.steer - std::f64::consts::FRAC_PI_2 * 0.2).abs() < 1e-15);
    }
}
