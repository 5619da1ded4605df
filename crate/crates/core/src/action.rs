//! Commanded speed and steering, and the box they live in.

use serde::{Deserialize, Serialize};

/// `(v, φ)`: rear-axle speed in m/s and front-wheel steering angle in
/// radians, positive to the left.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    pub speed: f64,
    pub steer: f64,
}

impl Action {
    pub const fn new(speed: f64, steer: f64) -> Self {
        Self { speed, steer }
    }

    pub fn is_finite(&self) -> bool {
        self.speed.is_finite() && self.steer.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActionLimits {
    pub v_min: f64,
    pub v_max: f64,
    pub steer_max: f64,
}

impl Default for ActionLimits {
    fn default() -> Self {
        Self {
            v_min: -0.1,
            v_max: 1.0,
            steer_max: std::f64::consts::FRAC_PI_4,
        }
    }
}

impl ActionLimits {
    /// Clamps into the box; the flag is set when anything changed.
    pub fn clamp(&self, a: Action) -> (Action, bool) {
        let c = Action {
            speed: a.speed.clamp(self.v_min, self.v_max),
            steer: a.steer.clamp(-self.steer_max, self.steer_max),
        };
        (c, c != a)
    }

    pub fn contains(&self, a: Action) -> bool {
        (self.v_min..=self.v_max).contains(&a.speed)
            && (-self.steer_max..=self.steer_max).contains(&a.steer)
    }

    /// Scales into `[-1, 1]` by `v_max` and `steer_max`.
    pub fn normalize(&self, a: Action) -> [f64; 2] {
        [
            (a.speed / self.v_max).clamp(-1.0, 1.0),
            (a.steer / self.steer_max).clamp(-1.0, 1.0),
        ]
    }
}
