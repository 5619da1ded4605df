//! Synthetic pedestrian detectors: ground truth, noisy truth, and a degraded
//! tracker that misses people and reports phantoms near static obstacles.

use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::world::{Obstacle, World};
use crate::encoding::HumanState;
use crate::geom::{Pose, Vec2};

/// Ids at or above this value are phantom detections.
pub const FALSE_ID_BASE: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DetectionModel {
    #[default]
    Truth,
    Gaussian {
        sigma_pos: f64,
        sigma_vel: f64,
    },
    Degraded {
        p_miss: f64,
        p_false: f64,
        sigma_pos: f64,
        sigma_vel: f64,
    },
}


#[derive(Debug, Error, PartialEq)]
#[error("unknown detection model `{0}` (expected truth, gaussian or degraded)")]
pub struct UnknownModel(pub String);

impl FromStr for DetectionModel {
    type Err = UnknownModel;

    /// Model names with their default parameters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "truth" => Ok(DetectionModel::Truth),
            "gaussian" => Ok(DetectionModel::Gaussian {
                sigma_pos: 0.1,
                sigma_vel: 0.1,
            }),
            "degraded" => Ok(DetectionModel::Degraded {
                p_miss: 0.15,
                p_false: 0.2,
                sigma_pos: 0.15,
                sigma_vel: 0.2,
            }),
            other => Err(UnknownModel(other.to_string())),
        }
    }
}

impl DetectionModel {
    pub fn name(&self) -> &'static str {
        match self {
            DetectionModel::Truth => "truth",
            DetectionModel::Gaussian { .. } => "gaussian",
            DetectionModel::Degraded { .. } => "degraded",
        }
    }
}

fn normal(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}

fn noisy(h: HumanState, rng: &mut ChaCha8Rng, sigma_pos: f64, sigma_vel: f64) -> HumanState {
    let dp = Vec2::new(normal(rng, sigma_pos), normal(rng, sigma_pos));
    let dv = Vec2::new(normal(rng, sigma_vel), normal(rng, sigma_vel));
    HumanState {
        position: h.position + dp,
        velocity: h.velocity + dv,
        ..h
    }
}

/// Pedestrians whose centers are within `d_max` and not hidden behind a
/// static obstacle.
pub fn visible_pedestrians(world: &World, pose: Pose, d_max: f64) -> Vec<HumanState> {
    let origin = pose.position();
    world
        .pedestrians
        .iter()
        .filter(|p| {
            let to = p.position - origin;
            let dist = to.norm();
            if dist > d_max {
                return false;
            }
            if dist == 0.0 {
                return true;
            }
            let dir = to * (1.0 / dist);
            !world
                .obstacles
                .iter()
                .any(|o| o.ray_hit(origin, dir).is_some_and(|t| t < dist))
        })
        .map(|p| p.state())
        .collect()
}

fn phantom_near(o: &Obstacle, rng: &mut ChaCha8Rng, radius: f64) -> Vec2 {
    match *o {
        Obstacle::Circle { center, radius: r } => {
            center + Vec2::from_angle(rng.random_range(0.0..std::f64::consts::TAU)) * (r + radius)
        }
        Obstacle::Rect { min, max } => {
            let side = rng.random_range(0..4);
            let u: f64 = rng.random_range(0.0..1.0);
            let lerp = |a: f64, b: f64| a + (b - a) * u;
            match side {
                0 => Vec2::new(lerp(min.x, max.x), min.y - radius),
                1 => Vec2::new(max.x + radius, lerp(min.y, max.y)),
                2 => Vec2::new(lerp(min.x, max.x), max.y + radius),
                _ => Vec2::new(min.x - radius, lerp(min.y, max.y)),
            }
        }
    }
}

/// Runs the detector for one frame. Random draws happen in a fixed order
/// (per pedestrian: miss, then noise; then the phantom), so a seeded `rng`
/// replays exactly.
pub fn detect_humans(
    world: &World,
    pose: Pose,
    model: &DetectionModel,
    d_max: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<HumanState> {
    let truth = visible_pedestrians(world, pose, d_max);
    match *model {
        DetectionModel::Truth => truth,
        DetectionModel::Gaussian { sigma_pos, sigma_vel } => truth
            .into_iter()
            .map(|h| noisy(h, rng, sigma_pos, sigma_vel))
            .collect(),
        DetectionModel::Degraded {
            p_miss,
            p_false,
            sigma_pos,
            sigma_vel,
        } => {
            let mut out = Vec::new();
            for h in truth {
                let missed = rng.random_bool(p_miss.clamp(0.0, 1.0));
                let h = noisy(h, rng, sigma_pos, sigma_vel);
                if !missed {
                    out.push(h);
                }
            }
            let inject = rng.random_bool(p_false.clamp(0.0, 1.0));
            if inject && !world.obstacles.is_empty() {
                let o = &world.obstacles[rng.random_range(0..world.obstacles.len())];
                let radius = 0.3;
                let position = phantom_near(o, rng, radius);
                if position.distance(pose.position()) <= d_max {
                    out.push(HumanState {
                        id: FALSE_ID_BASE,
                        position,
                        velocity: Vec2::ZERO,
                        radius,
                    });
                }
            }
            out
        }
    }
}
