//! Episode outcomes, pedestrian pass events, and the aggregate metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::robot::RobotState;
use crate::encoding::HumanState;
use crate::geom::Vec2;

/// Robot-pedestrian distance under which a closest approach counts as a pass.
pub const PASS_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
    /// The episode crashed; the reason is kept on the result.
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassSide {
    Front,
    Behind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassEvent {
    pub pedestrian: u32,
    pub time: f64,
    pub side: PassSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedState {
    pub t: f64,
    pub state: RobotState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub template: String,
    pub seed: u64,
    pub outcome: Outcome,
    pub elapsed: f64,
    pub trajectory: Vec<TimedState>,
    pub pass_events: Vec<PassEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Side of a pass: behind when the robot sits opposite the pedestrian's
/// velocity. `None` for a stationary pedestrian.
pub fn classify_pass(robot: Vec2, ped: Vec2, ped_velocity: Vec2) -> Option<PassSide> {
    if ped_velocity.norm_sq() == 0.0 {
        return None;
    }
    if (robot - ped).dot(ped_velocity) < 0.0 {
        Some(PassSide::Behind)
    } else {
        Some(PassSide::Front)
    }
}

#[derive(Debug, Clone, Copy)]
struct Track {
    distance: f64,
    robot: Vec2,
    ped: Vec2,
    velocity: Vec2,
    t: f64,
    armed: bool,
}

/// Watches robot-pedestrian distances and fires one event at each local
/// minimum inside [`PASS_RADIUS`]. A pedestrian is re-armed once it is
/// farther than the radius again.
#[derive(Debug, Clone, Default)]
pub struct PassTracker {
    tracks: BTreeMap<u32, Track>,
}

impl PassTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, robot: Vec2, pedestrians: &[HumanState], t: f64) -> Vec<PassEvent> {
        let mut events = Vec::new();
        for h in pedestrians {
            let d = robot.distance(h.position);
            let mut armed = true;
            if let Some(prev) = self.tracks.get(&h.id) {
                armed = prev.armed;
                if armed && prev.distance <= PASS_RADIUS && d > prev.distance {
                    if let Some(side) = classify_pass(prev.robot, prev.ped, prev.velocity) {
                        events.push(PassEvent {
                            pedestrian: h.id,
                            time: prev.t,
                            side,
                        });
                    }
                    armed = false;
                }
                if !armed && d > PASS_RADIUS {
                    armed = true;
                }
            }
            self.tracks.insert(
                h.id,
                Track {
                    distance: d,
                    robot,
                    ped: h.position,
                    velocity: h.velocity,
                    t,
                    armed,
                },
            );
        }
        events
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub episodes: usize,
    pub successes: usize,
    /// Fraction in `[0, 1]`.
    pub success: f64,
    /// Mean elapsed time over successes; `None` without any.
    pub time_success: Option<f64>,
    pub stl: f64,
    pub passes: usize,
    /// Fraction of passes from behind; `None` without any pass.
    pub behind: Option<f64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no episodes")]
    NoEpisodes,
}

pub fn compute_metrics(results: &[EpisodeResult], t_max: f64) -> Result<Metrics, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::NoEpisodes);
    }
    let n = results.len();
    let wins: Vec<f64> = results
        .iter()
        .filter(|r| r.outcome == Outcome::Success)
        .map(|r| r.elapsed)
        .collect();
    let stl = results
        .iter()
        .map(|r| if r.outcome == Outcome::Success { r.elapsed } else { t_max })
        .sum::<f64>()
        / n as f64;
    let events: Vec<&PassEvent> = results.iter().flat_map(|r| &r.pass_events).collect();
    let behind = events.iter().filter(|e| e.side == PassSide::Behind).count();
    Ok(Metrics {
        episodes: n,
        successes: wins.len(),
        success: wins.len() as f64 / n as f64,
        time_success: (!wins.is_empty()).then(|| wins.iter().sum::<f64>() / wins.len() as f64),
        stl,
        passes: events.len(),
        behind: (!events.is_empty()).then(|| behind as f64 / events.len() as f64),
    })
}
