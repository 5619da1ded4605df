//! A hand-written guidance-following controller, used to drive episodes
//! without any learned weights.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::action::{Action, ActionLimits};
use crate::encoding::{Footprint, ObservationFrame};
use crate::geom::{wrap_pi, Vec2};

/// Anything that maps observations to actions.
pub trait Policy {
    fn act(&mut self, obs: &ObservationFrame) -> Action;
}

impl<F: FnMut(&ObservationFrame) -> Action> Policy for F {
    fn act(&mut self, obs: &ObservationFrame) -> Action {
        self(obs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineParams {
    /// Angular cost (radians) traded per unit of guidance value.
    pub goal_bias: f64,
    /// Speed fraction gained per meter of forward clearance above `stop_clearance`.
    pub slowdown_gain: f64,
    /// Pure-pursuit lookahead, meters.
    pub lookahead: f64,
    /// Forward edge clearance under which the robot backs off, meters.
    pub stop_clearance: f64,
    /// Half-width of the swept path checked for obstacles, meters.
    pub path_half_width: f64,
    /// How far ahead a direction must be free to be taken, meters.
    pub horizon: f64,
    /// Free length a detour direction needs, meters.
    pub min_free: f64,
    /// Extra free length required past a guidance point, meters.
    pub beyond: f64,
    /// Arc length checked by the steering shield, meters.
    pub shield_distance: f64,
    /// Body inflation used by the shield, meters.
    pub shield_margin: f64,
    /// Half-width of the strip ahead used for forward clearance, meters.
    pub body_half_width: f64,
    /// Speed fraction kept while any forward clearance remains.
    pub creep: f64,
    /// Once backing off, keep reversing until the forward clearance exceeds
    /// `stop_clearance` by this much, meters.
    pub release: f64,
    pub wheelbase: f64,
    pub limits: ActionLimits,
    /// Must match the encoder.
    pub d_max: f64,
    pub d_goal_norm: f64,
    pub footprint: Footprint,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            goal_bias: 0.5,
            slowdown_gain: 1.0,
            lookahead: 1.0,
            stop_clearance: 0.15,
            path_half_width: 0.55,
            horizon: 3.0,
            min_free: 1.5,
            beyond: 0.5,
            shield_distance: 1.5,
            shield_margin: 0.1,
            body_half_width: 0.4,
            creep: 0.2,
            release: 0.3,
            wheelbase: 0.6,
            limits: ActionLimits::default(),
            d_max: 10.0,
            d_goal_norm: 20.0,
            footprint: Footprint::default(),
        }
    }
}

impl BaselineParams {
    /// Defaults with the robot and encoder fields taken from `config`.
    pub fn for_config(config: &crate::sim::SimConfig) -> Self {
        Self {
            wheelbase: config.robot.wheelbase,
            limits: config.robot.limits,
            d_max: config.encoding.d_max,
            d_goal_norm: config.encoding.d_goal_norm,
            footprint: config.encoding.footprint,
            ..Self::default()
        }
    }
}

fn bin_center(k: usize, n: usize) -> f64 {
    wrap_pi((k as f64 + 0.5) * TAU / n as f64)
}

/// Robot-frame points reconstructed from the laser and pedestrian vectors.
/// Each occupied bin contributes its reading at both bin edges and the
/// center, so obstacles look at least as wide as their bins.
fn obstacle_points(obs: &ObservationFrame, p: &BaselineParams) -> Vec<Vec2> {
    let n = obs.n;
    let step = TAU / n as f64;
    let mut pts = Vec::new();
    let mut arc = |k: usize, at: &dyn Fn(f64) -> f64| {
        for f in [0.0, 0.5, 1.0] {
            let a = (k as f64 + f) * step;
            pts.push(Vec2::from_angle(a) * at(a));
        }
    };
    for (k, &v) in obs.laser_now.values().iter().enumerate() {
        if v < 1.0 {
            arc(k, &|a| v * p.d_max + p.footprint.boundary_distance(a));
        }
    }
    for h in &obs.humans {
        for (k, &v) in h.values().iter().enumerate() {
            if v > 0.0 {
                arc(k, &|_| (1.0 - v) * p.d_max);
            }
        }
    }
    pts
}

/// Distance along `theta` before the swept strip of half-width `half`
/// meets a point.
fn free_length(points: &[Vec2], theta: f64, half: f64) -> f64 {
    let u = Vec2::from_angle(theta);
    points
        .iter()
        .filter_map(|q| {
            let along = q.dot(u);
            (along > 0.0 && q.cross(u).abs() < half).then_some(along)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Robot-frame bearing to steer along. The goal when its path is clear;
/// else the guidance bin with the lowest angular cost to the goal (less
/// `goal_bias` times its value), preferring bins whose path is clear. When
/// even that path is blocked, the free direction nearest to it.
pub fn choose_heading(obs: &ObservationFrame, p: &BaselineParams) -> f64 {
    let points = obstacle_points(obs, p);
    let goal = obs.goal.angle;
    let goal_dist = obs.goal.distance * p.d_goal_norm;
    let free = |a: f64| free_length(&points, a, p.path_half_width);
    if free(goal) >= goal_dist.min(p.horizon) {
        return goal;
    }
    let n = obs.n;
    let ranked = obs
        .guidance
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(k, &v)| {
            let a = bin_center(k, n);
            let need = ((1.0 - v) * p.d_max + p.beyond).min(p.horizon);
            let clear = free(a) >= need;
            ((!clear, wrap_pi(a - goal).abs() - p.goal_bias * v), a, clear)
        })
        .min_by(|x, y| x.0 .0.cmp(&y.0 .0).then(x.0 .1.total_cmp(&y.0 .1)));
    let desired = match ranked {
        Some((_, a, true)) => return a,
        Some((_, a, false)) => a,
        None => goal,
    };
    (0..n)
        .map(|k| bin_center(k, n))
        .filter(|&a| free(a) >= p.min_free)
        .min_by(|&a, &b| wrap_pi(a - desired).abs().total_cmp(&wrap_pi(b - desired).abs()))
        .unwrap_or(desired)
}

/// Free distance straight ahead for the body's front edge.
pub fn forward_clearance(obs: &ObservationFrame, p: &BaselineParams) -> f64 {
    let front = p.footprint.boundary_distance(0.0);
    (free_length(&obstacle_points(obs, p), 0.0, p.body_half_width) - front).max(0.0)
}

/// Arc length a constant `(sign, steer)` command covers before the inflated
/// body touches one of `points`, capped at `p.shield_distance`.
fn arc_free(points: &[Vec2], sign: f64, steer: f64, p: &BaselineParams) -> f64 {
    let (hl, hw) = match p.footprint {
        Footprint::Rect { length, width } => (length / 2.0, width / 2.0),
        Footprint::Point => (0.0, 0.0),
    };
    let gap = |q: Vec2, at: Vec2, theta: f64| {
        let local = (q - at).rotate(-theta);
        let dx = (local.x.abs() - hl).max(0.0);
        let dy = (local.y.abs() - hw).max(0.0);
        (dx * dx + dy * dy).sqrt()
    };
    let start = points
        .iter()
        .map(|&q| gap(q, Vec2::ZERO, 0.0))
        .fold(f64::INFINITY, f64::min);
    let margin = p.shield_margin.min(0.5 * start);
    let ds = 0.05;
    let curvature = steer.tan() / p.wheelbase;
    let (mut at, mut theta, mut s) = (Vec2::ZERO, 0.0_f64, 0.0);
    while s < p.shield_distance {
        let mid = theta + 0.5 * sign * ds * curvature;
        at += Vec2::from_angle(mid) * (sign * ds);
        theta += sign * ds * curvature;
        s += ds;
        if points.iter().any(|&q| gap(q, at, theta) < margin) {
            return s - ds;
        }
    }
    p.shield_distance
}

/// Pure pursuit toward [`choose_heading`]. A shield then replaces the steer
/// with the nearest one whose arc stays clear for `shield_distance`; with
/// no clear arc the robot backs off slowly with the steer mirrored. Speed
/// falls linearly with forward clearance down to a creep, and drops to
/// `v_min` below `stop_clearance`. A reverse holds, judged from the last
/// action in the frame, until the clearance recovers by `release`.
pub fn baseline_act(obs: &ObservationFrame, p: &BaselineParams) -> Action {
    let alpha = choose_heading(obs, p);
    let max = p.limits.steer_max;
    let pursuit = (2.0 * p.wheelbase * alpha.sin() / p.lookahead).atan().clamp(-max, max);
    let points = obstacle_points(obs, p);
    let mut options: Vec<f64> = (-8..=8).map(|k| max * k as f64 / 8.0).collect();
    options.push(pursuit);
    options.sort_by(|a, b| (a - pursuit).abs().total_cmp(&(b - pursuit).abs()));
    let shielded = options
        .into_iter()
        .map(|phi| (phi, arc_free(&points, 1.0, phi, p)))
        .find(|&(_, free)| free >= p.shield_distance);
    let clear = forward_clearance(obs, p);
    let reversing = obs.action_history[2][0] < 0.0;
    let threshold = if reversing {
        p.stop_clearance + p.release
    } else {
        p.stop_clearance
    };
    let (a, _) = match shielded {
        Some((steer, _)) if clear >= threshold => {
            let scale = ((clear - p.stop_clearance) * p.slowdown_gain).clamp(p.creep, 1.0);
            p.limits.clamp(Action::new(p.limits.v_max * scale, steer))
        }
        _ => p.limits.clamp(Action::new(p.limits.v_min, -pursuit)),
    };
    a
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Baseline {
    pub params: BaselineParams,
}

impl Baseline {
    pub fn new(params: BaselineParams) -> Self {
        Self { params }
    }
}

impl Policy for Baseline {
    fn act(&mut self, obs: &ObservationFrame) -> Action {
        baseline_act(obs, &self.params)
    }
}
