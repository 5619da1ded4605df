//! Robot-centric polar encodings of guidance points, laser scans and
//! pedestrians, and the observation frame that bundles them.
//!
//! Bin `k` of an `n`-bin vector covers bearings `[k·2π/n, (k+1)·2π/n)` in the
//! robot frame, counterclockwise from the heading. Bearings are measured from
//! world coordinates as `atan2(p - robot) - heading`, and distances as
//! `|p - robot|`, so a change of heading alone never perturbs a distance.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{Action, ActionLimits};
use crate::geom::{wrap_pi, wrap_two_pi, Pose, Vec2};
use crate::guidance::GuidancePoint;

/// Bumped whenever the serialized [`ObservationFrame`] layout changes.
pub const FRAME_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum EncodingError {
    #[error("{component} has {found} bins, expected {expected}")]
    BinMismatch {
        component: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid encoding parameters: {0}")]
    InvalidParams(String),
}

/// Fixed-length vector of values in `[0, 1]` indexed by bearing bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolarVector(Vec<f64>);

impl PolarVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Self(vec![value; n])
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn in_unit_range(&self) -> bool {
        self.0.iter().all(|v| (0.0..=1.0).contains(v))
    }

    /// Cyclic shift: bin `k` moves to bin `k + shift (mod n)`.
    pub fn shifted(&self, shift: isize) -> Self {
        let n = self.0.len() as isize;
        let mut out = vec![0.0; self.0.len()];
        for (k, v) in self.0.iter().enumerate() {
            out[(k as isize + shift).rem_euclid(n) as usize] = *v;
        }
        Self(out)
    }

    fn raise(&mut self, k: usize, value: f64) {
        if value > self.0[k] {
            self.0[k] = value;
        }
    }
}

/// Bin of a robot-frame bearing: bin `k` holds `[TAU·k/n, TAU·(k+1)/n)`,
/// with the edges evaluated exactly as written.
pub fn bin_index(bearing: f64, n: usize) -> usize {
    let a = wrap_two_pi(bearing);
    let edge = |k: usize| TAU * k as f64 / n as f64;
    let mut k = ((a * n as f64 / TAU).floor() as usize).min(n - 1);
    if a < edge(k) {
        k -= 1;
    } else if k + 1 < n && a >= edge(k + 1) {
        k += 1;
    }
    k
}

/// Robot-frame bearing and distance of a world point.
pub fn polar_of(pose: Pose, p: Vec2) -> (f64, f64) {
    let d = p - pose.position();
    (d.angle() - pose.theta, d.norm())
}

fn proximity(distance: f64, d_max: f64) -> f64 {
    (1.0 - distance / d_max).clamp(0.0, 1.0)
}

/// Guidance vector: zeros, then `1 - d/d_max` in each point's bin, nearest
/// point winning within a bin.
pub fn encode_guidance(points: &[GuidancePoint], pose: Pose, n: usize, d_max: f64) -> PolarVector {
    let mut out = PolarVector::zeros(n);
    for g in points {
        let (bearing, d) = polar_of(pose, g.position);
        out.raise(bin_index(bearing, n), proximity(d, d_max));
    }
    out
}

/// Robot body outline used to turn center ranges into edge ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Footprint {
    Point,
    /// Rectangle centered on the robot, `length` along the heading.
    Rect { length: f64, width: f64 },
}

impl Default for Footprint {
    fn default() -> Self {
        Footprint::Rect {
            length: 0.824,
            width: 0.624,
        }
    }
}

impl Footprint {
    /// Distance from the robot center to the body outline along a robot-frame
    /// bearing.
    pub fn boundary_distance(&self, bearing: f64) -> f64 {
        match *self {
            Footprint::Point => 0.0,
            Footprint::Rect { length, width } => {
                let (c, s) = (bearing.cos().abs(), bearing.sin().abs());
                let along = if c > 0.0 { length / 2.0 / c } else { f64::INFINITY };
                let across = if s > 0.0 { width / 2.0 / s } else { f64::INFINITY };
                along.min(across)
            }
        }
    }
}

/// One lidar return in the robot frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserRay {
    pub angle: f64,
    pub distance: f64,
}

/// Laser vector: per bin, the largest edge distance among its rays (range
/// minus the body outline along the ray), clamped to `[0, d_max]` and divided
/// by `d_max`. Bins without rays read 1.
pub fn sparsify_laser(scan: &[LaserRay], n: usize, d_max: f64, footprint: &Footprint) -> PolarVector {
    let mut best = vec![f64::NEG_INFINITY; n];
    for ray in scan {
        let edge = (ray.distance - footprint.boundary_distance(ray.angle)).clamp(0.0, d_max);
        let k = bin_index(ray.angle, n);
        best[k] = best[k].max(edge);
    }
    PolarVector(
        best.into_iter()
            .map(|b| if b == f64::NEG_INFINITY { 1.0 } else { b / d_max })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanState {
    pub id: u32,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
}

/// How samples landing in the same bin of a pedestrian vector combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HumanAggregator {
    /// Closest sample wins.
    #[default]
    Max,
    /// Smallest nonzero sample wins; bins without nonzero samples stay 0.
    MinNonzero,
}

const MAX_CIRCLE_SAMPLES: usize = 4096;

/// Samples on a pedestrian's outline as seen from `viewer`: at least 16, and
/// dense enough that consecutive samples are less than one bin apart in
/// bearing, plus the two tangent points seen from outside the circle. The
/// first sample is the point nearest the viewer.
pub fn circle_samples(center: Vec2, radius: f64, viewer: Vec2, n: usize) -> Vec<Vec2> {
    let to_viewer = viewer - center;
    let dist = to_viewer.norm();
    let bin_arc = (dist - radius).max(1e-3) * TAU / n as f64;
    let m = ((TAU * radius / bin_arc).ceil() as usize).clamp(16, MAX_CIRCLE_SAMPLES);
    let start = if dist > 0.0 { to_viewer.angle() } else { 0.0 };
    let mut out: Vec<Vec2> = (0..m)
        .map(|j| center + Vec2::from_angle(start + TAU * j as f64 / m as f64) * radius)
        .collect();
    if dist > radius {
        let half = (radius / dist).acos();
        out.push(center + Vec2::from_angle(start + half) * radius);
        out.push(center + Vec2::from_angle(start - half) * radius);
    }
    out
}

/// Pedestrian vector over the current position and the two constant-velocity
/// predictions `dt` and `2·dt` ahead.
pub fn encode_human(
    h: &HumanState,
    pose: Pose,
    n: usize,
    d_max: f64,
    dt: f64,
    aggregator: HumanAggregator,
) -> PolarVector {
    let mut out = PolarVector::zeros(n);
    let mut low = vec![f64::INFINITY; n];
    for step in 0..3 {
        let center = h.position + h.velocity * (dt * step as f64);
        for p in circle_samples(center, h.radius, pose.position(), n) {
            let (bearing, d) = polar_of(pose, p);
            let k = bin_index(bearing, n);
            let v = proximity(d, d_max);
            match aggregator {
                HumanAggregator::Max => out.raise(k, v),
                HumanAggregator::MinNonzero if v > 0.0 => low[k] = low[k].min(v),
                HumanAggregator::MinNonzero => {}
            }
        }
    }
    if aggregator == HumanAggregator::MinNonzero {
        for (k, l) in low.into_iter().enumerate() {
            if l.is_finite() {
                out.0[k] = l;
            }
        }
    }
    out
}

/// Farthest first; equal distances by ascending id.
pub fn order_humans(humans: &[HumanState], pose: Pose) -> Vec<HumanState> {
    let mut keyed: Vec<(f64, HumanState)> = humans
        .iter()
        .map(|h| ((h.position - pose.position()).norm(), *h))
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.id.cmp(&b.1.id)));
    keyed.into_iter().map(|(_, h)| h).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingParams {
    pub n: usize,
    pub d_max: f64,
    /// Horizon step for pedestrian predictions, seconds.
    pub dt: f64,
    pub d_goal_norm: f64,
    pub aggregator: HumanAggregator,
    pub footprint: Footprint,
}

impl Default for EncodingParams {
    fn default() -> Self {
        Self {
            n: 72,
            d_max: 10.0,
            dt: 0.4,
            d_goal_norm: 20.0,
            aggregator: HumanAggregator::Max,
            footprint: Footprint::default(),
        }
    }
}

impl EncodingParams {
    pub fn validate(&self) -> Result<(), EncodingError> {
        let bad = |m: &str| Err(EncodingError::InvalidParams(m.to_string()));
        if self.n < 4 {
            return bad("n must be at least 4");
        }
        if !(self.d_max > 0.0) {
            return bad("d_max must be positive");
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.d_goal_norm > 0.0) {
            return bad("d_goal_norm must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalPolar {
    /// Distance over `d_goal_norm`, clipped to `[0, 1]`.
    pub distance: f64,
    /// Robot-frame bearing in `(-π, π]`.
    pub angle: f64,
}

/// Everything a policy sees at one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationFrame {
    pub version: u32,
    pub n: usize,
    pub guidance: PolarVector,
    pub laser_now: PolarVector,
    pub laser_prev: PolarVector,
    /// Pedestrian vectors, farthest first. A frame with no detections
    /// carries a single all-zero vector.
    pub humans: Vec<PolarVector>,
    /// Ids matching `humans`; empty when nobody is detected.
    pub human_ids: Vec<u32>,
    pub goal: GoalPolar,
    /// `(v, φ)` normalized to `[-1, 1]`, oldest first, most recent last.
    pub action_history: [[f64; 2]; 3],
}

impl ObservationFrame {
    /// Checks lengths and value ranges.
    pub fn validate(&self) -> Result<(), EncodingError> {
        let check = |name: &str, v: &PolarVector| {
            if v.len() != self.n {
                return Err(EncodingError::BinMismatch {
                    component: name.to_string(),
                    expected: self.n,
                    found: v.len(),
                });
            }
            if !v.in_unit_range() {
                return Err(EncodingError::InvalidParams(format!("{name} leaves [0, 1]")));
            }
            Ok(())
        };
        check("guidance", &self.guidance)?;
        check("laser_now", &self.laser_now)?;
        check("laser_prev", &self.laser_prev)?;
        for h in &self.humans {
            check("humans", h)?;
        }
        Ok(())
    }

    /// Every scalar in a fixed order: guidance, laser now, laser previous,
    /// humans, goal distance and angle, action history.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend_from_slice(self.guidance.values());
        out.extend_from_slice(self.laser_now.values());
        out.extend_from_slice(self.laser_prev.values());
        for h in &self.humans {
            out.extend_from_slice(h.values());
        }
        out.push(self.goal.distance);
        out.push(self.goal.angle);
        for a in &self.action_history {
            out.extend_from_slice(a);
        }
        out
    }
}

/// Sensor data from one timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSnapshot {
    pub pose: Pose,
    pub goal: Vec2,
    pub guidance: Vec<GuidancePoint>,
    pub scan: Vec<LaserRay>,
    pub humans: Vec<HumanState>,
}

/// Builds the frame for `snap`. `prev_laser` is the previous step's laser
/// vector, `None` at episode start (zeros); `history` holds the last three
/// actions, oldest first.
pub fn assemble_observation(
    snap: &SensorSnapshot,
    prev_laser: Option<&PolarVector>,
    history: &[Action; 3],
    limits: &ActionLimits,
    params: &EncodingParams,
) -> Result<ObservationFrame, EncodingError> {
    params.validate()?;
    let n = params.n;
    let laser_prev = match prev_laser {
        Some(v) if v.len() != n => {
            return Err(EncodingError::BinMismatch {
                component: "laser_prev".into(),
                expected: n,
                found: v.len(),
            })
        }
        Some(v) => v.clone(),
        None => PolarVector::zeros(n),
    };
    let ordered = order_humans(&snap.humans, snap.pose);
    let mut humans: Vec<PolarVector> = ordered
        .iter()
        .map(|h| encode_human(h, snap.pose, n, params.d_max, params.dt, params.aggregator))
        .collect();
    if humans.is_empty() {
        humans.push(PolarVector::zeros(n));
    }
    let (bearing, dist) = polar_of(snap.pose, snap.goal);
    let goal = GoalPolar {
        distance: (dist / params.d_goal_norm).clamp(0.0, 1.0),
        angle: if dist > 0.0 { wrap_pi(bearing) } else { 0.0 },
    };
    Ok(ObservationFrame {
        version: FRAME_VERSION,
        n,
        guidance: encode_guidance(&snap.guidance, snap.pose, n, params.d_max),
        laser_now: sparsify_laser(&snap.scan, n, params.d_max, &params.footprint),
        laser_prev,
        humans,
        human_ids: ordered.iter().map(|h| h.id).collect(),
        goal,
        action_history: history.map(|a| limits.normalize(a)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cell, GroupId};

    fn gp(x: f64, y: f64) -> GuidancePoint {
        GuidancePoint {
            position: Vec2::new(x, y),
            group_i: GroupId(0),
            group_j: GroupId(1),
            anchor_i: Cell::new(0, 0),
            anchor_j: Cell::new(0, 0),
            gap_width: 1.0,
        }
    }

    #[test]
    fn guidance_examples() {
        let pose = Pose::new(0.0, 0.0, 0.0);
        assert_eq!(encode_guidance(&[], pose, 8, 10.0), PolarVector::zeros(8));
        assert_eq!(encode_guidance(&[gp(10.0, 0.0)], pose, 8, 10.0), PolarVector::zeros(8));
        let v = encode_guidance(&[gp(5.0, 0.0)], pose, 8, 10.0);
        assert_eq!(v.values(), &[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        // same bin: nearest wins
        let v = encode_guidance(&[gp(5.0, 0.1), gp(2.0, 0.1)], pose, 8, 10.0);
        assert!((v.values()[0] - (1.0 - 4.01f64.sqrt() / 10.0)).abs() < 1e-15);
        // behind-left lands in bin 3 of 8 (135°..180°)
        let v = encode_guidance(&[gp(-3.0, 1.0)], pose, 8, 10.0);
        assert!(v.values()[3] > 0.0);
    }

    #[test]
    fn bins_wrap_negative_bearings() {
        assert_eq!(bin_index(-0.01, 72), 71);
        assert_eq!(bin_index(0.0, 72), 0);
        assert_eq!(bin_index(TAU - 1e-18, 72), 0);
        assert_eq!(bin_index(5f64.to_radians() + 1e-12, 72), 1);
    }

    #[test]
    fn laser_examples() {
        let scan: Vec<LaserRay> = (0..72)
            .map(|k| LaserRay {
                angle: (k as f64 + 0.5) * TAU / 72.0,
                distance: 10.0,
            })
            .collect();
        assert_eq!(sparsify_laser(&scan, 72, 10.0, &Footprint::Point), PolarVector::filled(72, 1.0));
        let two = [
            LaserRay { angle: 0.01, distance: 2.0 },
            LaserRay { angle: 0.02, distance: 3.0 },
        ];
        let v = sparsify_laser(&two, 72, 10.0, &Footprint::Point);
        assert!((v.values()[0] - 0.3).abs() < 1e-15);
        assert_eq!(v.values()[1], 1.0);
        let fwd = [LaserRay { angle: 0.0, distance: 2.0 }];
        let v = sparsify_laser(&fwd, 72, 10.0, &Footprint::default());
        assert_eq!(v.values()[0], (2.0 - 0.412) / 10.0);
    }

    #[test]
    fn footprint_outline() {
        let f = Footprint::default();
        assert_eq!(f.boundary_distance(0.0), 0.412);
        assert!((f.boundary_distance(std::f64::consts::FRAC_PI_2) - 0.312).abs() < 1e-15);
        assert!((f.boundary_distance(std::f64::consts::PI) - 0.412).abs() < 1e-15);
    }

    #[test]
    fn human_ordering() {
        let h = |id, x: f64| HumanState {
            id,
            position: Vec2::new(x, 0.0),
            velocity: Vec2::ZERO,
            radius: 0.3,
        };
        let pose = Pose::default();
        let ids = |v: Vec<HumanState>| v.iter().map(|h| h.id).collect::<Vec<_>>();
        assert_eq!(ids(order_humans(&[h(1, 2.0)], pose)), vec![1]);
        assert_eq!(ids(order_humans(&[h(1, 2.0), h(2, 5.0)], pose)), vec![2, 1]);
        assert_eq!(ids(order_humans(&[h(3, 2.0), h(1, -2.0)], pose)), vec![1, 3]);
    }

    #[test]
    fn stationary_pedestrian_matches_single_step() {
        let h = HumanState {
            id: 0,
            position: Vec2::new(2.0, 1.0),
            velocity: Vec2::ZERO,
            radius: 0.3,
        };
        let pose = Pose::new(0.0, 0.0, 0.3);
        let three = encode_human(&h, pose, 72, 10.0, 0.4, HumanAggregator::Max);
        let mut single = PolarVector::zeros(72);
        for p in circle_samples(h.position, h.radius, pose.position(), 72) {
            let (b, d) = polar_of(pose, p);
            single.raise(bin_index(b, 72), proximity(d, 10.0));
        }
        assert_eq!(three, single);
    }

    #[test]
    fn min_nonzero_never_exceeds_max() {
        let h = HumanState {
            id: 0,
            position: Vec2::new(3.0, 0.5),
            velocity: Vec2::new(-0.5, 0.8),
            radius: 0.4,
        };
        let pose = Pose::new(0.0, 0.0, 0.0);
        let hi = encode_human(&h, pose, 72, 10.0, 0.4, HumanAggregator::Max);
        let lo = encode_human(&h, pose, 72, 10.0, 0.4, HumanAggregator::MinNonzero);
        for (a, b) in hi.values().iter().zip(lo.values()) {
            assert!(b <= a);
            assert_eq!(*a == 0.0, *b == 0.0);
        }
    }

    #[test]
    fn assemble_rejects_mismatched_history() {
        let snap = SensorSnapshot {
            pose: Pose::default(),
            goal: Vec2::ZERO,
            guidance: vec![],
            scan: vec![],
            humans: vec![],
        };
        let params = EncodingParams::default();
        let lim = ActionLimits::default();
        let hist = [Action::default(); 3];
        let f = assemble_observation(&snap, None, &hist, &lim, &params).unwrap();
        assert_eq!(f.goal.distance, 0.0);
        assert_eq!(f.laser_prev, PolarVector::zeros(72));
        assert_eq!(f.humans, vec![PolarVector::zeros(72)]);
        f.validate().unwrap();
        let err = assemble_observation(&snap, Some(&PolarVector::zeros(8)), &hist, &lim, &params);
        assert!(matches!(err, Err(EncodingError::BinMismatch { found: 8, .. })));
    }
}
