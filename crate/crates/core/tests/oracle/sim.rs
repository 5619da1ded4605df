//! Simulator references: scenario ranges measured off the generated world,
//! a sampled body-overlap test, and metric fixtures.

use gapnav::geom::{Pose, Vec2};
use gapnav::sim::metrics::{EpisodeResult, Outcome, PassEvent, PassSide};
use gapnav::sim::scenario::{Layout, Scenario, ShapeSpec, Template};
use gapnav::sim::{Obstacle, RobotParams, World};

const EPS: f64 = 1e-9;

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo - EPS && x <= hi + EPS
}

fn scale_of(spec: &ShapeSpec, o: &Obstacle) -> Option<f64> {
    match (spec, o) {
        (ShapeSpec::Rect { size }, Obstacle::Rect { min, max }) => {
            let sx = (max.x - min.x) / size[0];
            let sy = (max.y - min.y) / size[1];
            ((sx - sy).abs() < 1e-9).then_some(sx)
        }
        (ShapeSpec::Circle { radius: r0 }, Obstacle::Circle { radius, .. }) => Some(radius / r0),
        _ => None,
    }
}

fn center(o: &Obstacle) -> Vec2 {
    match *o {
        Obstacle::Rect { min, max } => (min + max) * 0.5,
        Obstacle::Circle { center, .. } => center,
    }
}

/// First range a generated world breaks, read off the geometry itself:
/// corridor width from the wall faces, scale from obstacle sizes, speed from
/// pedestrian velocities, lobby shift from obstacle centers.
pub fn scenario_violation(t: &Template, sc: &Scenario) -> Option<String> {
    let w = &sc.world;
    let n_walls = match t.layout {
        Layout::Lobby { .. } => 4,
        _ => 2,
    };
    if w.obstacles.len() != n_walls + t.obstacles.len() {
        return Some(format!("{} obstacles", w.obstacles.len()));
    }
    if let Layout::Corridor { width, .. } = t.layout {
        let (Obstacle::Rect { min: top, .. }, Obstacle::Rect { max: bottom, .. }) =
            (w.obstacles[0], w.obstacles[1])
        else {
            return Some("walls are not boxes".into());
        };
        let measured = top.y - bottom.y;
        if !within(measured, width[0], width[1]) {
            return Some(format!("corridor width {measured}"));
        }
    }
    for (spec, o) in t.obstacles.iter().zip(&w.obstacles[n_walls..]) {
        let Some(s) = scale_of(&spec.shape, o) else {
            return Some("obstacle shape changed".into());
        };
        if !within(s, t.scale[0], t.scale[1]) {
            return Some(format!("scale {s}"));
        }
        if let Layout::Lobby { shift, .. } = t.layout {
            let dx = center(o).x - spec.x;
            if !within(dx, -shift, shift) || (center(o).y - spec.y).abs() > EPS {
                return Some(format!("lobby shift {dx}"));
            }
        }
    }
    if let Some(p) = &t.pedestrians {
        if w.pedestrians.len() != p.count {
            return Some(format!("{} pedestrians", w.pedestrians.len()));
        }
        for ped in &w.pedestrians {
            let v = ped.velocity.norm();
            if !within(v, p.speed[0], p.speed[1]) {
                return Some(format!("pedestrian speed {v}"));
            }
        }
    }
    None
}

fn inside(world: &World, p: Vec2) -> bool {
    let b = world.bounds;
    let out = p.x < b.min.x || p.x > b.max.x || p.y < b.min.y || p.y > b.max.y;
    out || world.obstacles.iter().any(|o| match *o {
        Obstacle::Rect { min, max } => min.x <= p.x && p.x <= max.x && min.y <= p.y && p.y <= max.y,
        Obstacle::Circle { center, radius } => (p - center).norm() <= radius,
    }) || world
        .pedestrians
        .iter()
        .any(|h| (p - h.position).norm() <= h.radius)
}

/// Whether the robot body grown by `margin` on every side touches an
/// obstacle, a pedestrian or the outside of the world, by sampling a
/// 1 cm lattice over the body.
pub fn body_overlaps(world: &World, pose: Pose, robot: &RobotParams, margin: f64) -> bool {
    let hl = robot.length / 2.0 + margin;
    let hw = robot.width / 2.0 + margin;
    let (nx, ny) = ((2.0 * hl / 0.01).ceil() as i32, (2.0 * hw / 0.01).ceil() as i32);
    let (c, s) = (pose.theta.cos(), pose.theta.sin());
    (0..=nx).any(|i| {
        (0..=ny).any(|j| {
            let u = -hl + 2.0 * hl * i as f64 / nx as f64;
            let v = -hw + 2.0 * hw * j as f64 / ny as f64;
            inside(world, Vec2::new(pose.x + c * u - s * v, pose.y + s * u + c * v))
        })
    })
}

pub fn episode(outcome: Outcome, elapsed: f64) -> EpisodeResult {
    EpisodeResult {
        template: "a".into(),
        seed: 0,
        outcome,
        elapsed,
        trajectory: Vec::new(),
        pass_events: Vec::new(),
        error: None,
    }
}

/// Successes at 20 s and 30 s and one timeout, under a 60 s limit.
pub fn stl_fixture() -> Vec<EpisodeResult> {
    vec![
        episode(Outcome::Success, 20.0),
        episode(Outcome::Success, 30.0),
        episode(Outcome::Timeout, 60.0),
    ]
}

/// `(robot, pedestrian, velocity, expected)` by the dot-product rule: the
/// robot is behind when it sits opposite the walking direction.
pub fn pass_fixtures() -> Vec<(Vec2, Vec2, Vec2, Option<PassSide>)> {
    let v = |x, y| Vec2::new(x, y);
    vec![
        (v(0.0, 0.0), v(1.0, 0.0), v(1.0, 0.0), Some(PassSide::Behind)),
        (v(2.0, 0.0), v(1.0, 0.0), v(1.0, 0.0), Some(PassSide::Front)),
        (v(0.0, -1.0), v(0.0, 0.0), v(0.0, 1.2), Some(PassSide::Behind)),
        (v(0.5, 1.0), v(0.0, 0.0), v(0.3, 0.8), Some(PassSide::Front)),
        (v(-1.0, 0.5), v(0.0, 0.0), v(0.7, -0.2), Some(PassSide::Behind)),
        (v(0.0, 1.0), v(0.0, 0.0), v(0.0, 0.0), None),
    ]
}

pub fn pass_event(side: PassSide) -> PassEvent {
    PassEvent {
        pedestrian: 1,
        time: 1.0,
        side,
    }
}
