//! World geometry: static obstacles, scripted pedestrians, robot and goal.

use serde::{Deserialize, Serialize};

use super::robot::{RobotParams, RobotState};
use crate::encoding::HumanState;
use crate::geom::{Aabb, Circle, Obb, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Obstacle {
    /// Axis-aligned box; walls and elongated obstacles are long boxes.
    Rect { min: Vec2, max: Vec2 },
    Circle { center: Vec2, radius: f64 },
}

impl Obstacle {
    pub fn rect(center: Vec2, size: Vec2) -> Self {
        let b = Aabb::from_center(center, size * 0.5);
        Obstacle::Rect { min: b.min, max: b.max }
    }

    pub fn circle(center: Vec2, radius: f64) -> Self {
        Obstacle::Circle { center, radius }
    }

    pub fn bounds(&self) -> Aabb {
        match *self {
            Obstacle::Rect { min, max } => Aabb { min, max },
            Obstacle::Circle { center, radius } => Aabb::from_center(center, Vec2::new(radius, radius)),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match *self {
            Obstacle::Rect { min, max } => Aabb { min, max }.contains(p),
            Obstacle::Circle { center, radius } => p.distance(center) <= radius,
        }
    }

    /// Distance from a point to the obstacle (zero inside).
    pub fn distance_to(&self, p: Vec2) -> f64 {
        match *self {
            Obstacle::Rect { min, max } => p.distance(Aabb { min, max }.closest_point(p)),
            Obstacle::Circle { center, radius } => (p.distance(center) - radius).max(0.0),
        }
    }

    pub fn ray_hit(&self, origin: Vec2, dir: Vec2) -> Option<f64> {
        match *self {
            Obstacle::Rect { min, max } => Aabb { min, max }.ray_hit(origin, dir),
            Obstacle::Circle { center, radius } => Circle { center, radius }.ray_hit(origin, dir),
        }
    }

    /// Clearance between the robot body and this obstacle.
    pub fn clearance(&self, body: &Obb) -> f64 {
        match *self {
            Obstacle::Rect { min, max } => body.distance_to_aabb(&Aabb { min, max }),
            Obstacle::Circle { center, radius } => body.distance_to_circle(&Circle { center, radius }),
        }
    }
}

/// Constant-velocity walker that bounces off the edges of its box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pedestrian {
    pub id: u32,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    /// Region the center stays in.
    pub bounds: Aabb,
}

impl Pedestrian {
    pub fn state(&self) -> HumanState {
        HumanState {
            id: self.id,
            position: self.position,
            velocity: self.velocity,
            radius: self.radius,
        }
    }

    pub fn disc(&self) -> Circle {
        Circle {
            center: self.position,
            radius: self.radius,
        }
    }

    /// Moves `dt` along the velocity, mirroring position and velocity at the
    /// box edges. Speed is preserved.
    pub fn advance(&mut self, dt: f64) {
        let mut p = self.position + self.velocity * dt;
        let mut v = self.velocity;
        let reflect = |x: &mut f64, vx: &mut f64, lo: f64, hi: f64| {
            // a box narrower than one step still terminates: at most a few flips
            for _ in 0..8 {
                if *x < lo {
                    *x = 2.0 * lo - *x;
                    *vx = -*vx;
                } else if *x > hi {
                    *x = 2.0 * hi - *x;
                    *vx = -*vx;
                } else {
                    break;
                }
            }
            *x = x.clamp(lo, hi);
        };
        reflect(&mut p.x, &mut v.x, self.bounds.min.x, self.bounds.max.x);
        reflect(&mut p.y, &mut v.y, self.bounds.min.y, self.bounds.max.y);
        self.position = p;
        self.velocity = v;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    /// Leaving this box counts as a collision.
    pub bounds: Aabb,
    pub obstacles: Vec<Obstacle>,
    pub pedestrians: Vec<Pedestrian>,
    pub robot: RobotState,
    pub goal: Vec2,
    /// Seconds since reset.
    pub time: f64,
}

impl World {
    pub fn step_pedestrians(&mut self, dt: f64) {
        for p in &mut self.pedestrians {
            p.advance(dt);
        }
    }

    /// Smallest distance between the robot body and any obstacle or
    /// pedestrian; infinite in an empty world, zero on contact.
    pub fn clearance(&self, params: &RobotParams) -> f64 {
        let body = params.body(self.robot.pose);
        let statics = self.obstacles.iter().map(|o| o.clearance(&body));
        let people = self.pedestrians.iter().map(|p| body.distance_to_circle(&p.disc()));
        statics.chain(people).fold(f64::INFINITY, f64::min)
    }

    pub fn robot_in_bounds(&self, params: &RobotParams) -> bool {
        params
            .body(self.robot.pose)
            .corners()
            .iter()
            .all(|c| self.bounds.contains(*c))
    }

    /// Distance from a point to the nearest static obstacle.
    pub fn static_distance(&self, p: Vec2) -> f64 {
        self.obstacles.iter().map(|o| o.distance_to(p)).fold(f64::INFINITY, f64::min)
    }
}
