//! Exact 2D lidar emulation against the world geometry.

use std::f64::consts::TAU;

use super::world::World;
use crate::encoding::LaserRay;
use crate::geom::{Pose, Vec2};

/// `ray_count` equally spaced rays starting at the heading, counterclockwise.
/// Each reads the first hit on an obstacle or pedestrian disc, or `d_max`.
pub fn raycast_lidar(world: &World, pose: Pose, ray_count: usize, d_max: f64) -> Vec<LaserRay> {
    let origin = pose.position();
    (0..ray_count)
        .map(|j| {
            let angle = TAU * j as f64 / ray_count as f64;
            let dir = Vec2::from_angle(pose.theta + angle);
            let statics = world.obstacles.iter().filter_map(|o| o.ray_hit(origin, dir));
            let people = world.pedestrians.iter().filter_map(|p| p.disc().ray_hit(origin, dir));
            let distance = statics.chain(people).fold(d_max, f64::min);
            LaserRay { angle, distance }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Aabb;
    use crate::sim::robot::RobotState;
    use crate::sim::world::{Obstacle, Pedestrian};

    fn empty() -> World {
        World {
            bounds: Aabb {
                min: Vec2::new(-20.0, -20.0),
                max: Vec2::new(20.0, 20.0),
            },
            obstacles: vec![],
            pedestrians: vec![],
            robot: RobotState::default(),
            goal: Vec2::ZERO,
            time: 0.0,
        }
    }

    #[test]
    fn empty_world_reads_max() {
        let scan = raycast_lidar(&empty(), Pose::default(), 360, 10.0);
        assert_eq!(scan.len(), 360);
        assert!(scan.iter().all(|r| r.distance == 10.0));
    }

    #[test]
    fn wall_ahead() {
        let mut w = empty();
        w.obstacles.push(Obstacle::Rect {
            min: Vec2::new(3.0, -2.0),
            max: Vec2::new(3.2, 2.0),
        });
        let scan = raycast_lidar(&w, Pose::default(), 360, 10.0);
        assert_eq!(scan[0].distance, 3.0);
        // 180° points away from the wall
        assert_eq!(scan[180].distance, 10.0);
    }

    #[test]
    fn pedestrian_ahead() {
        let mut w = empty();
        w.pedestrians.push(Pedestrian {
            id: 0,
            position: Vec2::new(2.0, 0.0),
            velocity: Vec2::ZERO,
            radius: 0.3,
            bounds: w.bounds,
        });
        let scan = raycast_lidar(&w, Pose::default(), 720, 10.0);
        assert!((scan[0].distance - 1.7).abs() < 1e-9);
    }
}
