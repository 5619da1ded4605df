//! Rasterizing the world into an occupancy grid for guidance extraction.

use super::world::World;
use crate::encoding::HumanState;
use crate::geom::{Aabb, Pose, Vec2};
use crate::grid::{Cell, OccupancyGrid};

/// Marks every cell whose center lies inside a static obstacle or one of
/// `humans`, over `window` at resolution `res`. Cell `(0, 0)` is centered
/// half a cell inside `window.min`.
pub fn rasterize(world: &World, humans: &[HumanState], window: Aabb, res: f64) -> OccupancyGrid {
    let size = window.size();
    let width = ((size.x / res).ceil() as usize).max(1);
    let height = ((size.y / res).ceil() as usize).max(1);
    let origin = window.min + Vec2::new(res, res) * 0.5;
    let mut grid = OccupancyGrid::new(width, height, res)
        .expect("positive size and resolution")
        .with_origin(origin);
    let mut paint = |bounds: Aabb, inside: &dyn Fn(Vec2) -> bool| {
        let lo = (bounds.min - origin) * (1.0 / res);
        let hi = (bounds.max - origin) * (1.0 / res);
        for y in (lo.y.floor() as i32).max(0)..=(hi.y.ceil() as i32).min(height as i32 - 1) {
            for x in (lo.x.floor() as i32).max(0)..=(hi.x.ceil() as i32).min(width as i32 - 1) {
                let c = Cell::new(x, y);
                if inside(grid.cell_center(c)) {
                    grid.set(c, true);
                }
            }
        }
    };
    for o in &world.obstacles {
        paint(o.bounds(), &|p| o.contains(p));
    }
    for h in humans {
        let r = Vec2::new(h.radius, h.radius);
        let b = Aabb {
            min: h.position - r,
            max: h.position + r,
        };
        paint(b, &|p| p.distance(h.position) <= h.radius);
    }
    grid
}

/// Square of half-size `half` around the robot, clipped to the world bounds.
pub fn local_window(world: &World, pose: Pose, half: f64) -> Aabb {
    let c = pose.position();
    Aabb {
        min: Vec2::new((c.x - half).max(world.bounds.min.x), (c.y - half).max(world.bounds.min.y)),
        max: Vec2::new((c.x + half).min(world.bounds.max.x), (c.y + half).min(world.bounds.max.y)),
    }
}
