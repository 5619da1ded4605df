//! Hand-built maps for the guidance pipeline.

use gapnav::geom::{Pose, Vec2};
use gapnav::grid::OccupancyGrid;

use super::paint_disc;

/// Three small square obstacles; the middle one sits slightly off the line
/// through the outer two, so the outer pair's gap runs past it.
pub fn collinear_three() -> OccupancyGrid {
    let mut g = OccupancyGrid::new(41, 64, 1.0).unwrap();
    g.fill_rect(9, 40, 11, 42);
    g.fill_rect(19, 42, 21, 44);
    g.fill_rect(29, 40, 31, 42);
    g
}

/// Three equal discs on the corners of an equilateral triangle.
pub fn equilateral_three() -> OccupancyGrid {
    let mut g = OccupancyGrid::new(64, 64, 1.0).unwrap();
    let side = 24.0;
    let a = Vec2::new(20.0, 20.0);
    let b = a + Vec2::new(side, 0.0);
    let c = a + Vec2::from_angle(std::f64::consts::FRAC_PI_3) * side;
    for p in [a, b, c] {
        paint_disc(&mut g, p, 2.5);
    }
    g
}

/// A corridor (walls top and bottom) crossed by three obstacles, giving five
/// obstacle groups and four gaps. The robot stands before the obstacles,
/// facing down the corridor.
pub fn five_obstacle_corridor() -> (OccupancyGrid, Pose) {
    let res = 0.1;
    let mut g = OccupancyGrid::new(120, 60, res).unwrap();
    g.fill_rect(0, 0, 119, 2);
    g.fill_rect(0, 57, 119, 59);
    // obstacles staggered across the corridor
    g.fill_rect(60, 10, 67, 16);
    g.fill_rect(66, 25, 72, 33);
    g.fill_rect(58, 42, 65, 48);
    (g, Pose::new(2.0, 3.0, 0.0))
}

/// Two rectangles of random size whose facing corners are the unique
/// closest approach, randomly mirrored, plus a robot pose looking at the gap
/// from the side. Returns the grid, the pose and the analytic midpoint of the
/// two corners.
pub fn rect_pair(seed: u64) -> (OccupancyGrid, Pose, Vec2) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut g = OccupancyGrid::new(64, 64, 1.0).unwrap();
    let (wa, ha) = (rng.random_range(2..=10), rng.random_range(2..=10));
    let (wb, hb) = (rng.random_range(2..=10), rng.random_range(2..=10));
    let (ax, ay) = (rng.random_range(20..=30), rng.random_range(20..=30));
    let (bx, by) = (ax + rng.random_range(2..=8), ay + rng.random_range(2..=8));
    let mirror = rng.random_bool(0.5);
    let fx = |x: i32| if mirror { 63 - x } else { x };
    let rect = |g: &mut OccupancyGrid, x0: i32, y0: i32, x1: i32, y1: i32| {
        g.fill_rect(fx(x0).min(fx(x1)), y0, fx(x0).max(fx(x1)), y1);
    };
    rect(&mut g, ax - wa + 1, ay - ha + 1, ax, ay);
    rect(&mut g, bx, by, bx + wb - 1, by + hb - 1);
    let mid = Vec2::new(fx(ax) as f64 + fx(bx) as f64, (ay + by) as f64) * 0.5;
    let along = Vec2::new((fx(bx) - fx(ax)) as f64, (by - ay) as f64);
    let normal = along.rotate(std::f64::consts::FRAC_PI_2) * (1.0 / along.norm());
    let pose = [normal, -normal]
        .into_iter()
        .map(|n| (mid + n * 12.0, n))
        .find(|&(p, _)| !super::sampled_segment_blocked(&g, p, mid))
        .map(|(p, n)| Pose::new(p.x, p.y, (-n).angle()))
        .expect("one side of the gap is open");
    (g, pose, mid)
}

/// Two horizontal wall segments 3 m apart, the lower one longer.
pub fn parallel_walls() -> OccupancyGrid {
    let mut g = OccupancyGrid::new(80, 60, 0.1).unwrap();
    g.fill_rect(10, 15, 69, 15);
    g.fill_rect(25, 45, 54, 45);
    g
}
