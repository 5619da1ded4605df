//! Binary PPM (P6) images of a map with its guidance points.

use gapnav::geom::{Pose, Vec2};
use gapnav::grid::{Cell, OccupancyGrid};
use gapnav::guidance::GuidancePoint;

pub type Rgb = [u8; 3];

const FREE: Rgb = [255, 255, 255];
const OBSTACLE: Rgb = [40, 40, 40];
const POINT: Rgb = [220, 30, 30];
const ROBOT: Rgb = [30, 90, 220];

pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl Image {
    pub fn new(width: usize, height: usize, fill: Rgb) -> Self {
        Self {
            width,
            height,
            pixels: vec![fill; width * height],
        }
    }

    pub fn put(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.pixels[y as usize * self.width + x as usize] = c;
        }
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }
}

/// Map cells at a few pixels each (row 0 of the grid at the bottom), points
/// as red dots, and the robot as a blue dot with a heading tick.
pub fn overlay(grid: &OccupancyGrid, pose: Pose, points: &[GuidancePoint]) -> Image {
    let scale = (800 / grid.width().max(grid.height())).clamp(1, 8) as i64;
    let (w, h) = (grid.width() as i64, grid.height() as i64);
    let mut img = Image::new((w * scale) as usize, (h * scale) as usize, FREE);
    for c in grid.iter_cells() {
        if grid.is_obstacle(c) {
            for dy in 0..scale {
                for dx in 0..scale {
                    img.put(c.x as i64 * scale + dx, (h - 1 - c.y as i64) * scale + dy, OBSTACLE);
                }
            }
        }
    }
    // world point to pixel, through fractional cell coordinates
    let origin = grid.cell_center(Cell::new(0, 0));
    let res = grid.resolution();
    let to_px = |p: Vec2| {
        let fx = (p.x - origin.x) / res + 0.5;
        let fy = (p.y - origin.y) / res + 0.5;
        ((fx * scale as f64).floor() as i64, ((h as f64 - fy) * scale as f64).floor() as i64)
    };
    let dot = |img: &mut Image, p: Vec2, r: i64, c: Rgb| {
        let (px, py) = to_px(p);
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy <= r * r {
                    img.put(px + dx, py + dy, c);
                }
            }
        }
    };
    let r = (scale + 1).max(2);
    for p in points {
        dot(&mut img, p.position, r, POINT);
    }
    dot(&mut img, pose.position(), r + 1, ROBOT);
    let steps = 6 * r;
    for k in 0..=steps {
        let along = Vec2::from_angle(pose.theta) * (3.0 * r as f64 * res / scale as f64 * k as f64 / steps as f64);
        let (px, py) = to_px(pose.position() + along);
        img.put(px, py, ROBOT);
    }
    img
}
