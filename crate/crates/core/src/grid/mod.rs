//! Binary occupancy grids, erosion, boundary grouping and the labeled
//! distance field that guidance extraction runs on.
//!
//! Cell `(x, y)` has its center at `origin + (x, y) * resolution` in the
//! world frame, so `y` grows upward. Cells are stored row-major with row
//! `y = 0` first in memory; the text and PGM formats list the top row
//! (`y = height - 1`) first, like a picture of the map.

mod boundary;
mod distance;
mod io;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;

pub use boundary::{extract_boundaries, BoundaryGroup, GroupId};
pub use distance::{distance_transform, DistanceField, FieldRecord, Nearest};
pub use io::{parse_grid_text, parse_pgm, read_map, write_grid_text};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid dimensions must be positive (got {width}x{height})")]
    EmptyGrid { width: usize, height: usize },
    #[error("resolution must be a positive finite number (got {0})")]
    BadResolution(f64),
    #[error("cell buffer has {got} entries, expected {expected}")]
    BufferSize { expected: usize, got: usize },
    #[error("cell value {0} is not 0 or 1")]
    BadCell(u8),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("byte offset {offset}: {message}")]
    Pgm { offset: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Integer cell coordinate. Ordered row-major: by `y`, then `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn dist_sq(self, other: Cell) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        dx * dx + dy * dy
    }

    pub fn offset(self, dx: i32, dy: i32) -> Cell {
        Cell::new(self.x + dx, self.y + dy)
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The eight neighbor offsets in clockwise order (y up), starting east.
pub(crate) const CLOCKWISE: [(i32, i32); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Vec2,
    cells: Vec<u8>,
}

impl OccupancyGrid {
    /// An all-free grid.
    pub fn new(width: usize, height: usize, resolution: f64) -> Result<Self, GridError> {
        Self::from_cells(width, height, resolution, vec![0; width * height])
    }

    pub fn from_cells(
        width: usize,
        height: usize,
        resolution: f64,
        cells: Vec<u8>,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyGrid { width, height });
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(GridError::BadResolution(resolution));
        }
        if cells.len() != width * height {
            return Err(GridError::BufferSize {
                expected: width * height,
                got: cells.len(),
            });
        }
        if let Some(&bad) = cells.iter().find(|&&c| c > 1) {
            return Err(GridError::BadCell(bad));
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin: Vec2::ZERO,
            cells,
        })
    }

    pub fn with_origin(mut self, origin: Vec2) -> Self {
        self.origin = origin;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    pub(crate) fn index(&self, c: Cell) -> usize {
        c.y as usize * self.width + c.x as usize
    }

    pub(crate) fn cell_at(&self, index: usize) -> Cell {
        Cell::new((index % self.width) as i32, (index / self.width) as i32)
    }

    /// Out-of-bounds cells read as free.
    pub fn is_obstacle(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.cells[self.index(c)] == 1
    }

    pub fn set(&mut self, c: Cell, obstacle: bool) {
        assert!(
            self.in_bounds(c),
            "cell {c:?} outside {}x{}",
            self.width,
            self.height
        );
        let i = self.index(c);
        self.cells[i] = obstacle as u8;
    }

    /// Marks every cell of the inclusive rectangle `[x0, x1] × [y0, y1]`, clipped to the grid.
    pub fn fill_rect(&mut self, x0: i32, y0: i32, x1: i32, y1: i32) {
        for y in y0.max(0)..=y1.min(self.height as i32 - 1) {
            for x in x0.max(0)..=x1.min(self.width as i32 - 1) {
                self.set(Cell::new(x, y), true);
            }
        }
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cells.len()).map(|i| self.cell_at(i))
    }

    pub fn obstacle_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 1).count()
    }

    pub fn cell_center(&self, c: Cell) -> Vec2 {
        self.origin + Vec2::new(c.x as f64, c.y as f64) * self.resolution
    }

    /// Cell whose square contains `p`, if inside the grid.
    pub fn world_to_cell(&self, p: Vec2) -> Option<Cell> {
        let local = (p - self.origin) * (1.0 / self.resolution);
        let c = Cell::new(
            (local.x + 0.5).floor() as i32,
            (local.y + 0.5).floor() as i32,
        );
        self.in_bounds(c).then_some(c)
    }

    /// Walks every cell touched by the segment `a → b` (both in world
    /// coordinates), corner crossings included on both sides.
    pub fn segment_hits_obstacle(&self, a: Vec2, b: Vec2, skip_start: bool) -> bool {
        let to_grid = |p: Vec2| (p - self.origin) * (1.0 / self.resolution) + Vec2::new(0.5, 0.5);
        let (ga, gb) = (to_grid(a), to_grid(b));
        let start = Cell::new(ga.x.floor() as i32, ga.y.floor() as i32);
        let end = Cell::new(gb.x.floor() as i32, gb.y.floor() as i32);
        let check = |c: Cell| self.is_obstacle(c);
        if !skip_start && check(start) {
            return true;
        }
        let d = gb - ga;
        let step_x = if d.x > 0.0 { 1 } else { -1 };
        let step_y = if d.y > 0.0 { 1 } else { -1 };
        let t_delta_x = if d.x != 0.0 {
            (1.0 / d.x).abs()
        } else {
            f64::INFINITY
        };
        let t_delta_y = if d.y != 0.0 {
            (1.0 / d.y).abs()
        } else {
            f64::INFINITY
        };
        let mut t_max_x = if d.x > 0.0 {
            (start.x as f64 + 1.0 - ga.x) / d.x
        } else if d.x < 0.0 {
            (ga.x - start.x as f64) / -d.x
        } else {
            f64::INFINITY
        };
        let mut t_max_y = if d.y > 0.0 {
            (start.y as f64 + 1.0 - ga.y) / d.y
        } else if d.y < 0.0 {
            (ga.y - start.y as f64) / -d.y
        } else {
            f64::INFINITY
        };
        let mut cur = start;
        let budget = (start.x - end.x).abs() + (start.y - end.y).abs() + 2;
        for _ in 0..budget {
            if cur == end {
                break;
            }
            if (t_max_x - t_max_y).abs() < 1e-12 {
                // passing through a corner: both side cells are touched
                if check(cur.offset(step_x, 0)) || check(cur.offset(0, step_y)) {
                    return true;
                }
                cur = cur.offset(step_x, step_y);
                t_max_x += t_delta_x;
                t_max_y += t_delta_y;
            } else if t_max_x < t_max_y {
                cur = cur.offset(step_x, 0);
                t_max_x += t_delta_x;
            } else {
                cur = cur.offset(0, step_y);
                t_max_y += t_delta_y;
            }
            if check(cur) {
                return true;
            }
        }
        false
    }
}

/// Single-step erosion with the full 3×3 structuring element.
///
/// A cell stays occupied only if it and all eight neighbors are occupied;
/// neighbors outside the grid count as free.
pub fn erode(grid: &OccupancyGrid) -> OccupancyGrid {
    let mut out = grid.clone();
    for c in grid.iter_cells() {
        let keep = grid.is_obstacle(c)
            && CLOCKWISE
                .iter()
                .all(|&(dx, dy)| grid.is_obstacle(c.offset(dx, dy)));
        let i = grid.index(c);
        out.cells[i] = keep as u8;
    }
    out
}
