//! Brute-force reference computations and fixture builders shared by the
//! integration tests and the acceptance suite. Nothing here calls the code
//! path it is used to check.

#![allow(dead_code)]

use std::collections::BTreeMap;

use gapnav::geom::Vec2;
use gapnav::grid::{BoundaryGroup, Cell, GroupId, OccupancyGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Boundary cells by direct definition: occupied with at least one free
/// (or out-of-range) cell in the 3×3 neighborhood.
pub fn brute_boundary(grid: &OccupancyGrid) -> Vec<Cell> {
    let mut out = Vec::new();
    for y in 0..grid.height() as i32 {
        for x in 0..grid.width() as i32 {
            let c = Cell::new(x, y);
            if !grid.is_obstacle(c) {
                continue;
            }
            let mut interior = true;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    interior &= grid.is_obstacle(Cell::new(x + dx, y + dy));
                }
            }
            if !interior {
                out.push(c);
            }
        }
    }
    out
}

/// Per free cell: nearest squared distance, the smallest group id attaining
/// it, squared distance to the nearest point of any other group, and whether
/// that second group is unique.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteRecord {
    pub d1: i64,
    pub g1: GroupId,
    pub d2: Option<i64>,
    pub g2: Option<GroupId>,
    pub g2_unique: bool,
}

pub fn brute_field(grid: &OccupancyGrid, groups: &[BoundaryGroup]) -> BTreeMap<Cell, BruteRecord> {
    let mut out = BTreeMap::new();
    if groups.is_empty() {
        return out;
    }
    for y in 0..grid.height() as i32 {
        for x in 0..grid.width() as i32 {
            let p = Cell::new(x, y);
            if grid.is_obstacle(p) {
                continue;
            }
            let per_group: Vec<(GroupId, i64)> = groups
                .iter()
                .map(|g| (g.id, g.points.iter().map(|q| p.dist_sq(*q)).min().unwrap()))
                .collect();
            let d1 = per_group.iter().map(|e| e.1).min().unwrap();
            let g1 = per_group
                .iter()
                .filter(|e| e.1 == d1)
                .map(|e| e.0)
                .min()
                .unwrap();
            let others: Vec<&(GroupId, i64)> = per_group.iter().filter(|e| e.0 != g1).collect();
            let d2 = others.iter().map(|e| e.1).min();
            let (g2, g2_unique) = match d2 {
                Some(d) => {
                    let at: Vec<GroupId> =
                        others.iter().filter(|e| e.1 == d).map(|e| e.0).collect();
                    (Some(at[0]), at.len() == 1)
                }
                None => (None, false),
            };
            out.insert(
                p,
                BruteRecord {
                    d1,
                    g1,
                    d2,
                    g2,
                    g2_unique,
                },
            );
        }
    }
    out
}

/// Cells qualifying as GVD candidates by definition.
pub fn brute_candidate_cells(field: &BTreeMap<Cell, BruteRecord>, tie_eps: f64) -> Vec<Cell> {
    field
        .iter()
        .filter(|(_, r)| {
            r.d2.is_some_and(|d2| (d2 as f64).sqrt() - (r.d1 as f64).sqrt() <= tie_eps)
        })
        .map(|(c, _)| *c)
        .collect()
}

/// Seeded random map: a few rectangles and discs plus salt noise.
pub fn random_grid(seed: u64, max_side: usize) -> OccupancyGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.random_range(8..=max_side);
    let h = rng.random_range(8..=max_side);
    let mut g = OccupancyGrid::new(w, h, 1.0).unwrap();
    for _ in 0..rng.random_range(1..6) {
        let x0 = rng.random_range(0..w as i32);
        let y0 = rng.random_range(0..h as i32);
        let x1 = x0 + rng.random_range(0..8);
        let y1 = y0 + rng.random_range(0..8);
        g.fill_rect(x0, y0, x1, y1);
    }
    for _ in 0..rng.random_range(0..4) {
        let cx = rng.random_range(0.0..w as f64);
        let cy = rng.random_range(0.0..h as f64);
        let r = rng.random_range(0.5..5.0);
        paint_disc(&mut g, Vec2::new(cx, cy), r);
    }
    let noise = rng.random_range(0.0..0.03);
    for c in g.clone().iter_cells() {
        if rng.random_bool(noise) {
            g.set(c, true);
        }
    }
    g
}

/// Marks cells whose centers (world coordinates) fall inside the disc.
pub fn paint_disc(g: &mut OccupancyGrid, center: Vec2, radius: f64) {
    for c in g.clone().iter_cells() {
        if g.cell_center(c).distance(center) <= radius {
            g.set(c, true);
        }
    }
}

/// Distance from the origin to a line-of-sight blocker, by dense sampling.
pub fn sampled_segment_blocked(grid: &OccupancyGrid, a: Vec2, b: Vec2) -> bool {
    let steps = 4000;
    (1..=steps).any(|k| {
        let p = a + (b - a) * (k as f64 / steps as f64);
        grid.world_to_cell(p).is_some_and(|c| grid.is_obstacle(c))
    })
}

pub mod fixtures;
pub mod sim;
