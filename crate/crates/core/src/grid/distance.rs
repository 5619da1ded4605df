//! Exact Euclidean nearest-boundary field with per-group labels.
//!
//! For each group the nearest feature of that group is found with the
//! separable lower-envelope transform (a column pass, then a row pass over
//! parabolas), carried out in integer arithmetic so squared distances are
//! exact. A per-cell merge then keeps the best and the best *other-group*
//! feature.

use serde::{Deserialize, Serialize};

use super::{BoundaryGroup, Cell, GroupId, OccupancyGrid};
use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nearest {
    pub point: Cell,
    pub group: GroupId,
    /// Squared distance in cells², exact.
    pub dist_sq: i64,
}

impl Nearest {
    /// Distance in cell units.
    pub fn distance(&self) -> f64 {
        (self.dist_sq as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub nearest: Nearest,
    /// Nearest boundary point belonging to a group other than `nearest.group`.
    pub second: Option<Nearest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Vec2,
    group_count: usize,
    records: Vec<Option<FieldRecord>>,
}

impl DistanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    pub fn cell_center(&self, c: Cell) -> Vec2 {
        self.origin + Vec2::new(c.x as f64, c.y as f64) * self.resolution
    }

    /// Record for a free cell; `None` for obstacle cells, out-of-range cells,
    /// or when the grid has no boundary at all.
    pub fn get(&self, c: Cell) -> Option<&FieldRecord> {
        if c.x < 0 || c.y < 0 || c.x as usize >= self.width || c.y as usize >= self.height {
            return None;
        }
        self.records[c.y as usize * self.width + c.x as usize].as_ref()
    }

    /// Free cells with a record, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (Cell, &FieldRecord)> + '_ {
        self.records.iter().enumerate().filter_map(move |(i, r)| {
            r.as_ref().map(|r| {
                (
                    Cell::new((i % self.width) as i32, (i / self.width) as i32),
                    r,
                )
            })
        })
    }
}

const NONE: i64 = i64::MAX;

/// Rational `num / den` with `den > 0`, or -∞.
#[derive(Clone, Copy)]
enum Breakpoint {
    NegInf,
    At(i64, i64),
}

impl Breakpoint {
    /// `self <= other`
    fn le(self, other: Breakpoint) -> bool {
        match (self, other) {
            (Breakpoint::NegInf, _) => true,
            (_, Breakpoint::NegInf) => false,
            (Breakpoint::At(a, b), Breakpoint::At(c, d)) => {
                a as i128 * d as i128 <= c as i128 * b as i128
            }
        }
    }

    /// `self < x` for an integer abscissa.
    fn lt_int(self, x: i64) -> bool {
        match self {
            Breakpoint::NegInf => true,
            Breakpoint::At(n, d) => (n as i128) < x as i128 * d as i128,
        }
    }
}

/// Scratch buffers for one group's transform.
struct Separable {
    width: usize,
    height: usize,
    /// Nearest feature row in the same column, or `NONE`.
    col_row: Vec<i64>,
    /// Result: squared distance and feature cell per cell.
    dist_sq: Vec<i64>,
    feature: Vec<Cell>,
    hull_v: Vec<i64>,
    hull_z: Vec<Breakpoint>,
}

impl Separable {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            col_row: vec![NONE; width * height],
            dist_sq: vec![NONE; width * height],
            feature: vec![Cell::new(0, 0); width * height],
            hull_v: Vec::with_capacity(width),
            hull_z: Vec::with_capacity(width + 1),
        }
    }

    fn run(&mut self, features: &[Cell]) {
        let (w, h) = (self.width, self.height);
        self.col_row.fill(NONE);
        self.dist_sq.fill(NONE);
        for c in features {
            self.col_row[c.y as usize * w + c.x as usize] = c.y as i64;
        }
        // column pass: nearest feature row, ties to the lower row
        for x in 0..w {
            let mut last = NONE;
            for y in 0..h {
                let i = y * w + x;
                if self.col_row[i] != NONE {
                    last = y as i64;
                }
                self.col_row[i] = last;
            }
            let mut next = NONE;
            for y in (0..h).rev() {
                let i = y * w + x;
                let here = self.col_row[i];
                if here == y as i64 {
                    next = y as i64;
                }
                if next != NONE && (here == NONE || next - (y as i64) < (y as i64) - here) {
                    self.col_row[i] = next;
                }
            }
        }
        // row pass: lower envelope of parabolas (x - q)² + f(q)
        for y in 0..h {
            let f = |q: usize, col_row: &[i64]| -> i64 {
                let r = col_row[y * w + q];
                if r == NONE {
                    NONE
                } else {
                    (r - y as i64) * (r - y as i64)
                }
            };
            self.hull_v.clear();
            self.hull_z.clear();
            for q in 0..w {
                let fq = f(q, &self.col_row);
                if fq == NONE {
                    continue;
                }
                let q = q as i64;
                let mut s = Breakpoint::NegInf;
                while let Some(&v) = self.hull_v.last() {
                    let fv = f(v as usize, &self.col_row);
                    let num = (fq + q * q) - (fv + v * v);
                    let den = 2 * (q - v);
                    let cand = Breakpoint::At(num, den);
                    let z = *self.hull_z.last().expect("hull_z tracks hull_v");
                    if cand.le(z) {
                        self.hull_v.pop();
                        self.hull_z.pop();
                    } else {
                        s = cand;
                        break;
                    }
                }
                self.hull_v.push(q);
                self.hull_z.push(s);
            }
            if self.hull_v.is_empty() {
                continue;
            }
            let mut k = 0;
            for x in 0..w as i64 {
                while k + 1 < self.hull_v.len() && self.hull_z[k + 1].lt_int(x) {
                    k += 1;
                }
                let v = self.hull_v[k];
                let i = y * w + x as usize;
                let fy = self.col_row[y * w + v as usize];
                self.dist_sq[i] = (x - v) * (x - v) + (fy - y as i64) * (fy - y as i64);
                self.feature[i] = Cell::new(v as i32, fy as i32);
            }
        }
    }
}

/// Labeled exact Euclidean distance field over the free cells of `grid`.
///
/// Distances are in cell units. Ties between groups go to the smaller id.
pub fn distance_transform(grid: &OccupancyGrid, groups: &[BoundaryGroup]) -> DistanceField {
    let (w, h) = (grid.width(), grid.height());
    let mut best: Vec<Option<Nearest>> = vec![None; w * h];
    let mut second: Vec<Option<Nearest>> = vec![None; w * h];
    let mut sep = Separable::new(w, h);
    let mut sorted: Vec<&BoundaryGroup> = groups.iter().filter(|g| !g.is_empty()).collect();
    sorted.sort_by_key(|g| g.id);

    for group in sorted.iter().copied() {
        sep.run(&group.points);
        for i in 0..w * h {
            if grid.cells()[i] == 1 || sep.dist_sq[i] == NONE {
                continue;
            }
            let cand = Nearest {
                point: sep.feature[i],
                group: group.id,
                dist_sq: sep.dist_sq[i],
            };
            match best[i] {
                Some(b) if b.dist_sq <= cand.dist_sq => {
                    if second[i].is_none_or(|s| cand.dist_sq < s.dist_sq) {
                        second[i] = Some(cand);
                    }
                }
                prev => {
                    second[i] = prev;
                    best[i] = Some(cand);
                }
            }
        }
    }

    let records = best
        .into_iter()
        .zip(second)
        .map(|(b, s)| b.map(|nearest| FieldRecord { nearest, second: s }))
        .collect();
    DistanceField {
        width: w,
        height: h,
        resolution: grid.resolution(),
        origin: grid.origin(),
        group_count: sorted.len(),
        records,
    }
}
