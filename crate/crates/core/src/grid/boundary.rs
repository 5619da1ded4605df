//! Boundary cells and their grouping into clockwise chains.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{erode, Cell, OccupancyGrid, CLOCKWISE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupId(pub u32);

/// One 8-connected component of boundary cells, in traversal order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGroup {
    pub id: GroupId,
    pub points: Vec<Cell>,
    /// The order is a cycle: every step, including last → first, moves to an
    /// 8-neighbor.
    pub closed: bool,
}

impl BoundaryGroup {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every consecutive pair is 8-adjacent (the group is a single chain
    /// rather than a branching set visited with backtracking jumps).
    pub fn is_chain(&self) -> bool {
        self.points.windows(2).all(|w| w[0].chebyshev(w[1]) == 1)
    }

    pub fn position_of(&self, c: Cell) -> Option<usize> {
        self.points.iter().position(|&p| p == c)
    }

    /// Length in cells of the step from `points[i]` to `points[i + 1]`
    /// (wrapping when closed). Backtracking jumps count their Euclidean span.
    fn step_len(&self, i: usize) -> f64 {
        let a = self.points[i];
        let b = self.points[(i + 1) % self.points.len()];
        (a.dist_sq(b) as f64).sqrt()
    }

    /// Arc length in cells between chain positions `i` and `j`.
    ///
    /// Closed chains take the shorter way around; open chains measure along
    /// the order.
    pub fn arc_length(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (i.min(j), i.max(j));
        let forward: f64 = (lo..hi).map(|k| self.step_len(k)).sum();
        if !self.closed {
            return forward;
        }
        let total: f64 = (0..self.points.len()).map(|k| self.step_len(k)).sum();
        forward.min(total - forward)
    }
}

/// Extracts boundary cells (occupied in the grid, free after one erosion)
/// and groups them into 8-connected chains.
///
/// Groups are numbered in row-major order of their smallest cell. Each chain
/// starts at that cell and walks clockwise around the obstacle (world frame,
/// y up), keeping free space on its left: at every step the first unvisited
/// neighbor is taken, orthogonal moves before diagonal ones and left turns
/// before right turns. When the
/// walk dead-ends it resumes from the most recent cell that still has an
/// unvisited neighbor, so every cell appears exactly once.
pub fn extract_boundaries(grid: &OccupancyGrid) -> Vec<BoundaryGroup> {
    let eroded = erode(grid);
    let is_boundary: Vec<bool> = grid
        .cells()
        .iter()
        .zip(eroded.cells())
        .map(|(&m, &e)| m == 1 && e == 0)
        .collect();
    let boundary = |c: Cell| grid.in_bounds(c) && is_boundary[grid.index(c)];

    let mut component = vec![u32::MAX; is_boundary.len()];
    let mut groups = Vec::new();
    for start_idx in 0..is_boundary.len() {
        if !is_boundary[start_idx] || component[start_idx] != u32::MAX {
            continue;
        }
        let id = groups.len() as u32;
        // label the component first so the ordered walk stays inside it
        let start = grid.cell_at(start_idx);
        let mut queue = VecDeque::from([start]);
        component[start_idx] = id;
        let mut size = 1;
        while let Some(c) = queue.pop_front() {
            for &(dx, dy) in &CLOCKWISE {
                let n = c.offset(dx, dy);
                if boundary(n) && component[grid.index(n)] == u32::MAX {
                    component[grid.index(n)] = id;
                    size += 1;
                    queue.push_back(n);
                }
            }
        }
        let points = order_chain(grid, start, size, |c| {
            boundary(c) && component[grid.index(c)] == id
        });
        let closed = points.len() >= 3
            && points[0].chebyshev(points[points.len() - 1]) == 1
            && points.windows(2).all(|w| w[0].chebyshev(w[1]) == 1);
        groups.push(BoundaryGroup {
            id: GroupId(id),
            points,
            closed,
        });
    }
    groups
}

fn direction_index(dx: i32, dy: i32) -> usize {
    CLOCKWISE
        .iter()
        .position(|&d| d == (dx, dy))
        .expect("unit step")
}

/// Turn offsets (in CLOCKWISE steps) tried from the current heading:
/// orthogonal moves first (left, straight, right, back), then diagonals
/// (front-left, front-right, back-right, back-left). Trying orthogonal moves
/// first picks up the inner corner cells that one-step erosion leaves on
/// diagonal stretches, which a diagonal shortcut would skip.
const SCAN: [usize; 8] = [6, 0, 2, 4, 7, 1, 3, 5];

fn order_chain(
    grid: &OccupancyGrid,
    start: Cell,
    size: usize,
    member: impl Fn(Cell) -> bool,
) -> Vec<Cell> {
    let mut visited = vec![false; grid.width() * grid.height()];
    let mut order = Vec::with_capacity(size);
    // (cell, heading index it was entered with)
    let mut stack: Vec<(Cell, usize)> = Vec::new();
    // The start is the lowest-then-leftmost cell; a clockwise walk arrives
    // there heading west.
    let west = direction_index(-1, 0);
    visited[grid.index(start)] = true;
    order.push(start);
    stack.push((start, west));

    while let Some(&(cur, heading)) = stack.last() {
        let next = SCAN
            .iter()
            .map(|k| (heading + k) % 8)
            .map(|d| (d, cur.offset(CLOCKWISE[d].0, CLOCKWISE[d].1)))
            .find(|&(_, n)| member(n) && !visited[grid.index(n)]);
        match next {
            Some((d, n)) => {
                visited[grid.index(n)] = true;
                order.push(n);
                stack.push((n, d));
            }
            None => {
                stack.pop();
            }
        }
    }
    debug_assert_eq!(order.len(), size);
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{signed_area, Vec2};

    fn grid_with(w: usize, h: usize, rects: &[(i32, i32, i32, i32)]) -> OccupancyGrid {
        let mut g = OccupancyGrid::new(w, h, 1.0).unwrap();
        for &(x0, y0, x1, y1) in rects {
            g.fill_rect(x0, y0, x1, y1);
        }
        g
    }

    fn area(group: &BoundaryGroup) -> f64 {
        let pts: Vec<Vec2> = group
            .points
            .iter()
            .map(|c| Vec2::new(c.x as f64, c.y as f64))
            .collect();
        signed_area(&pts)
    }

    #[test]
    fn empty_grid_has_no_groups() {
        assert!(extract_boundaries(&grid_with(6, 6, &[])).is_empty());
    }

    #[test]
    fn solid_block_ring_is_clockwise() {
        let groups = extract_boundaries(&grid_with(7, 7, &[(2, 2, 4, 4)]));
        assert_eq!(groups.len(), 1);
        let g = &groups[0];
        assert_eq!(g.len(), 8);
        assert_eq!(g.points[0], Cell::new(2, 2));
        assert!(g.closed);
        assert!(g.is_chain());
        assert!(area(g) < 0.0, "area {}", area(g));
        assert_eq!(
            g.points,
            vec![
                Cell::new(2, 2),
                Cell::new(2, 3),
                Cell::new(2, 4),
                Cell::new(3, 4),
                Cell::new(4, 4),
                Cell::new(4, 3),
                Cell::new(4, 2),
                Cell::new(3, 2),
            ]
        );
    }

    #[test]
    fn separated_blocks_give_two_groups() {
        let groups = extract_boundaries(&grid_with(16, 8, &[(1, 1, 4, 5), (8, 2, 12, 6)]));
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].id, GroupId(0));
        assert_eq!(groups[0].points[0], Cell::new(1, 1));
        for g in &groups {
            assert!(g.closed && g.is_chain());
            assert!(area(g) < 0.0);
        }
    }

    #[test]
    fn thin_line_is_open_chain() {
        let groups = extract_boundaries(&grid_with(10, 5, &[(2, 2, 7, 2)]));
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].len(), 6);
        assert!(groups[0].is_chain());
        assert!(!groups[0].closed);
        assert_eq!(groups[0].arc_length(0, 5), 5.0);
    }

    #[test]
    fn arc_length_takes_shorter_way_on_rings() {
        let groups = extract_boundaries(&grid_with(12, 12, &[(2, 2, 7, 7)]));
        let g = &groups[0];
        assert_eq!(g.len(), 20);
        // neighbours either way
        assert_eq!(g.arc_length(0, 1), 1.0);
        assert_eq!(g.arc_length(0, 19), 1.0);
        assert_eq!(g.arc_length(0, 10), 10.0);
    }

    #[test]
    fn disc_boundary_is_clockwise_chain() {
        let mut g = OccupancyGrid::new(30, 30, 1.0).unwrap();
        for c in g.clone().iter_cells() {
            let d = ((c.x - 15) as f64).hypot((c.y - 14) as f64);
            if d <= 6.3 {
                g.set(c, true);
            }
        }
        let groups = extract_boundaries(&g);
        assert_eq!(groups.len(), 1);
        assert!(groups[0].closed && groups[0].is_chain());
        assert!(area(&groups[0]) < 0.0);
    }

    #[test]
    fn convex_shapes_trace_as_clockwise_cycles() {
        // below r = 3 digital discs grow one-cell spikes and no simple cycle exists
        for tenths in (30..130).step_by(3) {
            let r = tenths as f64 / 10.0;
            let mut g = OccupancyGrid::new(32, 32, 1.0).unwrap();
            for c in g.clone().iter_cells() {
                if ((c.x as f64 - 15.3).hypot(c.y as f64 - 16.1)) <= r {
                    g.set(c, true);
                }
            }
            let groups = extract_boundaries(&g);
            assert_eq!(groups.len(), 1, "r = {r}");
            assert!(groups[0].closed && groups[0].is_chain(), "r = {r}");
            assert!(area(&groups[0]) < 0.0, "r = {r}");
        }
        for (w, h) in [(3, 3), (3, 9), (10, 4), (7, 7)] {
            let groups = extract_boundaries(&grid_with(14, 14, &[(2, 2, 1 + w, 1 + h)]));
            assert!(groups[0].closed && groups[0].is_chain());
            assert_eq!(groups[0].len() as i32, 2 * (w + h) - 4);
        }
    }

    proptest::proptest! {
        #[test]
        fn groups_partition_the_boundary(
            w in 1usize..14, h in 1usize..14, bits in proptest::collection::vec(0u8..2, 196)
        ) {
            let g = OccupancyGrid::from_cells(w, h, 1.0, bits[..w * h].to_vec()).unwrap();
            let e = erode(&g);
            let groups = extract_boundaries(&g);
            let mut seen = std::collections::HashSet::new();
            for grp in &groups {
                for &c in &grp.points {
                    proptest::prop_assert!(seen.insert(c), "cell {:?} in two groups", c);
                }
            }
            let expected: usize = g.cells().iter().zip(e.cells()).filter(|(m, e)| **m == 1 && **e == 0).count();
            proptest::prop_assert_eq!(seen.len(), expected);
            for c in &seen {
                proptest::prop_assert!(g.is_obstacle(*c) && !e.is_obstacle(*c));
            }
            // groups are maximal: no two groups touch
            for a in &groups {
                for b in &groups {
                    if a.id < b.id {
                        for p in &a.points {
                            for q in &b.points {
                                proptest::prop_assert!(p.chebyshev(*q) > 1);
                            }
                        }
                    }
                }
            }
        }
    }
}
