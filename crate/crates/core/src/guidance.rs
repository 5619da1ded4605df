//! Guidance points: midpoints of the closest gaps between obstacle groups.
//!
//! The pipeline is boundary extraction → labeled distance field →
//! candidates on the discrete generalized Voronoi diagram → one cost-minimal
//! point per group pair → pose filtering → triangle pruning.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::geom::{Pose, Vec2};
use crate::grid::{
    distance_transform, extract_boundaries, BoundaryGroup, Cell, DistanceField, GroupId,
    OccupancyGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GuidanceParams {
    /// Largest `d2 - d1` (cells) at which a free cell counts as equidistant.
    pub tie_eps: f64,
    /// Largest allowed triangle angle, degrees.
    pub theta_max_deg: f64,
    /// A triangle is near-degenerate when its two shorter edges sum to at
    /// most `lambda` times the longest.
    pub lambda: f64,
}

impl Default for GuidanceParams {
    fn default() -> Self {
        Self {
            tie_eps: 1.0,
            theta_max_deg: 150.0,
            lambda: 1.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidatePoint {
    /// Midpoint of the two anchors, world meters.
    pub position: Vec2,
    /// The free cell the candidate was generated from.
    pub source: Cell,
    pub anchor_i: Cell,
    pub anchor_j: Cell,
    pub group_i: GroupId,
    pub group_j: GroupId,
    /// `|p' - f_i| + |p' - f_j|` in meters.
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidancePoint {
    pub position: Vec2,
    /// Always `group_i < group_j`.
    pub group_i: GroupId,
    pub group_j: GroupId,
    pub anchor_i: Cell,
    pub anchor_j: Cell,
    /// Distance between the anchors, meters.
    pub gap_width: f64,
}

impl GuidancePoint {
    pub fn pair(&self) -> (GroupId, GroupId) {
        (self.group_i, self.group_j)
    }

    fn anchor_for(&self, group: GroupId) -> Cell {
        if group == self.group_i {
            self.anchor_i
        } else {
            self.anchor_j
        }
    }
}

/// Free cells that are (within `tie_eps` cells) equidistant to two groups.
pub fn candidate_points(field: &DistanceField, tie_eps: f64) -> Vec<CandidatePoint> {
    if field.group_count() < 2 {
        return Vec::new();
    }
    field
        .iter()
        .filter_map(|(cell, rec)| {
            let second = rec.second?;
            if second.distance() - rec.nearest.distance() > tie_eps {
                return None;
            }
            let fi = field.cell_center(rec.nearest.point);
            let fj = field.cell_center(second.point);
            let position = (fi + fj) * 0.5;
            Some(CandidatePoint {
                position,
                source: cell,
                anchor_i: rec.nearest.point,
                anchor_j: second.point,
                group_i: rec.nearest.group,
                group_j: second.group,
                cost: position.distance(fi) + position.distance(fj),
            })
        })
        .collect()
}

/// Keeps the cheapest candidate of every unordered group pair, sorted by pair.
pub fn select_guidance(candidates: &[CandidatePoint], resolution: f64) -> Vec<GuidancePoint> {
    let mut best: BTreeMap<(GroupId, GroupId), &CandidatePoint> = BTreeMap::new();
    for c in candidates {
        let key = if c.group_i < c.group_j {
            (c.group_i, c.group_j)
        } else {
            (c.group_j, c.group_i)
        };
        let better = match best.get(&key) {
            None => true,
            Some(b) => {
                c.cost < b.cost
                    || (c.cost == b.cost
                        && (c.position.x, c.position.y) < (b.position.x, b.position.y))
            }
        };
        if better {
            best.insert(key, c);
        }
    }
    best.into_iter()
        .map(|((gi, gj), c)| {
            let (ai, aj) = if c.group_i == gi {
                (c.anchor_i, c.anchor_j)
            } else {
                (c.anchor_j, c.anchor_i)
            };
            GuidancePoint {
                position: c.position,
                group_i: gi,
                group_j: gj,
                anchor_i: ai,
                anchor_j: aj,
                gap_width: (ai.dist_sq(aj) as f64).sqrt() * resolution,
            }
        })
        .collect()
}

/// Drops points behind the robot (negative forward coordinate) or hidden
/// behind an obstacle cell along the straight line of sight.
pub fn filter_pose(
    points: &[GuidancePoint],
    pose: Pose,
    grid: &OccupancyGrid,
) -> Vec<GuidancePoint> {
    points
        .iter()
        .filter(|g| pose.to_local(g.position).x >= 0.0)
        .filter(|g| !grid.segment_hits_obstacle(pose.position(), g.position, true))
        .copied()
        .collect()
}

/// Largest interior angle of a triangle, degrees; 180 when degenerate.
pub fn largest_angle_deg(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let angle_at = |p: Vec2, q: Vec2, r: Vec2| {
        let (u, v) = (q - p, r - p);
        let denom = u.norm() * v.norm();
        if denom == 0.0 {
            return 180.0;
        }
        (u.dot(v) / denom).clamp(-1.0, 1.0).acos().to_degrees()
    };
    angle_at(a, b, c)
        .max(angle_at(b, c, a))
        .max(angle_at(c, a, b))
}

fn nearest_position(group: &BoundaryGroup, c: Cell) -> usize {
    group.position_of(c).unwrap_or_else(|| {
        (0..group.len())
            .min_by_key(|&k| group.points[k].dist_sq(c))
            .unwrap_or(0)
    })
}

/// Edge length of the triangle edge carried by `g` (between groups `a` and
/// `b`, with third group `c`): half the arc on `a` between the anchors of
/// `g` and `g_ac`, the gap itself, and half the arc on `b` between the
/// anchors of `g` and `g_bc`. Meters.
pub fn triangle_edge(
    g: &GuidancePoint,
    g_ac: &GuidancePoint,
    g_bc: &GuidancePoint,
    group_a: &BoundaryGroup,
    group_b: &BoundaryGroup,
    resolution: f64,
) -> f64 {
    let arc = |grp: &BoundaryGroup, p: &GuidancePoint, q: &GuidancePoint| {
        let i = nearest_position(grp, p.anchor_for(grp.id));
        let j = nearest_position(grp, q.anchor_for(grp.id));
        grp.arc_length(i, j) * resolution
    };
    arc(group_a, g, g_ac) / 2.0 + g.gap_width + arc(group_b, g, g_bc) / 2.0
}

/// Removes the longest-edge point of every degenerate or obtuse group
/// triangle.
///
/// Triples `i < j < k` with all three pair points still present are
/// visited in ascending order and removals take effect immediately.
pub fn prune_triangles(
    points: &[GuidancePoint],
    groups: &[BoundaryGroup],
    resolution: f64,
    theta_max_deg: f64,
    lambda: f64,
) -> Vec<GuidancePoint> {
    let by_id: BTreeMap<GroupId, &BoundaryGroup> = groups.iter().map(|g| (g.id, g)).collect();
    let mut alive: BTreeMap<(GroupId, GroupId), GuidancePoint> =
        points.iter().map(|g| (g.pair(), *g)).collect();
    let ids: BTreeSet<GroupId> = points.iter().flat_map(|g| [g.group_i, g.group_j]).collect();
    let ids: Vec<GroupId> = ids.into_iter().collect();

    for (a, &i) in ids.iter().enumerate() {
        for (b, &j) in ids.iter().enumerate().skip(a + 1) {
            for &k in ids.iter().skip(b + 1) {
                let (Some(gij), Some(gik), Some(gjk)) =
                    (alive.get(&(i, j)), alive.get(&(i, k)), alive.get(&(j, k)))
                else {
                    continue;
                };
                let (Some(bi), Some(bj), Some(bk)) = (by_id.get(&i), by_id.get(&j), by_id.get(&k))
                else {
                    continue;
                };
                let edges = [
                    ((i, j), triangle_edge(gij, gik, gjk, bi, bj, resolution)),
                    ((i, k), triangle_edge(gik, gij, gjk, bi, bk, resolution)),
                    ((j, k), triangle_edge(gjk, gij, gik, bj, bk, resolution)),
                ];
                let mut sorted = edges.map(|e| e.1);
                sorted.sort_by(f64::total_cmp);
                let degenerate = sorted[0] + sorted[1] <= lambda * sorted[2];
                let obtuse =
                    largest_angle_deg(gij.position, gik.position, gjk.position) > theta_max_deg;
                if degenerate || obtuse {
                    let longest = edges
                        .iter()
                        .fold(edges[0], |acc, e| if e.1 > acc.1 { *e } else { acc });
                    alive.remove(&longest.0);
                }
            }
        }
    }
    points
        .iter()
        .filter(|g| alive.contains_key(&g.pair()))
        .copied()
        .collect()
}

/// Full extraction: boundaries, distance field, candidates, selection, pose
/// filtering and triangle pruning. Deterministic for fixed inputs.
pub fn extract_guidance(
    grid: &OccupancyGrid,
    pose: Pose,
    params: &GuidanceParams,
) -> Vec<GuidancePoint> {
    let groups = extract_boundaries(grid);
    if groups.len() < 2 {
        return Vec::new();
    }
    let field = distance_transform(grid, &groups);
    let candidates = candidate_points(&field, params.tie_eps);
    let selected = select_guidance(&candidates, grid.resolution());
    let visible = filter_pose(&selected, pose, grid);
    prune_triangles(
        &visible,
        &groups,
        grid.resolution(),
        params.theta_max_deg,
        params.lambda,
    )
}
