//! Seeded scenario generation from editable JSON templates.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::robot::RobotState;
use super::world::{Obstacle, Pedestrian, World};
use crate::geom::{Aabb, Pose, Vec2};

/// Restarts allowed before a template/seed pair is declared unsatisfiable.
pub const MAX_ATTEMPTS: u32 = 200;

const BUILTIN: [(&str, &str); 8] = [
    ("a", include_str!("../../scenarios/a.json")),
    ("b", include_str!("../../scenarios/b.json")),
    ("c", include_str!("../../scenarios/c.json")),
    ("d", include_str!("../../scenarios/d.json")),
    ("e", include_str!("../../scenarios/e.json")),
    ("f", include_str!("../../scenarios/f.json")),
    ("g", include_str!("../../scenarios/g.json")),
    ("h", include_str!("../../scenarios/h.json")),
];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("template `{template}`, seed {seed}: could not satisfy {constraint} after {attempts} attempts")]
    Unsatisfiable {
        template: String,
        seed: u64,
        constraint: &'static str,
        attempts: u32,
    },
    #[error("template `{name}`: {message}")]
    Invalid { name: String, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ShapeSpec {
    Rect { size: [f64; 2] },
    Circle { radius: f64 },
}

impl ShapeSpec {
    fn scaled(self, s: f64) -> Self {
        match self {
            ShapeSpec::Rect { size } => ShapeSpec::Rect {
                size: [size[0] * s, size[1] * s],
            },
            ShapeSpec::Circle { radius } => ShapeSpec::Circle { radius: radius * s },
        }
    }

    fn half(self) -> Vec2 {
        match self {
            ShapeSpec::Rect { size } => Vec2::new(size[0] / 2.0, size[1] / 2.0),
            ShapeSpec::Circle { radius } => Vec2::new(radius, radius),
        }
    }

    fn place(self, at: Vec2) -> Obstacle {
        match self {
            ShapeSpec::Rect { size } => Obstacle::rect(at, Vec2::new(size[0], size[1])),
            ShapeSpec::Circle { radius } => Obstacle::circle(at, radius),
        }
    }
}

/// Nominal obstacle: position and unscaled shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub x: f64,
    pub y: f64,
    #[serde(flatten)]
    pub shape: ShapeSpec,
}

/// Pedestrians crossing the hall laterally at random stations along it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PedestrianSpec {
    pub count: usize,
    pub speed: [f64; 2],
    pub radius: f64,
    /// Range of stations along the long axis.
    pub span: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layout {
    /// Walled hall along +x without end walls. Obstacle lateral positions
    /// are drawn uniformly from the free width; the nominal `y` is unused.
    Corridor {
        length: f64,
        width: [f64; 2],
        wall: f64,
        margin: f64,
        min_passage: f64,
        end_clearance: f64,
    },
    /// Closed room centered on the origin, long axis x. Obstacles shift along
    /// x by up to `shift`; the robot starts at one of the four side midpoints
    /// and the goal is the center.
    Lobby {
        size: [f64; 2],
        wall: f64,
        margin: f64,
        shift: f64,
        start_inset: f64,
        start_clearance: f64,
        goal_clearance: f64,
    },
    /// Fixed-width hall whose obstacles move laterally by up to `shift`.
    Maze {
        length: f64,
        width: f64,
        wall: f64,
        margin: f64,
        shift: f64,
        min_passage: f64,
        end_clearance: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub layout: Layout,
    /// Uniform per-obstacle scale range.
    pub scale: [f64; 2],
    pub obstacles: Vec<ObstacleSpec>,
    #[serde(default)]
    pub pedestrians: Option<PedestrianSpec>,
}

impl Template {
    pub fn is_dynamic(&self) -> bool {
        self.pedestrians.is_some_and(|p| p.count > 0)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: &str| {
            Err(ScenarioError::Invalid {
                name: self.name.clone(),
                message: m.to_string(),
            })
        };
        if !(self.scale[0] > 0.0 && self.scale[0] <= self.scale[1]) {
            return bad("scale range must be positive and ordered");
        }
        if let Some(p) = self.pedestrians {
            if !(p.speed[0] > 0.0 && p.speed[0] <= p.speed[1] && p.radius > 0.0) {
                return bad("pedestrian speed range or radius invalid");
            }
        }
        if let Layout::Corridor { width, .. } = self.layout {
            if !(width[0] > 0.0 && width[0] <= width[1]) {
                return bad("corridor width range must be positive and ordered");
            }
        }
        Ok(())
    }
}

/// Templates by name; the built-in set mirrors the eight evaluation scenes.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    templates: BTreeMap<String, Template>,
}

impl Catalog {
    pub fn builtin() -> Self {
        let templates = BUILTIN
            .iter()
            .map(|(name, text)| {
                let t: Template = serde_json::from_str(text).expect("built-in template parses");
                (name.to_string(), t)
            })
            .collect();
        Self { templates }
    }

    /// Built-ins overridden (or extended) by every `*.json` in `dir`.
    pub fn with_overrides(dir: &Path) -> Result<Self, ScenarioError> {
        let mut cat = Self::builtin();
        let io = |e| ScenarioError::Io {
            path: dir.display().to_string(),
            source: e,
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(|e| ScenarioError::Io {
                path: p.display().to_string(),
                source: e,
            })?;
            let t: Template = serde_json::from_str(&text).map_err(|e| ScenarioError::Invalid {
                name: p.display().to_string(),
                message: e.to_string(),
            })?;
            t.validate()?;
            cat.templates.insert(t.name.clone(), t);
        }
        Ok(cat)
    }

    pub fn get(&self, name: &str) -> Result<&Template, ScenarioError> {
        self.templates
            .get(name)
            .ok_or_else(|| ScenarioError::UnknownTemplate(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }
}

impl Default for Catalog {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Every randomized quantity behind a generated world, for auditing.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub corridor_width: Option<f64>,
    pub scales: Vec<f64>,
    /// Lateral offsets from the nominal position (maze) or absolute lateral
    /// positions (corridor).
    pub lateral: Vec<f64>,
    /// Long-axis shifts (lobby).
    pub shifts: Vec<f64>,
    pub pedestrian_speeds: Vec<f64>,
    /// Lobby start side: 0 west, 1 east, 2 south, 3 north.
    pub start_side: Option<usize>,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub template: String,
    pub seed: u64,
    pub world: World,
    pub params: ScenarioParams,
}

fn overlaps(a: &Aabb, b: &Aabb, margin: f64) -> bool {
    a.inflate(margin).intersects(b)
}

/// Widest free lateral interval over every slice of the hall, where slices
/// are cut at obstacle x-extents.
fn narrowest_passage(obstacles: &[Obstacle], y_lo: f64, y_hi: f64) -> f64 {
    let boxes: Vec<Aabb> = obstacles.iter().map(|o| o.bounds()).collect();
    let mut xs: Vec<f64> = boxes.iter().flat_map(|b| [b.min.x, b.max.x]).collect();
    xs.sort_by(f64::total_cmp);
    let mut worst = y_hi - y_lo;
    for w in xs.windows(2) {
        let xm = 0.5 * (w[0] + w[1]);
        let mut spans: Vec<(f64, f64)> = boxes
            .iter()
            .filter(|b| b.min.x <= xm && xm <= b.max.x)
            .map(|b| (b.min.y, b.max.y))
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cursor = y_lo;
        let mut best: f64 = 0.0;
        for (lo, hi) in spans {
            best = best.max(lo - cursor);
            cursor = cursor.max(hi);
        }
        best = best.max(y_hi - cursor);
        worst = worst.min(best);
    }
    worst
}

fn walls(length: f64, half_w: f64, wall: f64) -> [Obstacle; 2] {
    [
        Obstacle::Rect {
            min: Vec2::new(0.0, half_w),
            max: Vec2::new(length, half_w + wall),
        },
        Obstacle::Rect {
            min: Vec2::new(0.0, -half_w - wall),
            max: Vec2::new(length, -half_w),
        },
    ]
}

fn crossers(
    spec: &PedestrianSpec,
    obstacles: &[Obstacle],
    half_w: f64,
    first_id: u32,
    rng: &mut ChaCha8Rng,
    params: &mut ScenarioParams,
) -> Option<Vec<Pedestrian>> {
    let mut out = Vec::new();
    for k in 0..spec.count {
        let speed = rng.random_range(spec.speed[0]..=spec.speed[1]);
        let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let y_lim = half_w - spec.radius;
        let y = rng.random_range(-y_lim..=y_lim);
        let mut station = None;
        for _ in 0..50 {
            let x = rng.random_range(spec.span[0]..=spec.span[1]);
            let clear = obstacles.iter().all(|o| {
                let b = o.bounds();
                x < b.min.x - spec.radius - 0.3 || x > b.max.x + spec.radius + 0.3
            });
            if clear {
                station = Some(x);
                break;
            }
        }
        let x = station?;
        params.pedestrian_speeds.push(speed);
        out.push(Pedestrian {
            id: first_id + k as u32,
            position: Vec2::new(x, y),
            velocity: Vec2::new(0.0, dir * speed),
            radius: spec.radius,
            bounds: Aabb {
                min: Vec2::new(x, -y_lim),
                max: Vec2::new(x, y_lim),
            },
        });
    }
    Some(out)
}

enum Attempt {
    Done(World),
    Retry(&'static str),
}

fn hall_attempt(
    t: &Template,
    rng: &mut ChaCha8Rng,
    params: &mut ScenarioParams,
) -> Attempt {
    let (length, half_w, wall, margin, min_passage, end_clearance, shift) = match t.layout {
        Layout::Corridor {
            length,
            width,
            wall,
            margin,
            min_passage,
            end_clearance,
        } => {
            let w = rng.random_range(width[0]..=width[1]);
            params.corridor_width = Some(w);
            (length, w / 2.0, wall, margin, min_passage, end_clearance, None)
        }
        Layout::Maze {
            length,
            width,
            wall,
            margin,
            shift,
            min_passage,
            end_clearance,
        } => (length, width / 2.0, wall, margin, min_passage, end_clearance, Some(shift)),
        Layout::Lobby { .. } => unreachable!("lobby handled separately"),
    };
    let mut placed: Vec<Obstacle> = Vec::new();
    for spec in &t.obstacles {
        let s = rng.random_range(t.scale[0]..=t.scale[1]);
        let shape = spec.shape.scaled(s);
        let half = shape.half();
        let y_lim = half_w - margin - half.y;
        if y_lim < 0.0 {
            return Attempt::Retry("obstacle fits between walls");
        }
        let mut found = None;
        for _ in 0..50 {
            let y = match shift {
                None => rng.random_range(-y_lim..=y_lim),
                Some(d) => spec.y + rng.random_range(-d..=d),
            };
            if y.abs() > y_lim {
                continue;
            }
            let o = shape.place(Vec2::new(spec.x, y));
            if placed.iter().all(|p| !overlaps(&p.bounds(), &o.bounds(), margin)) {
                found = Some((y, o));
                break;
            }
        }
        let Some((y, o)) = found else {
            return Attempt::Retry("no wall or obstacle overlap");
        };
        params.scales.push(s);
        params.lateral.push(if shift.is_some() { y - spec.y } else { y });
        placed.push(o);
    }
    if narrowest_passage(&placed, -half_w, half_w) < min_passage {
        return Attempt::Retry("minimum passage width");
    }
    let lane = half_w - 1.0;
    let start = Vec2::new(end_clearance, rng.random_range(-lane..=lane));
    let goal = Vec2::new(length - end_clearance, rng.random_range(-lane..=lane));
    if placed
        .iter()
        .any(|o| o.distance_to(start) < 1.0 || o.distance_to(goal) < 0.8)
    {
        return Attempt::Retry("free start and goal");
    }
    let pedestrians = match &t.pedestrians {
        Some(spec) => match crossers(spec, &placed, half_w, 1, rng, params) {
            Some(p) => p,
            None => return Attempt::Retry("pedestrian stations clear of obstacles"),
        },
        None => Vec::new(),
    };
    let mut obstacles = walls(length, half_w, wall).to_vec();
    obstacles.extend(placed);
    Attempt::Done(World {
        bounds: Aabb {
            min: Vec2::new(0.0, -half_w - wall),
            max: Vec2::new(length, half_w + wall),
        },
        obstacles,
        pedestrians,
        robot: RobotState::at(Pose::new(start.x, start.y, 0.0)),
        goal,
        time: 0.0,
    })
}

fn lobby_attempt(t: &Template, rng: &mut ChaCha8Rng, params: &mut ScenarioParams) -> Attempt {
    let Layout::Lobby {
        size,
        wall,
        margin,
        shift,
        start_inset,
        start_clearance,
        goal_clearance,
    } = t.layout
    else {
        unreachable!("hall layouts handled separately")
    };
    let (hx, hy) = (size[0] / 2.0, size[1] / 2.0);
    let inner = Aabb {
        min: Vec2::new(-hx, -hy),
        max: Vec2::new(hx, hy),
    };
    let mut placed: Vec<Obstacle> = Vec::new();
    for spec in &t.obstacles {
        let s = rng.random_range(t.scale[0]..=t.scale[1]);
        let dx = rng.random_range(-shift..=shift);
        let o = spec.shape.scaled(s).place(Vec2::new(spec.x + dx, spec.y));
        let b = o.bounds();
        let inside = inner.inflate(-margin);
        if !(inside.contains(b.min) && inside.contains(b.max)) {
            return Attempt::Retry("no wall or obstacle overlap");
        }
        if placed.iter().any(|p| overlaps(&p.bounds(), &b, margin)) {
            return Attempt::Retry("no wall or obstacle overlap");
        }
        params.scales.push(s);
        params.shifts.push(dx);
        placed.push(o);
    }
    let side = rng.random_range(0..4usize);
    params.start_side = Some(side);
    let start = match side {
        0 => Pose::new(-hx + start_inset, 0.0, 0.0),
        1 => Pose::new(hx - start_inset, 0.0, PI),
        2 => Pose::new(0.0, -hy + start_inset, FRAC_PI_2),
        _ => Pose::new(0.0, hy - start_inset, -FRAC_PI_2),
    };
    let goal = Vec2::ZERO;
    if placed.iter().any(|o| o.distance_to(start.position()) < start_clearance) {
        return Attempt::Retry("free start");
    }
    if placed.iter().any(|o| o.distance_to(goal) < goal_clearance) {
        return Attempt::Retry("free goal");
    }
    let mut obstacles = vec![
        Obstacle::Rect {
            min: Vec2::new(-hx - wall, hy),
            max: Vec2::new(hx + wall, hy + wall),
        },
        Obstacle::Rect {
            min: Vec2::new(-hx - wall, -hy - wall),
            max: Vec2::new(hx + wall, -hy),
        },
        Obstacle::Rect {
            min: Vec2::new(-hx - wall, -hy),
            max: Vec2::new(-hx, hy),
        },
        Obstacle::Rect {
            min: Vec2::new(hx, -hy),
            max: Vec2::new(hx + wall, hy),
        },
    ];
    obstacles.extend(placed);
    Attempt::Done(World {
        bounds: inner.inflate(wall),
        obstacles,
        pedestrians: Vec::new(),
        robot: RobotState::at(start),
        goal,
        time: 0.0,
    })
}

/// Deterministic world for `(template, seed)`. Constraint failures restart
/// the draw up to [`MAX_ATTEMPTS`] times from the same RNG stream.
pub fn generate_scenario(t: &Template, seed: u64) -> Result<Scenario, ScenarioError> {
    t.validate()?;
    let mut rng = super::seeded_rng(seed, super::STREAM_SCENARIO);
    let mut last = "placement";
    for attempt in 1..=MAX_ATTEMPTS {
        let mut params = ScenarioParams {
            attempts: attempt,
            ..ScenarioParams::default()
        };
        let outcome = match t.layout {
            Layout::Lobby { .. } => lobby_attempt(t, &mut rng, &mut params),
            _ => hall_attempt(t, &mut rng, &mut params),
        };
        match outcome {
            Attempt::Done(world) => {
                return Ok(Scenario {
                    template: t.name.clone(),
                    seed,
                    world,
                    params,
                })
            }
            Attempt::Retry(why) => last = why,
        }
    }
    Err(ScenarioError::Unsatisfiable {
        template: t.name.clone(),
        seed,
        constraint: last,
        attempts: MAX_ATTEMPTS,
    })
}
