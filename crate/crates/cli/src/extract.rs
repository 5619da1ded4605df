use std::path::PathBuf;

use clap::Args;
use gapnav::encoding::encode_guidance;
use gapnav::geom::Pose;
use gapnav::grid::{read_map, GridError};
use gapnav::guidance::{extract_guidance, GuidanceParams, GuidancePoint};
use serde::Serialize;

use crate::{parse_pose, render, Failure};

#[derive(Args)]
pub struct ExtractArgs {
    /// Grid-text or PGM (P2/P5) map.
    #[arg(long)]
    map: PathBuf,
    /// Robot pose in map coordinates.
    #[arg(long, value_parser = parse_pose, allow_hyphen_values = true)]
    pose: Pose,
    /// Meters per pixel for PGM maps.
    #[arg(long, default_value_t = 0.05)]
    pgm_resolution: f64,
    /// Write the points here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a PPM overlay of map, pose and points.
    #[arg(long)]
    render: Option<PathBuf>,
    /// Also write the polar guidance vector (JSON array) here.
    #[arg(long)]
    vector: Option<PathBuf>,
    /// Bins of the polar vector.
    #[arg(long, default_value_t = 72)]
    n: usize,
    /// Range of the polar vector, meters.
    #[arg(long, default_value_t = 10.0)]
    dmax: f64,
    #[arg(long, default_value_t = GuidanceParams::default().tie_eps)]
    tie_eps: f64,
    /// Largest triangle angle kept, degrees.
    #[arg(long, default_value_t = GuidanceParams::default().theta_max_deg)]
    theta_max: f64,
    #[arg(long, default_value_t = GuidanceParams::default().lambda)]
    lambda: f64,
}

#[derive(Serialize)]
struct PointOut {
    x: f64,
    y: f64,
    group_i: u32,
    group_j: u32,
    gap_width: f64,
}

impl From<&GuidancePoint> for PointOut {
    fn from(p: &GuidancePoint) -> Self {
        Self {
            x: p.position.x,
            y: p.position.y,
            group_i: p.group_i.0,
            group_j: p.group_j.0,
            gap_width: p.gap_width,
        }
    }
}

fn write(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(a: ExtractArgs) -> Result<(), Failure> {
    if a.n < 4 || !(a.dmax > 0.0) {
        return Err(Failure::usage("--n must be at least 4 and --dmax positive"));
    }
    let grid = read_map(&a.map, a.pgm_resolution).map_err(|e| match e {
        GridError::Io(e) => Failure::runtime(format!("{}: {e}", a.map.display())),
        e => Failure::usage(format!("{}: {e}", a.map.display())),
    })?;
    let params = GuidanceParams {
        tie_eps: a.tie_eps,
        theta_max_deg: a.theta_max,
        lambda: a.lambda,
    };
    let points = extract_guidance(&grid, a.pose, &params);
    let out: Vec<PointOut> = points.iter().map(PointOut::from).collect();
    let json = serde_json::to_string_pretty(&out).expect("points serialize") + "\n";
    write(&a.out, &json)?;
    if let Some(path) = &a.vector {
        let v = encode_guidance(&points, a.pose, a.n, a.dmax);
        let text = serde_json::to_string(&v).expect("vector serializes") + "\n";
        write(&Some(path.clone()), &text)?;
    }
    if let Some(path) = &a.render {
        let image = render::overlay(&grid, a.pose, &points);
        std::fs::write(path, image.to_ppm())
            .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}
