//! Plot data: CSV files any plotting tool can read, plus the same as JSON.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use gapnav::sim::metrics::PassSide;

use crate::report::load_logs;
use crate::Failure;

#[derive(Args)]
pub struct PlotArgs {
    /// Directory of episode logs.
    #[arg(long)]
    log_dir: PathBuf,
    /// Receives `trajectories.csv`, `episodes.csv`, `passes.csv` and `episodes.json`.
    #[arg(long, default_value = "plots")]
    out: PathBuf,
}

pub fn run(args: PlotArgs) -> Result<(), Failure> {
    let (results, _, skipped) = load_logs(&args.log_dir)?;
    if skipped > 0 {
        eprintln!("warning: skipped {skipped} corrupt log line(s)");
    }
    let mut traj = String::from("template,seed,t,x,y,theta,speed,steer\n");
    let mut episodes = String::from("template,seed,outcome,elapsed,passes,behind\n");
    let mut passes = String::from("template,seed,pedestrian,time,side\n");
    for r in &results {
        for s in &r.trajectory {
            let (p, st) = (s.state.pose, s.state);
            writeln!(
                traj,
                "{},{},{},{},{},{},{},{}",
                r.template, r.seed, s.t, p.x, p.y, p.theta, st.speed, st.steer
            )
            .unwrap();
        }
        let behind = r
            .pass_events
            .iter()
            .filter(|e| e.side == PassSide::Behind)
            .count();
        let outcome = serde_json::to_value(r.outcome).expect("enum serializes");
        writeln!(
            episodes,
            "{},{},{},{},{},{}",
            r.template,
            r.seed,
            outcome.as_str().unwrap_or_default(),
            r.elapsed,
            r.pass_events.len(),
            behind
        )
        .unwrap();
        for e in &r.pass_events {
            let side = match e.side {
                PassSide::Front => "front",
                PassSide::Behind => "behind",
            };
            writeln!(passes, "{},{},{},{},{side}", r.template, r.seed, e.pedestrian, e.time).unwrap();
        }
    }
    let json = serde_json::to_string_pretty(&results).expect("results serialize");
    let io = |e: std::io::Error| Failure::runtime(format!("{}: {e}", args.out.display()));
    std::fs::create_dir_all(&args.out).map_err(io)?;
    for (name, text) in [
        ("trajectories.csv", traj),
        ("episodes.csv", episodes),
        ("passes.csv", passes),
        ("episodes.json", json),
    ] {
        std::fs::write(args.out.join(name), text).map_err(io)?;
    }
    println!("{} episodes -> {}", results.len(), args.out.display());
    Ok(())
}
