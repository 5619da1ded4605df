use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gapnav::policy::{Baseline, BaselineParams};
use gapnav::sim::log::log_file_name;
use gapnav::sim::metrics::Outcome;
use gapnav::sim::runner::run_batch;

use crate::report::Table;
use crate::{Failure, SimArgs};

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Comma-separated template names, or `static`, `dynamic`, `all`.
    #[arg(long, default_value = "all")]
    template: String,
    /// Half-open seed range `a..b`, or `a..=b`.
    #[arg(long, default_value = "0..50", value_parser = parse_seeds)]
    seeds: (u64, u64),
    /// Base seed added to every seed in the range.
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "baseline")]
    policy: PolicyKind,
    /// Metrics tables (`metrics.csv`, `metrics.txt`, `metrics.json`).
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Episode logs; defaults to `<out>/logs`.
    #[arg(long, env = "GAPNAV_LOG_DIR")]
    log_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyKind {
    Baseline,
    /// Driven by a client of `gapnav serve`; not runnable here.
    External,
}

pub fn parse_seeds(s: &str) -> Result<(u64, u64), String> {
    let bad = || format!("expected a..b or a..=b, got {s:?}");
    let (a, rest) = s.split_once("..").ok_or_else(bad)?;
    let (inclusive, b) = match rest.strip_prefix('=') {
        Some(b) => (true, b),
        None => (false, rest),
    };
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    let end = if inclusive { b.checked_add(1).ok_or_else(bad)? } else { b };
    if end <= a {
        return Err(format!("empty seed range {s:?}"));
    }
    Ok((a, end))
}

fn templates(spec: &str, known: &[&str]) -> Result<Vec<String>, Failure> {
    let names: Vec<String> = match spec {
        "all" => known.iter().map(|s| s.to_string()).collect(),
        "static" => ["a", "b", "c", "g"].map(String::from).to_vec(),
        "dynamic" => ["d", "e", "f", "h"].map(String::from).to_vec(),
        list => list.split(',').map(|s| s.trim().to_string()).collect(),
    };
    if let Some(bad) = names.iter().find(|n| !known.contains(&n.as_str())) {
        return Err(Failure::usage(format!(
            "unknown template {bad:?}; known: {}",
            known.join(",")
        )));
    }
    Ok(names)
}

pub fn run(args: SimulateArgs) -> Result<(), Failure> {
    if let PolicyKind::External = args.policy {
        return Err(Failure::usage(
            "the external policy runs through `gapnav serve`; connect a client there",
        ));
    }
    let (config, catalog) = args.sim.load()?;
    let known: Vec<&str> = catalog.names().collect();
    let names = templates(&args.template, &known)?;
    let (a, b) = args.seeds;
    let mut jobs = Vec::new();
    for t in &names {
        for k in a..b {
            let seed = args
                .seed
                .checked_add(k)
                .ok_or_else(|| Failure::usage("seed overflow"))?;
            jobs.push((t.clone(), seed));
        }
    }
    jobs.sort();
    jobs.dedup();

    let params = BaselineParams::for_config(&config);
    let runs = run_batch(&config, &catalog, &jobs, || Baseline::new(params), "baseline");

    let log_dir = args.log_dir.unwrap_or_else(|| args.out.join("logs"));
    std::fs::create_dir_all(&log_dir)
        .map_err(|e| Failure::runtime(format!("{}: {e}", log_dir.display())))?;
    let mut results = Vec::with_capacity(runs.len());
    for (result, log) in runs {
        let path = log_dir.join(log_file_name(&result.template, result.seed));
        log.write_atomic(&path).map_err(|e| Failure::runtime(e.to_string()))?;
        if result.outcome == Outcome::Error {
            eprintln!(
                "warning: {} seed {} failed: {}",
                result.template,
                result.seed,
                result.error.as_deref().unwrap_or("unknown error")
            );
        }
        results.push(result);
    }

    let table = Table::build(&results, config.reward.timeout)?;
    print!("{}", table.human());
    table.write(&args.out)?;
    Ok(())
}
