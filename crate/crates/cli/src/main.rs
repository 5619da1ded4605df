mod extract;
mod plot;
mod render;
mod report;
mod simulate;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gapnav::geom::Pose;
use gapnav::sim::detect::DetectionModel;
use gapnav::sim::scenario::Catalog;
use gapnav::sim::SimConfig;

/// Guidance-point extraction, batch simulation and the episode service.
#[derive(Parser)]
#[command(name = "gapnav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Guidance points of a map seen from a pose, as JSON.
    Extract(extract::ExtractArgs),
    /// Run seeded episodes and print a metrics table.
    Simulate(simulate::SimulateArgs),
    /// Serve episodes over TCP (NDJSON) and WebSocket.
    Serve(ServeArgs),
    /// Recompute the metrics table from episode logs.
    Eval(EvalArgs),
    /// Export trajectories, passes and per-episode outcomes as CSV.
    Plot(plot::PlotArgs),
}

/// Simulator settings shared by `simulate` and `serve`.
#[derive(Args, Clone)]
pub struct SimArgs {
    /// JSON file with simulator settings; missing fields keep defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory of template JSON files added to or replacing the built-ins.
    #[arg(long, env = "GAPNAV_CATALOG")]
    catalog: Option<PathBuf>,
    /// Pedestrian detection model.
    #[arg(long, value_enum)]
    detect: Option<Detect>,
    /// Bins per polar vector.
    #[arg(long)]
    n: Option<usize>,
    /// Sensing range, meters.
    #[arg(long)]
    dmax: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Detect {
    Truth,
    Gaussian,
    Degraded,
}

impl SimArgs {
    fn load(&self) -> Result<(SimConfig, Catalog), Failure> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
            }
            None => SimConfig::default(),
        };
        if let Some(d) = self.detect {
            config.detection = match d {
                Detect::Truth => DetectionModel::Truth,
                Detect::Gaussian => "gaussian".parse().expect("known model"),
                Detect::Degraded => "degraded".parse().expect("known model"),
            };
        }
        if let Some(n) = self.n {
            config.encoding.n = n;
        }
        if let Some(d) = self.dmax {
            config.encoding.d_max = d;
        }
        config.validate().map_err(|e| Failure::usage(e.to_string()))?;
        let catalog = match &self.catalog {
            Some(dir) => Catalog::with_overrides(dir).map_err(|e| Failure::runtime(e.to_string()))?,
            None => Catalog::builtin(),
        };
        Ok((config, catalog))
    }
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// NDJSON listener.
    #[arg(long, env = "GAPNAV_BIND", default_value = "127.0.0.1:7070")]
    bind: SocketAddr,
    /// WebSocket mirror, served at `/ws`.
    #[arg(long, env = "GAPNAV_WS_BIND", default_value = "127.0.0.1:7071")]
    ws_bind: SocketAddr,
    /// Finished episodes are logged here.
    #[arg(long, env = "GAPNAV_LOG_DIR", default_value = "logs")]
    log_dir: PathBuf,
    /// Demo recordings; defaults to `<log-dir>/demos`.
    #[arg(long)]
    demo_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory of episode logs.
    #[arg(long)]
    log_dir: PathBuf,
    /// Also write `metrics.csv` and `metrics.txt` here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time charged to failed episodes in STL, seconds; defaults to the
    /// logged timeout.
    #[arg(long)]
    t_max: Option<f64>,
}

/// An error with its exit code: 1 for runtime failures, 2 for bad input.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

/// Parses `x,y,theta`.
pub fn parse_pose(s: &str) -> Result<Pose, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [x, y, t] = parts[..] else {
        return Err(format!("expected x,y,theta, got {s:?}"));
    };
    let num = |v: &str| {
        v.parse::<f64>()
            .ok()
            .filter(|f| f.is_finite())
            .ok_or_else(|| format!("{v:?} is not a finite number"))
    };
    Ok(Pose::new(num(x)?, num(y)?, num(t)?))
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let (sim, catalog) = args.sim.load()?;
    let demo_dir = args.demo_dir.unwrap_or_else(|| args.log_dir.join("demos"));
    let config = gapnav_service::ServiceConfig {
        bind: args.bind,
        ws_bind: Some(args.ws_bind),
        sim,
        catalog,
        log_dir: Some(args.log_dir.clone()),
        demo_dir,
    };
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::runtime(e.to_string()))?;
    rt.block_on(async {
        let bound = gapnav_service::bind(config)
            .await
            .map_err(|e| Failure::runtime(format!("cannot listen: {e}")))?;
        let tcp = bound.tcp_addr().map_err(|e| Failure::runtime(e.to_string()))?;
        let ws = bound.ws_addr().expect("mirror requested");
        println!("listening tcp={tcp} ws=ws://{ws}/ws log_dir={}", args.log_dir.display());
        bound
            .run()
            .await
            .map_err(|e| Failure::runtime(e.to_string()))
    })
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let (results, timeout, skipped) = report::load_logs(&args.log_dir)?;
    if skipped > 0 {
        eprintln!("warning: skipped {skipped} corrupt log line(s)");
    }
    let t_max = args.t_max.or(timeout).unwrap_or(SimConfig::default().reward.timeout);
    let table = report::Table::build(&results, t_max)?;
    print!("{}", table.human());
    if let Some(out) = args.out {
        table.write(&out)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(a) => extract::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Serve(a) => serve(a),
        Command::Eval(a) => eval(a),
        Command::Plot(a) => plot::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
