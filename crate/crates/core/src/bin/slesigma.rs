use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use slesigma::config::RunConfig;
use slesigma::diagnostics::{
    disconnection_suite, drift_both, duality_test, stationarity_test, CloudStatistic, InitialAngle,
};
use slesigma::model::sample_driving_path;
use slesigma::phases::{phase_integrals_with, phase_scan, report_from, ScanOptions};
use slesigma::point_tracker::polar_evolve;
use slesigma::slit_engine::{left_hull_cloud, right_hull_cloud, CloudOptions};
use slesigma::stationary::stationary_density;
use slesigma::streams::SeedRecord;
use slesigma::Error;

#[derive(Parser)]
#[command(name = "slesigma", version, about = "Loewner evolution driven by correlated complex Brownian motion")]
struct Cli {
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a driver and write a hull point cloud.
    Simulate(SimulateArgs),
    /// Stationary angular density on a uniform grid.
    Density(DensityArgs),
    /// Phase integrals and classification.
    Phases(PhasesArgs),
    /// Classify a grid of (a, b) and trace the phase boundaries.
    Scan(ScanArgs),
    /// One run of the polar system in σ-time.
    Polar(PolarArgs),
    /// Monte-Carlo checks.
    Verify {
        #[command(subcommand)]
        check: Verify,
    },
}

#[derive(Subcommand)]
enum Verify {
    Drift(DriftArgs),
    Stationarity(StationarityArgs),
    Duality(DualityArgs),
    Disconnect(DisconnectArgs),
}

#[derive(Args)]
struct SigmaArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    sigma: SigmaArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// `left` or `right`.
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    sigma: SigmaArgs,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PhasesArgs {
    #[command(flatten)]
    sigma: SigmaArgs,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, allow_hyphen_values = true)]
    a_range: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b_range: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long)]
    res: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    boundary_out: Option<PathBuf>,
}

#[derive(Args)]
struct PolarArgs {
    #[command(flatten)]
    sigma: SigmaArgs,
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DriftArgs {
    #[command(flatten)]
    sigma: SigmaArgs,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StationarityArgs {
    #[command(flatten)]
    sigma: SigmaArgs,
    #[arg(long)]
    paths: Option<usize>,
    /// Comma-separated σ-times.
    #[arg(long)]
    checkpoints: Option<String>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DualityArgs {
    #[command(flatten)]
    sigma: SigmaArgs,
    #[arg(long)]
    hulls: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// `max_modulus`, `real_extent` or `imag_extent`.
    #[arg(long)]
    statistic: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DisconnectArgs {
    #[command(flatten)]
    sigma: SigmaArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flag values as `(key, value)` overrides of the configuration.
struct Overrides(Vec<(&'static str, String)>);

impl Overrides {
    fn new() -> Self {
        Overrides(Vec::new())
    }

    fn put<T: ToString>(&mut self, key: &'static str, v: &Option<T>) -> &mut Self {
        if let Some(v) = v {
            self.0.push((key, v.to_string()));
        }
        self
    }

    fn path(&mut self, key: &'static str, v: &Option<PathBuf>) -> &mut Self {
        if let Some(v) = v {
            self.0.push((key, v.display().to_string()));
        }
        self
    }

    fn sigma(&mut self, s: &SigmaArgs) -> &mut Self {
        self.put("a", &s.a).put("b", &s.b).put("c", &s.c)
    }
}

fn overrides(cmd: &Command) -> (&'static str, Overrides) {
    let mut o = Overrides::new();
    let name = match cmd {
        Command::Simulate(a) => {
            o.sigma(&a.sigma).put("n", &a.n).put("horizon", &a.horizon).put("epsilon", &a.eps);
            o.put("side", &a.side).put("seed", &a.seed).path("out", &a.out).path("svg", &a.svg);
            "simulate"
        }
        Command::Density(a) => {
            o.sigma(&a.sigma).put("grid", &a.grid).path("out", &a.out);
            "density"
        }
        Command::Phases(a) => {
            o.sigma(&a.sigma).put("tol", &a.tol).put("grid", &a.grid).path("out", &a.out);
            "phases"
        }
        Command::Scan(a) => {
            o.put("a_range", &a.a_range).put("b_range", &a.b_range).put("c", &a.c).put("res", &a.res);
            o.put("tol", &a.tol).path("out", &a.out).path("boundary_out", &a.boundary_out);
            "scan"
        }
        Command::Polar(a) => {
            o.sigma(&a.sigma).put("theta0", &a.theta0).put("t_end", &a.t_end).put("h", &a.h);
            o.put("seed", &a.seed).path("out", &a.out);
            "polar"
        }
        Command::Verify { check } => match check {
            Verify::Drift(a) => {
                o.sigma(&a.sigma).put("paths", &a.paths).put("t_end", &a.t_end).put("h", &a.h);
                o.put("seed", &a.seed).path("out", &a.out);
                "drift"
            }
            Verify::Stationarity(a) => {
                o.sigma(&a.sigma).put("paths", &a.paths).put("checkpoints", &a.checkpoints).put("h", &a.h);
                o.put("seed", &a.seed).path("out", &a.out);
                "stationarity"
            }
            Verify::Duality(a) => {
                o.sigma(&a.sigma).put("hulls", &a.hulls).put("n", &a.n).put("horizon", &a.horizon);
                o.put("epsilon", &a.eps).put("statistic", &a.statistic).put("seed", &a.seed).path("out", &a.out);
                "duality"
            }
            Verify::Disconnect(a) => {
                o.sigma(&a.sigma).put("n", &a.n).put("horizon", &a.horizon).put("epsilon", &a.eps);
                o.put("seeds", &a.seeds).put("seed", &a.seed).path("out", &a.out);
                "disconnect"
            }
        },
    };
    (name, o)
}

fn resolve(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        cfg.apply_file(&text)?;
    }
    let (name, o) = overrides(&cli.command);
    cfg.command = name.to_string();
    for (k, v) in &o.0 {
        cfg.set(k, v)?;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writer for `path`, or standard output.
fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// A report with the resolved configuration under `"config"`.
fn json_with_config<T: Serialize>(report: &T, cfg: &RunConfig) -> Result<Value, Error> {
    let mut v = serde_json::to_value(report).map_err(|e| Error::Io(e.to_string()))?;
    let conf: Map<String, Value> = RunConfig::KEYS
        .iter()
        .map(|k| (k.to_string(), Value::String(cfg.get(k).unwrap())))
        .collect();
    if let Value::Object(m) = &mut v {
        m.insert("config".into(), Value::Object(conf));
    }
    Ok(v)
}

fn emit_json(v: &Value, out: &Option<PathBuf>) -> Result<(), Error> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

enum Outcome {
    Done,
    VerifyFailed,
}

fn run(cfg: &RunConfig) -> Result<Outcome, Error> {
    let header = cfg.header_lines();
    let pass = |ok: bool| if ok { Outcome::Done } else { Outcome::VerifyFailed };
    match cfg.command.as_str() {
        "simulate" => {
            let sigma = cfg.sigma()?;
            let path = sample_driving_path(&sigma, cfg.n, cfg.horizon, SeedRecord::new(cfg.seed, 0))?;
            let cloud = if cfg.side == "right" {
                right_hull_cloud(&path, cfg.epsilon)?
            } else {
                left_hull_cloud(&path, cfg.epsilon)?
            };
            let mut w = sink(&cfg.out)?;
            cloud.write_csv(&mut w, &header)?;
            w.flush()?;
            if let Some(svg) = &cfg.svg {
                let mut w = create(svg)?;
                cloud.write_svg(&mut w)?;
                w.flush()?;
            }
            eprintln!("{} points, {} chains dropped", cloud.len(), cloud.dropped);
            Ok(Outcome::Done)
        }
        "density" => {
            let p = stationary_density(&cfg.sigma()?, cfg.grid)?;
            let mut w = sink(&cfg.out)?;
            p.write_csv(&mut w, &header)?;
            w.flush()?;
            Ok(Outcome::Done)
        }
        "phases" => {
            let sigma = cfg.sigma()?;
            let ints = phase_integrals_with(&sigma, cfg.grid)?;
            let report = report_from(&sigma, &ints, cfg.tol)?;
            emit_json(&json_with_config(&report, cfg)?, &cfg.out)?;
            Ok(Outcome::Done)
        }
        "scan" => {
            let opts = ScanOptions {
                resolution: cfg.res,
                tol_zero: cfg.tol,
                ..Default::default()
            };
            let scan = phase_scan(cfg.a_range, cfg.b_range, cfg.c, &opts)?;
            let mut w = sink(&cfg.out)?;
            scan.write_grid_csv(&mut w, &header)?;
            w.flush()?;
            if let Some(b) = &cfg.boundary_out {
                let mut w = create(b)?;
                scan.write_boundary_csv(&mut w, &header)?;
                w.flush()?;
            }
            Ok(Outcome::Done)
        }
        "polar" => {
            let tr = polar_evolve(&cfg.sigma()?, cfg.theta0, cfg.t_end, cfg.h, SeedRecord::new(cfg.seed, 0))?;
            let mut w = sink(&cfg.out)?;
            tr.write_csv(&mut w, &header)?;
            w.flush()?;
            Ok(Outcome::Done)
        }
        "drift" => {
            let (lm, ld) = drift_both(&cfg.sigma()?, cfg.paths, cfg.t_end, cfg.h, cfg.seed)?;
            let ok = lm.pass && ld.pass;
            let report = serde_json::json!({ "logmod": lm, "logderiv": ld, "pass": ok });
            emit_json(&json_with_config(&report, cfg)?, &cfg.out)?;
            Ok(pass(ok))
        }
        "stationarity" => {
            let r = stationarity_test(&cfg.sigma()?, cfg.paths, &cfg.checkpoints, cfg.h, cfg.seed, InitialAngle::Stationary)?;
            emit_json(&json_with_config(&r, cfg)?, &cfg.out)?;
            Ok(pass(r.pass))
        }
        "duality" => {
            let stat = CloudStatistic::parse(&cfg.statistic)?;
            let r = duality_test(
                &cfg.sigma()?,
                cfg.hulls,
                cfg.n,
                cfg.horizon,
                cfg.epsilon,
                stat,
                cfg.seed,
                &CloudOptions::default(),
            )?;
            emit_json(&json_with_config(&r, cfg)?, &cfg.out)?;
            Ok(pass(r.pass))
        }
        "disconnect" => {
            let r = disconnection_suite(&cfg.sigma()?, cfg.n, cfg.horizon, cfg.epsilon, cfg.seeds, cfg.seed)?;
            emit_json(&json_with_config(&r, cfg)?, &cfg.out)?;
            Ok(pass(r.pass))
        }
        other => Err(Error::InvalidArgument(format!("unknown command {other:?}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if cfg.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cfg) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerifyFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
