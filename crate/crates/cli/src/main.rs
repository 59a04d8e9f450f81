//! Command line front end: generate instances, solve them, run sweeps and
//! tables, or query the joint-decoding oracle.
//!
//! Exit codes: 0 success, 1 usage or internal error, 2 infeasible under
//! the peak power cap, 3 solver budget exhausted without an answer.

use clap::{Args, Parser, Subcommand};
use pairalloc_core::{
    run_sweep, run_table, solve_instance, sw_n_power_oracle, ChannelModel, EntropyOracle, Error,
    ExperimentConfig, MethodOutcome, Mode, NetworkInstance, SolveReport,
};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "pairalloc",
    about = "Rate and power allocation for correlated sensor sources decoded alone or in pairs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded network instance and print it as JSON.
    Gen(GenArgs),
    /// Solve one instance with every applicable method.
    Solve(SolveArgs),
    /// Normalized-sum-rate sweep over an (n, c) grid; CSV output.
    Sweep(GridArgs),
    /// Noisy comparison table over an (n, c) grid; CSV output.
    Table(GridArgs),
    /// Joint-decoding convex oracle on one instance.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of nodes.
    #[arg(long)]
    n: usize,
    /// Correlation decay parameter.
    #[arg(long)]
    c: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sink position as "x,y".
    #[arg(long, default_value = "0,0")]
    sink: String,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instance JSON file; otherwise one is generated from --n/--c/--seed.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// "noiseless" or "noisy".
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    pmax: Option<f64>,
    #[arg(long)]
    clamp: Option<bool>,
    #[arg(long)]
    budget_secs: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for witness subgraphs in DOT format, one per method.
    #[arg(long)]
    emit_dot: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Node counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Correlation parameters, comma separated.
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replications per grid cell.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    pmax: Option<f64>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    clamp: Option<bool>,
    #[arg(long)]
    budget_secs: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    c: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    pmax: Option<f64>,
    #[arg(long)]
    clamp: Option<bool>,
    #[arg(long, default_value = "0,0")]
    sink: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version are successful exits; real usage errors are
            // code 1 so they stay distinct from infeasibility (2).
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InfeasibleUnderPeakPower
                | Error::BaselineInfeasible
                | Error::InfeasibleOracle => 2,
                Error::BudgetExceeded => 3,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.cmd {
        Cmd::Gen(a) => {
            let inst = NetworkInstance::generate(a.n, a.c, a.seed, parse_point(&a.sink)?)?;
            emit(&inst.to_json(), a.out.as_deref())?;
            Ok(0)
        }
        Cmd::Solve(a) => {
            let mut cfg = base_config(a.config.as_deref(), Mode::Noiseless)?;
            override_scalar(&mut cfg.seed, a.seed);
            override_mode(&mut cfg, a.mode.as_deref())?;
            override_option(&mut cfg.p_max, a.pmax);
            override_scalar(&mut cfg.clamp, a.clamp);
            override_option(&mut cfg.budget_secs, a.budget_secs);
            cfg.validate()?;
            let inst = match &a.instance {
                Some(path) => NetworkInstance::from_json(&read(path)?)?,
                None => NetworkInstance::generate(a.n, a.c, cfg.seed, cfg.sink)?,
            };
            let report = solve_instance(&cfg, &inst)?;
            if let Some(dir) = &a.emit_dot {
                emit_dot(&report, dir)?;
            }
            emit(
                &serde_json::to_string_pretty(&report.to_json()).expect("report serializes"),
                a.out.as_deref(),
            )?;
            if report.any_budget_exceeded() {
                Ok(3)
            } else if report.any_infeasible() {
                Ok(2)
            } else {
                Ok(0)
            }
        }
        Cmd::Sweep(a) => {
            let cfg = grid_config(&a, Mode::Noiseless)?;
            let csv = run_sweep(&cfg)?;
            emit(&csv, a.out.as_deref())?;
            Ok(0)
        }
        Cmd::Table(a) => {
            let cfg = grid_config(&a, Mode::Noisy)?;
            let csv = run_table(&cfg)?;
            emit(&csv, a.out.as_deref())?;
            Ok(0)
        }
        Cmd::Oracle(a) => {
            let inst = NetworkInstance::generate(a.n, a.c, a.seed, parse_point(&a.sink)?)?;
            let oracle = EntropyOracle::from_instance(&inst)?;
            let channel = ChannelModel::from_instance(&inst, a.pmax.unwrap_or(f64::INFINITY))?;
            let clamp = if a.clamp.unwrap_or(true) {
                pairalloc_core::RateClamp::ZeroFloor
            } else {
                pairalloc_core::RateClamp::Raw
            };
            let assignment = sw_n_power_oracle(&oracle, &channel, clamp)?;
            let text = serde_json::json!({
                "instance": serde_json::from_str::<serde_json::Value>(&inst.to_json())
                    .expect("instance serializes"),
                "assignment": assignment.to_json(),
            });
            emit(
                &serde_json::to_string_pretty(&text).expect("oracle output serializes"),
                a.out.as_deref(),
            )?;
            Ok(0)
        }
    }
}

fn base_config(path: Option<&Path>, default_mode: Mode) -> Result<ExperimentConfig, Error> {
    match path {
        Some(p) => ExperimentConfig::from_json(&read(p)?),
        None => match default_mode {
            Mode::Noiseless => Ok(ExperimentConfig::default()),
            Mode::Noisy => Ok(ExperimentConfig::table_defaults()),
        },
    }
}

fn grid_config(a: &GridArgs, default_mode: Mode) -> Result<ExperimentConfig, Error> {
    let mut cfg = base_config(a.config.as_deref(), default_mode)?;
    if a.config.is_none() && a.mode.is_none() {
        cfg.mode = default_mode;
    }
    override_mode(&mut cfg, a.mode.as_deref())?;
    if let Some(n) = &a.n {
        cfg.n_list = n.clone();
    }
    if let Some(c) = &a.c {
        cfg.c_list = c.clone();
    }
    override_scalar(&mut cfg.seed, a.seed);
    override_scalar(&mut cfg.replications, a.reps);
    override_option(&mut cfg.p_max, a.pmax);
    override_scalar(&mut cfg.clamp, a.clamp);
    override_option(&mut cfg.budget_secs, a.budget_secs);
    cfg.validate()?;
    Ok(cfg)
}

fn override_scalar<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn override_option<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn override_mode(cfg: &mut ExperimentConfig, mode: Option<&str>) -> Result<(), Error> {
    match mode {
        None => Ok(()),
        Some("noiseless") => {
            cfg.mode = Mode::Noiseless;
            Ok(())
        }
        Some("noisy") => {
            cfg.mode = Mode::Noisy;
            Ok(())
        }
        Some(other) => Err(Error::InvalidArgument(format!(
            "mode must be noiseless or noisy, got {other}"
        ))),
    }
}

fn parse_point(text: &str) -> Result<[f64; 2], Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected \"x,y\", got {text}"
        )));
    }
    let x = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad coordinate {}", parts[0])))?;
    let y = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad coordinate {}", parts[1])))?;
    Ok([x, y])
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    // Exactly one trailing newline whether the producer added one or not.
    let text = text.strip_suffix('\n').unwrap_or(text);
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write as _;
            // A closed pipe (e.g. | head) is a normal way to stop reading.
            if let Err(e) = writeln!(std::io::stdout(), "{text}") {
                if e.kind() == std::io::ErrorKind::BrokenPipe {
                    std::process::exit(0);
                }
                return Err(Error::InvalidArgument(format!("cannot write stdout: {e}")));
            }
            Ok(())
        }
    }
}

fn emit_dot(report: &SolveReport, dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", dir.display())))?;
    for m in &report.methods {
        if let MethodOutcome::Solved { witness: Some(w), .. } = &m.outcome {
            let name = m.method.as_str();
            let dot = w
                .graph
                .to_dot(name, Some(&w.selection), Some(&report.positions));
            let path = dir.join(format!("{name}.dot"));
            fs::write(&path, dot).map_err(|e| {
                Error::InvalidArgument(format!("cannot write {}: {e}", path.display()))
            })?;
        }
    }
    Ok(())
}
