//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 training
//! divergence, 3 allocator/oracle mismatch.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_antijam::agent::Td3Agent;
use ris_antijam::allocator::AllocatorConfig;
use ris_antijam::harness::{
    evaluate, oracle_check, run_baseline, run_sweep, run_training, write_eval_csv, Figure, GridFile, ScenarioConfig,
    TrainOptions,
};
use ris_antijam::Error;

/// Worker-count override for sweeps.
const WORKERS_VAR: &str = "RISJAM_WORKERS";

#[derive(Parser)]
#[command(name = "ris-antijam", about = "RIS-assisted anti-jamming OFDMA simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent (or run a fixed baseline) and write per-step logs.
    Train {
        config: PathBuf,
        #[arg(long, default_value = "run")]
        out: PathBuf,
        /// Replaces the scenario's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Train for 400 episodes of 200 steps.
        #[arg(long)]
        full_scale: bool,
    },
    /// Evaluate a checkpoint without exploration noise.
    Eval {
        checkpoint: PathBuf,
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a parameter sweep from a grid file.
    Sweep {
        grid: PathBuf,
        #[arg(long, value_parser = parse_figure)]
        figure: Figure,
        #[arg(long, default_value = "sweeps")]
        out: PathBuf,
    },
    /// Compare the allocator with exhaustive search on random instances.
    OracleCheck {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// TOML file with allocator settings to check instead of the defaults.
        #[arg(long)]
        allocator: Option<PathBuf>,
    },
    /// Print the version.
    Version,
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Lib(Error),
    OracleMismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn workers() -> Result<Option<usize>, Error> {
    match std::env::var(WORKERS_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("{WORKERS_VAR} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn train(config: &Path, out: &Path, seed: Option<u64>, full_scale: bool) -> Result<(), Failure> {
    let mut scenario = ScenarioConfig::load(config)?;
    if let Some(s) = seed {
        scenario.seed = s;
    }
    if full_scale {
        scenario = scenario.full_scale();
    }
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("scenario.toml"), scenario.to_toml())?;
    let started = std::time::Instant::now();
    let log = if scenario.baseline.is_learned() {
        let opts = TrainOptions { checkpoint_dir: Some(out.join("checkpoints")) };
        run_training(&scenario, &opts)?.log
    } else {
        run_baseline(&scenario)?
    };
    let scale = scenario.report.rate_scale;
    log.write_steps_csv(create(&out.join("steps.csv"))?, scale)?;
    log.write_episodes_csv(create(&out.join("episodes.csv"))?, scale)?;
    let tail = log.episodes.len().div_ceil(2);
    println!(
        "{} seed {}: {} episodes, mean reward over the last {} = {}",
        scenario.baseline.name(),
        scenario.seed,
        log.episodes.len(),
        tail,
        log.tail_mean(tail) * scale
    );
    eprintln!("wall clock {:.1} s", started.elapsed().as_secs_f64());
    Ok(())
}

fn eval(checkpoint: &Path, config: &Path, out: &Path) -> Result<(), Failure> {
    let scenario = ScenarioConfig::load(config)?;
    let agent = if scenario.baseline.is_learned() { Some(Td3Agent::load_dir(checkpoint)?) } else { None };
    let report = evaluate(&scenario, agent.as_ref())?;
    std::fs::create_dir_all(out)?;
    let scale = scenario.report.rate_scale;
    write_eval_csv(&report, &out.join("eval.csv"), scale)?;
    println!("mean {} std {} over {} episodes", report.mean() * scale, report.std() * scale, report.episode_means.len());
    Ok(())
}

fn sweep(grid: &Path, figure: Figure, out: &Path) -> Result<(), Failure> {
    let file = GridFile::load(grid)?;
    let result = run_sweep(&file, figure, out, workers()?)?;
    let failures: usize = result.summary.iter().map(|s| s.failures).sum();
    println!("{} rows -> {}", result.rows.len(), result.rows_path.display());
    println!("summary -> {}", result.summary_path.display());
    if failures > 0 {
        eprintln!("{failures} grid points failed; see the error column");
    }
    Ok(())
}

fn check(instances: usize, kmax: usize, seed: u64, allocator: Option<&Path>) -> Result<(), Failure> {
    let cfg = match allocator {
        Some(path) => toml::from_str::<AllocatorConfig>(&std::fs::read_to_string(path)?).map_err(Error::from)?,
        None => AllocatorConfig::default(),
    };
    let report = oracle_check(instances, kmax, seed, &cfg)?;
    println!(
        "{} instances: {} exact ({:.1}%), {} within {} bits ({:.1}%), {} violations, worst gap {}, {:.2} s",
        report.instances,
        report.exact,
        100.0 * report.exact_fraction(),
        report.within_quantum,
        report.quantum,
        100.0 * report.within_fraction(),
        report.violations,
        report.worst_gap,
        report.elapsed.as_secs_f64()
    );
    if report.passes() {
        Ok(())
    } else {
        Err(Failure::OracleMismatch("allocator falls short of the exhaustive optimum too often".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Train { config, out, seed, full_scale } => train(&config, &out, seed, full_scale),
        Command::Eval { checkpoint, config, out } => eval(&checkpoint, &config, &out),
        Command::Sweep { grid, figure, out } => sweep(&grid, figure, &out),
        Command::OracleCheck { instances, kmax, seed, allocator } => check(instances, kmax, seed, allocator.as_deref()),
        Command::Version => {
            println!("ris-antijam {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e @ Error::Divergence { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::OracleMismatch(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
