//! `pmelab`: batch experiments on the porous medium equation.
//!
//! Exit status: 0 on success, 2 on invalid input, 3 when a computation fails
//! (the failure is also written to `error.json` in the output directory).

mod config;
mod error;
mod output;
mod pipelines;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::ExperimentConfig;
use error::CliError;
use output::Output;

#[derive(Parser)]
#[command(name = "pmelab", version, about = "Porous medium equation experiments")]
struct Cli {
    /// Directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the `seed` key of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the experiment named by the `kind` key (or by the file name).
    Run {
        path: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    Exponents(ConfigArg),
    Barenblatt(ConfigArg),
    Solve(ConfigArg),
    Norms(ConfigArg),
    Sweep(ConfigArg),
    Kinetic(ConfigArg),
    ScalingCheck(ConfigArg),
    VerifyAppendixB(ConfigArg),
    /// L¹ contraction report for two stored solver runs.
    Compare { run_a: PathBuf, run_b: PathBuf },
}

/// Kind named by a file such as `sweep_barenblatt.json`.
fn kind_from_path(path: &Path) -> Option<&'static str> {
    let stem = path.file_stem()?.to_str()?.replace('_', "-");
    pipelines::KINDS
        .iter()
        .filter(|k| stem.starts_with(*k))
        .max_by_key(|k| k.len())
        .copied()
}

fn resolve(command: Command) -> Result<(String, PathBuf), CliError> {
    let (fixed, path) = match command {
        Command::Run { path, config } => {
            let path = config.or(path).ok_or_else(|| CliError::invalid("run needs a configuration path"))?;
            (None, path)
        }
        Command::Exponents(a) => (Some("exponents"), a.config),
        Command::Barenblatt(a) => (Some("barenblatt"), a.config),
        Command::Solve(a) => (Some("solve"), a.config),
        Command::Norms(a) => (Some("norms"), a.config),
        Command::Sweep(a) => (Some("sweep"), a.config),
        Command::Kinetic(a) => (Some("kinetic"), a.config),
        Command::ScalingCheck(a) => (Some("scaling-check"), a.config),
        Command::VerifyAppendixB(a) => (Some("verify-appendix-b"), a.config),
        Command::Compare { .. } => unreachable!("handled separately"),
    };
    Ok((fixed.unwrap_or_default().to_string(), path))
}

fn experiment(cli: Cli) -> Result<(), (CliError, Option<Output>)> {
    if let Command::Compare { run_a, run_b } = &cli.command {
        let hash = pipelines::compare_hash(run_a, run_b).map_err(|e| (e, None))?;
        let out = Output::new(&cli.out, hash).map_err(|e| (e, None))?;
        return pipelines::compare(run_a, run_b, &out).map_err(|e| (e, Some(out)));
    }
    let (fixed, path) = resolve(cli.command).map_err(|e| (e, None))?;
    let mut cfg = ExperimentConfig::load(&path).map_err(|e| (e, None))?;
    let kind = match (fixed.as_str(), cfg.kind.as_deref()) {
        ("", Some(k)) => k.to_string(),
        ("", None) => kind_from_path(&path).ok_or((CliError::MissingKey("kind"), None))?.to_string(),
        (f, Some(k)) if f != k => {
            return Err((CliError::invalid(format!("configuration is for {k:?}, not {f:?}")), None));
        }
        (f, _) => f.to_string(),
    };
    if !pipelines::KINDS.contains(&kind.as_str()) {
        return Err((CliError::invalid(format!("unknown experiment kind {kind:?}")), None));
    }
    cfg.kind = Some(kind.clone());
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    let out = Output::new(&cli.out, cfg.hash()).map_err(|e| (e, None))?;
    log::info!("running {kind} into {}", cli.out.display());
    pipelines::run(&kind, &cfg, &out).map_err(|e| (e, Some(out)))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match experiment(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((e, out)) => {
            eprintln!("error: {e}");
            if let Some(out) = out {
                let body = json!({ "error": e.kind(), "module": e.module(), "message": e.to_string() });
                if let Err(w) = out.json("error.json", "error", &body) {
                    eprintln!("error: could not record the failure: {w}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
