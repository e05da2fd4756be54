//! `robin-sep <scenario> --config FILE [overrides]`
//!
//! Exit codes: 0 pass, 2 config error, 3 numeric failure, 4 invariant
//! failure. `ROBIN_SEP_OUT` sets the default output root for relative
//! output directories.

mod config;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{RawConfig, Scenario};
use scenarios::{RunOutcome, Runner};

#[derive(Parser, Debug)]
#[command(
    name = "robin-sep",
    version,
    about = "Exclusion process with Robin reservoirs: simulation, PDE and rate-functional toolkit"
)]
struct Cli {
    /// Scenario: simulate | hydro | controlled | spectral | rate | hydro-limit | entropy | rare-event
    scenario: String,
    /// Sectioned key-value configuration file
    #[arg(long)]
    config: PathBuf,
    /// Override the RNG seed from the file
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Cap worker threads (0 = library default)
    #[arg(long)]
    jobs: Option<usize>,
    /// Generic override, repeatable: --set section.key=value
    #[arg(long = "set")]
    overrides: Vec<String>,
}

fn run() -> Result<u8, (u8, String)> {
    let cli = Cli::parse();
    let scenario = Scenario::parse(&cli.scenario).map_err(|e| (2, e.to_string()))?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| (2, format!("cannot read config {:?}: {e}", cli.config)))?;
    let mut raw = RawConfig::parse(&text).map_err(|e| (2, e.to_string()))?;
    for o in &cli.overrides {
        raw.set_override(o).map_err(|e| (2, e.to_string()))?;
    }
    if let Some(seed) = cli.seed {
        raw.set_override(&format!("run.seed={seed}"))
            .map_err(|e| (2, e.to_string()))?;
    }
    if let Some(dir) = &cli.out_dir {
        raw.set_override(&format!("run.out_dir={}", dir.display()))
            .map_err(|e| (2, e.to_string()))?;
    }
    if let Some(jobs) = cli.jobs {
        raw.set_override(&format!("run.jobs={jobs}"))
            .map_err(|e| (2, e.to_string()))?;
    }
    let config_dir = cli
        .config
        .parent()
        .unwrap_or(std::path::Path::new("."))
        .to_path_buf();
    let config = raw.build(&config_dir).map_err(|e| (2, e.to_string()))?;

    #[cfg(feature = "parallel")]
    if config.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build_global();
    }

    let out_root = std::env::var_os("ROBIN_SEP_OUT").map(PathBuf::from);
    let mut runner =
        Runner::new(scenario, config, out_root.as_deref()).map_err(|e| (3, format!("{e:#}")))?;
    let outcome = runner
        .dispatch(scenario)
        .map_err(|e| (3, format!("{e:#}")))?;
    match outcome {
        RunOutcome::Pass => {
            println!("ok: artifacts in {}", runner.out_dir.display());
            Ok(0)
        }
        RunOutcome::NumericFailure(msg) => Err((3, msg)),
        RunOutcome::InvariantFailure => Err((
            4,
            format!(
                "invariant failure; see {}",
                runner.out_dir.join("manifest.json").display()
            ),
        )),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("robin-sep: {msg}");
            ExitCode::from(code)
        }
    }
}
