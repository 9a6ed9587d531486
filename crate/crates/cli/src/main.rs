//! Scenario runner for the flow laboratory.
//!
//! Exit codes: 0 ok, 1 usage, 2 validation, 3 numerical failure.

mod commands;
mod config;
mod outputs;

use clap::{Parser, Subcommand};
use commands::{CmdError, RunContext};
use config::ScenarioConfig;
use outputs::OutputSink;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lbmcf",
    about = "Structured-grid laboratory for the line bundle mean curvature flow",
    disable_help_subcommand = true
)]
struct Cli {
    /// Scenario config file (sectioned key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSVs, snapshots and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Exit nonzero when any invariant check fails during the run.
    #[arg(long, global = true)]
    strict: bool,
    /// Seed for every random object in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = library default). Outputs are identical for any
    /// thread count.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the flow and emit history, snapshots and diagnostics.
    RunFlow,
    /// Run the frame-calculus identity suite at two resolutions.
    CheckIdentities,
    /// Density monotonicity ledger at the configured probe.
    Density,
    /// Self-similar family check over a negative-time window.
    ShrinkerCheck,
    /// Region K-quantity probe lattice.
    Knorm,
    /// Regularity scatter over a seeded flow ensemble.
    EpsProbe,
    /// Every stage configured in the scenario file.
    All,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind::*;
            let _ = e.print();
            return match e.kind() {
                DisplayHelp | DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    let Some(config_path) = &cli.config else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(1);
    };
    let config_text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: reading {}: {e}", config_path.display());
            return ExitCode::from(1);
        }
    };
    let cfg = match ScenarioConfig::parse(&config_text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let mut sink = match OutputSink::new(&cli.out, &config_text, cli.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let mut findings = Vec::new();
    let mut ctx = RunContext {
        cfg: &cfg,
        sink: &mut sink,
        strict_findings: &mut findings,
        seed: cli.seed,
    };

    let result = match cli.command {
        Command::RunFlow => commands::cmd_run_flow(&mut ctx),
        Command::CheckIdentities => commands::cmd_check_identities(&mut ctx),
        Command::Density => commands::cmd_density(&mut ctx),
        Command::ShrinkerCheck => commands::cmd_shrinker_check(&mut ctx),
        Command::Knorm => commands::cmd_knorm(&mut ctx),
        Command::EpsProbe => commands::cmd_eps_probe(&mut ctx),
        Command::All => commands::cmd_all(&mut ctx),
    };

    match result {
        Ok(()) => {}
        Err(CmdError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            return ExitCode::from(1);
        }
        Err(CmdError::Validation(msg)) => {
            eprintln!("validation error: {msg}");
            return ExitCode::from(2);
        }
        Err(CmdError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            return ExitCode::from(3);
        }
    }

    match sink.finalize() {
        Ok(hash) => println!("manifest {hash}"),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }

    if cli.strict && !findings.is_empty() {
        for f in &findings {
            eprintln!("strict: {f}");
        }
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
