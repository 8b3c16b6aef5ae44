//! `cgl-lab`: runs configured experiments and writes JSON reports and CSV series.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Outputs, RunError};
use config::{ConfigInvalid, ExperimentConfig};

const EXIT_INVALID: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "cgl-lab", version, about = "Controllability and mixing experiments for the complex Ginzburg-Landau equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment file; every key has a default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory of the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Prints nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Generator test, saturation chain and density diagnostic.
    Saturate,
    /// Unforced or constantly forced run with a trajectory CSV.
    Solve,
    /// Convergence of the impulse primitive as the window shrinks.
    ProbeLimit,
    /// Plans a steering control, replays it and reports the errors.
    Steer,
    /// Singular values of the linearized control-to-state map.
    Gramian,
    /// Distance between two noise-driven ensembles and its decay rate.
    Mix,
    /// Prints the normalized config as TOML and exits.
    Config,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ConfigInvalid> {
    let source = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| ConfigInvalid(vec![format!("{}: {e}", path.display())]))?,
        None => String::new(),
    };
    let mut cfg = config::parse(&source)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    config::validate(cfg, &source).map_err(|v| ConfigInvalid(v.iter().map(|x| x.to_string()).collect()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Command::Config = cli.command {
        match toml::to_string(&cfg) {
            Ok(s) => {
                print!("{s}");
                return ExitCode::SUCCESS;
            }
            Err(e) => {
                eprintln!("cannot render config: {e}");
                return ExitCode::FAILURE;
            }
        }
    }
    let out = match Outputs::new(&cfg.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("cannot create {}: {e}", cfg.out.display());
            return ExitCode::FAILURE;
        }
    };
    let result = match cli.command {
        Command::Saturate => commands::saturate(&cfg, &out),
        Command::Solve => commands::solve(&cfg, &out),
        Command::ProbeLimit => commands::probe_limit(&cfg, &out),
        Command::Steer => commands::steer(&cfg, &out),
        Command::Gramian => commands::gramian_cmd(&cfg, &out),
        Command::Mix => commands::mix(&cfg, &out),
        Command::Config => unreachable!("handled above"),
    };
    match result {
        Ok(lines) => {
            if !cli.quiet {
                for l in lines {
                    println!("{l}");
                }
                println!("outputs in {}", cfg.out.display());
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Core(e)) if e.is_numerical() => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(RunError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(RunError::Core(e)) => {
            eprintln!("invalid input: {e}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(RunError::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::FAILURE
        }
    }
}
