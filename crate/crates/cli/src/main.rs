mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use superres_core::Error;

use commands::Format;
use config::{RawConfig, RunConfig};

/// Quantum and classical precision limits for resolving two incoherent point sources.
#[derive(Debug, Parser)]
#[command(name = "superres", version)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed for Monte Carlo runs; overrides the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Override one configuration key, e.g. `--set r=0.3`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Momentum-space moments of the PSF and the scene geometry.
    Moments,
    /// Quantum and direct-imaging precision limits for the scene.
    Precision,
    /// Distance-limit `(α, ε)` or azimuth-precision `(r, α)` scan.
    Scan,
    /// Monte Carlo maximum-likelihood distance estimation.
    Simulate,
    /// Closed forms against the numerical oracle.
    Verify {
        /// Multiplies every verification tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. } | Error::Singular(_) => EXIT_NUMERICAL,
        Error::Domain(_) | Error::InvalidGrid(_) | Error::GridFile { .. } | Error::Io(_) => EXIT_VALIDATION,
    }
}

fn load_config(cli: &Cli) -> superres_core::Result<RunConfig> {
    let mut raw = match &cli.config {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    for o in &cli.overrides {
        raw.set_pair(o)?;
    }
    if let Some(seed) = cli.seed {
        raw.set("seed", &seed.to_string())?;
    }
    RunConfig::from_raw(&raw)
}

fn configure_threads(n: Option<usize>) -> Result<(), String> {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err("--threads must be at least 1".into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    Ok(())
}

fn run(cli: &Cli) -> superres_core::Result<bool> {
    let cfg = load_config(cli)?;
    let out = match cli.command {
        Command::Moments => commands::moments(&cfg, cli.format)?,
        Command::Precision => commands::precision(&cfg, cli.format)?,
        Command::Scan => commands::scan(&cfg, cli.format)?,
        Command::Simulate => commands::simulate(&cfg, cli.format)?,
        Command::Verify { tolerance_scale } => commands::verify(&cfg, tolerance_scale)?,
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &out.body)?;
            if let Some(meta) = &out.sidecar {
                let mut side = path.clone().into_os_string();
                side.push(".meta");
                std::fs::write(side, meta)?;
            }
        }
        None => print!("{}", out.body),
    }
    Ok(out.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFICATION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
