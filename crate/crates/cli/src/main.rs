use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use regap_cli::commands;
use regap_cli::config::RawConfig;

/// Risk curves and desk-scale simulations for high-dimensional regression
/// with Gaussian designs.
#[derive(Parser)]
#[command(name = "regap", version, about)]
struct Cli {
    /// Worker threads (default: REGAP_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate channel curves, effective noises, and phase labels.
    Theory {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run estimators over seeded replicates; write traces and a summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Regenerate the headline table or figure at desk or paper scale.
    Reproduce {
        /// `table1` or `fig1`.
        #[arg(long)]
        target: String,
        /// `desk` or `paper`.
        #[arg(long, default_value = "desk")]
        scale: String,
        /// Optional config with overrides (p, replicates, grids, ...).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Project vectors from a CSV onto a permutation hull.
    Project {
        /// Hull spec records (`x ...` / `k ...` lines).
        #[arg(long)]
        spec: PathBuf,
        /// Input CSV: header row, then one vector per line.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "projected.csv")]
        out: PathBuf,
    },
}

fn init_threads(cli_threads: Option<usize>) {
    let n = cli_threads.or_else(|| {
        std::env::var("REGAP_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run(cli: Cli) -> Result<()> {
    init_threads(cli.threads);
    match cli.command {
        Command::Theory { config, seed, out } => {
            let cfg = RawConfig::load(&config)?;
            cfg.seed(seed).context("theory config")?;
            commands::theory::run(&cfg, &out)
        }
        Command::Simulate { config, seed, out } => {
            let cfg = RawConfig::load(&config)?;
            let seed = cfg.seed(seed).context("simulate config")?;
            commands::simulate::run(&cfg, &out, seed)
        }
        Command::Reproduce {
            target,
            scale,
            config,
            seed,
            out,
        } => {
            let cfg = match config {
                Some(path) => RawConfig::load(&path)?,
                None => RawConfig::default(),
            };
            let seed = cfg.seed(seed).unwrap_or(1);
            commands::reproduce::run(&target, &scale, &cfg, &out, seed)
        }
        Command::Project { spec, input, out } => commands::project::run(&spec, &input, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let solver_failure = err.chain().any(|cause| {
                matches!(
                    cause.downcast_ref::<regap_core::Error>(),
                    Some(regap_core::Error::Solver { .. })
                        | Some(regap_core::Error::Calibration(_))
                )
            });
            ExitCode::from(if solver_failure { 3 } else { 2 })
        }
    }
}
