//! fermitherm: certifies the semiclassical bounds satisfied by thermal
//! states of the harmonic trap, over deterministic CSV sweeps.

mod commands;
mod config;
mod csvio;

use clap::{Parser, Subcommand};
use config::SweepConfig;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "fermitherm", version, about = "Thermal-state spectral calculus and bound verification")]
struct Cli {
    /// JSON config file; flat keys, CLI flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output CSV path (commands that emit tables).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Semiclassical Schatten prefactor exponent: d (dimension) or 3.
    #[arg(long, value_parser = ["d", "3"], global = true)]
    schatten_exponent: Option<String>,

    /// Dense-path dimension ceiling.
    #[arg(long, global = true)]
    dense_ceiling: Option<usize>,

    /// Relative slack applied to bound comparisons.
    #[arg(long, global = true)]
    slack: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every configured inequality over the parameter grid.
    Verify {
        /// Test hook: multiply the main-bound constant by this factor.
        #[arg(long, hide = true, default_value_t = 1.0)]
        corrupt_cdp: f64,
    },
    /// Norms along a β sweep with a log-log slope report.
    SweepScaling,
    /// Phase-space samples of the thermal Wigner Gaussian and the
    /// closed-vs-computed moment table.
    Wigner,
    /// Solve μ for one configuration and print μ, Z_μ, Z_β.
    MuSolve {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        hbar: f64,
        #[arg(long)]
        lambda: f64,
    },
    /// Run the dense-oracle equivalence suite.
    Selftest,
}

fn run() -> anyhow::Result<i32> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    let mut cfg = SweepConfig::load(cli.config.as_deref())?;
    if let Some(e) = cli.schatten_exponent {
        cfg.schatten_exponent = e;
    }
    if let Some(c) = cli.dense_ceiling {
        cfg.dense_ceiling = c;
    }
    if let Some(s) = cli.slack {
        cfg.slack = s;
    }

    let out_or = |default: &str| -> PathBuf {
        cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
    };

    match cli.command {
        Command::Verify { corrupt_cdp } => {
            commands::cmd_verify(&cfg, &out_or("verify.csv"), corrupt_cdp)
        }
        Command::SweepScaling => commands::cmd_sweep_scaling(&cfg, &out_or("sweep_scaling.csv")),
        Command::Wigner => commands::cmd_wigner(&cfg, &out_or("wigner.csv")),
        Command::MuSolve {
            d,
            beta,
            hbar,
            lambda,
        } => commands::cmd_mu_solve(&cfg, d, beta, hbar, lambda),
        Command::Selftest => commands::cmd_selftest(),
    }
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(commands::EXIT_USAGE);
        }
    }
}
