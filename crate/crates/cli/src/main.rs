//! `neqfridge`: steady states, heat currents and figure data for the
//! three-qubit absorption refrigerator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};

use commands::CliError;
use config::Overrides;

#[derive(Parser)]
#[command(name = "neqfridge", version, about = "Three-qubit absorption refrigerator: steady states, currents, figure data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady state, heat currents and COPs at one point (JSON).
    Steady {
        #[command(flatten)]
        o: Overrides,
    },
    /// Data for one figure panel set (CSV into the --out directory).
    Figure {
        /// fig3, fig4, fig5 or fig6.
        name: String,
        #[command(flatten)]
        o: Overrides,
    },
    /// One-dimensional closed-form sweep (CSV).
    Sweep {
        /// beta3, e1 or gamma.
        #[arg(long)]
        axis: String,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        /// Comma-separated output names.
        #[arg(long, default_value = "d,Q1g,eta_g")]
        outputs: String,
        #[command(flatten)]
        o: Overrides,
    },
    /// Maximum cooling power and minimum COP over E1 (JSON).
    Maximize {
        #[command(flatten)]
        o: Overrides,
    },
    /// Invariant suite at the reference point or a seeded random grid (JSON).
    Validate {
        /// Named point instead of a random grid; only `p0`.
        #[arg(long)]
        point: Option<String>,
        /// Use the sign-flipped population exponent in the closed forms.
        #[arg(long, hide = true)]
        flip_population_sign: bool,
        #[command(flatten)]
        o: Overrides,
    },
    /// Random-refrigerator ensemble (CSV).
    Ensemble {
        #[command(flatten)]
        o: Overrides,
    },
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("NEQFRIDGE_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::User(format!("NEQFRIDGE_THREADS must be a positive integer (got {value:?})")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::User(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Steady { o } => commands::steady(o.resolve()?),
        Command::Figure { name, o } => commands::figure(&name, o.resolve()?),
        Command::Sweep { axis, from, to, outputs, o } => commands::sweep_cmd(o.resolve()?, &axis, from, to, &outputs),
        Command::Maximize { o } => commands::maximize(o.resolve()?),
        Command::Validate { point, flip_population_sign, o } => {
            commands::validate(o.resolve()?, point.as_deref(), flip_population_sign)
        }
        Command::Ensemble { o } => commands::ensemble(o.resolve()?),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}
