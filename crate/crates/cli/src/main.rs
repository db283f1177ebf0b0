use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod output;
mod parse;
mod state_spec;

use error::CliError;
use state_spec::StateKind;

/// Quantum predictions and local hidden-variable simulations for small
/// bipartite systems.
#[derive(Debug, Parser)]
#[command(name = "nonlocal-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Flip-operator witness and partial-transpose test for a state.
    Witness {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CHSH value, Horodecki quantity M and settings for a two-qubit state.
    Chsh {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        settings: SettingsArgs,
        /// Use the settings that reach 2√M (the default when no settings
        /// are given).
        #[arg(long)]
        optimal: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo simulation of a local model, compared with the Born rule.
    Simulate {
        #[arg(value_enum)]
        model: Model,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        settings: SettingsArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filtered Horodecki quantity over a grid of ε, or Popescu filtering.
    FilterScan {
        #[arg(value_enum)]
        family: ScanFamily,
        #[arg(long, default_value_t = 0.25)]
        q: f64,
        /// Local dimension for `popescu`; all of 3..=8 when omitted.
        #[arg(long)]
        d: Option<usize>,
        /// Comma-separated ε values.
        #[arg(long, value_delimiter = ',', value_parser = parse::epsilon)]
        eps_grid: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the full acceptance suite and writes a report.
    Reproduce {
        /// Output directory for report.json, tables.csv and summary.txt.
        #[arg(long, default_value = "reproduce-out")]
        out: PathBuf,
        #[command(flatten)]
        mc: McArgs,
    },
}

#[derive(Debug, Args)]
struct StateArgs {
    /// Named state; omit when `--state-file` is given.
    #[arg(value_enum)]
    kind: Option<StateKind>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    /// JSON state {dA, dB, entries: [[re, im], ...]}.
    #[arg(long)]
    state_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SettingsArgs {
    /// Alice's first direction, e.g. `0,0,1`.
    #[arg(long, value_parser = parse::bloch, allow_hyphen_values = true)]
    x: Option<nonlocal_lab::BlochVector>,
    /// Alice's second direction.
    #[arg(long, value_parser = parse::bloch, allow_hyphen_values = true)]
    x2: Option<nonlocal_lab::BlochVector>,
    /// Bob's first direction.
    #[arg(long, value_parser = parse::bloch, allow_hyphen_values = true)]
    y: Option<nonlocal_lab::BlochVector>,
    /// Bob's second direction.
    #[arg(long, value_parser = parse::bloch, allow_hyphen_values = true)]
    y2: Option<nonlocal_lab::BlochVector>,
}

#[derive(Debug, Args)]
struct McArgs {
    /// Sample count; scientific notation such as `1e6` is accepted.
    #[arg(long, value_parser = parse::count, default_value = "1e6")]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Werner,
    Gd,
    Epr1bit,
    Hirsch,
    PovmLift,
    Barrett,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScanFamily {
    RhoG,
    RhoGPrime,
    Popescu,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Witness { state, format, out } => commands::witness::run(&state, format, out.as_deref()),
        Command::Chsh {
            state,
            settings,
            optimal,
            out,
        } => commands::chsh::run(&state, &settings, optimal, out.as_deref()),
        Command::Simulate {
            model,
            d,
            q,
            settings,
            mc,
            format,
            out,
        } => commands::simulate::run(model, d, q, &settings, &mc, format, out.as_deref()),
        Command::FilterScan {
            family,
            q,
            d,
            eps_grid,
            format,
            out,
        } => commands::filter_scan::run(family, q, d, eps_grid, format, out.as_deref()),
        Command::Reproduce { out, mc } => commands::reproduce::run(&out, &mc),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
