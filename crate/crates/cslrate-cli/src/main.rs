//! `cslrate` — collapse rates and diffusion coefficients for rigid bodies
//! in the CSL model, from the command line.

// `!(x > 0)`-style guards intentionally catch NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod figures;
mod run;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Errors carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or invalid input file (exit 2).
    Schema(String),
    /// Inputs outside the hard domain of the requested method (exit 3).
    Regime(String),
    /// Output I/O failure (exit 4).
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Regime(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Schema(m) | CliError::Regime(m) | CliError::Io(m) => m,
        }
    }
}

/// Map a core error at computation time onto an exit class: geometry and
/// displacement mismatches are out-of-regime, everything else is an input
/// problem.
fn regime_err(e: cslrate_core::Error) -> CliError {
    use cslrate_core::Error::*;
    match e {
        InvalidGeometry(_) | UnsupportedDisplacement(_) => CliError::Regime(e.to_string()),
        _ => CliError::Schema(e.to_string()),
    }
}

#[derive(Parser)]
#[command(
    name = "cslrate",
    version,
    about = "CSL collapse-rate numerics for rigid bodies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Exact continuous-mass rate (cuboid/cube).
    Continuous,
    /// Small-displacement closed forms (cuboid, cylinder, sphere).
    SmallDelta,
    /// Exact lattice rate (requires a lattice section).
    Discrete,
    /// Ghirardi–Pearle–Rimini estimate.
    Gpr,
    /// Adler estimate.
    Adler,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    #[value(name = "fig1L")]
    Fig1L,
    #[value(name = "fig1R")]
    Fig1R,
    #[value(name = "fig2L")]
    Fig2L,
    #[value(name = "fig2R")]
    Fig2R,
    #[value(name = "fig5")]
    Fig5,
    #[value(name = "fig6")]
    Fig6,
    #[value(name = "fig7L")]
    Fig7L,
    #[value(name = "fig7R")]
    Fig7R,
    #[value(name = "fig8L")]
    Fig8L,
    #[value(name = "fig8R")]
    Fig8R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepVariable {
    /// Body length (cuboid lz, cube side, sphere radius, cylinder length).
    #[value(name = "L")]
    L,
    /// Displacement magnitude (direction kept, z if the scenario has none).
    #[value(name = "Delta")]
    Delta,
    /// Lattice constant (discrete method).
    #[value(name = "l")]
    LatticeConstant,
    /// Layer pair count of an alternating stack built from the first two
    /// layers of the scenario.
    #[value(name = "N_layers")]
    NLayers,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Large,
    Small,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a single rate from a scenario file and print a JSON report.
    Rate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "continuous")]
        method: MethodArg,
    },
    /// Emit the dataset of one of the named reference figures as CSV.
    Figure {
        #[arg(long, value_enum)]
        name: FigureName,
        #[arg(long)]
        out: PathBuf,
        /// Body density (nucleons/m³).
        #[arg(long)]
        density: Option<f64>,
        /// Localization distance r_C (m).
        #[arg(long)]
        rc: Option<f64>,
        /// Collapse rate λ (s⁻¹).
        #[arg(long)]
        lambda: Option<f64>,
        /// Square-face side d (m), where the figure has one.
        #[arg(long)]
        d: Option<f64>,
        /// Displacement Δ (m), where it is fixed.
        #[arg(long)]
        delta: Option<f64>,
        /// Lattice constant l (m), where the figure is discrete.
        #[arg(long)]
        l: Option<f64>,
        /// Fixed body length L (m), where the sweep is over Δ.
        #[arg(long)]
        big_l: Option<f64>,
    },
    /// η^zz report for a layered scenario: totals, decomposition, orders,
    /// enhancement over the equal-mass uniform body.
    Layering {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Sweep one variable of a scenario and emit CSV.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        variable: SweepVariable,
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        points: usize,
        #[arg(long, value_enum, default_value = "log")]
        scale: GridScale,
        /// Rate columns to fill (comma separated).
        #[arg(long, value_enum, value_delimiter = ',', default_value = "continuous")]
        methods: Vec<MethodArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measured discretization error of the continuum rate vs the
    /// leading-order predictor, swept over the lattice constant.
    EmError {
        #[arg(long, value_enum, default_value = "large")]
        regime: RegimeArg,
        #[arg(long, default_value_t = 1e-7)]
        rc: f64,
        #[arg(long, default_value_t = 1e-8)]
        lambda: f64,
        /// Body side L (m); defaults to 10·r_C (large) or 0.1·r_C (small).
        #[arg(long)]
        big_l: Option<f64>,
        /// Displacement Δ (m); defaults to 1e-3·r_C.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        l_min: Option<f64>,
        #[arg(long)]
        l_max: Option<f64>,
        #[arg(long, default_value_t = 11)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn configure_threads() {
    if let Ok(v) = std::env::var("CSLRATE_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                // 0 means auto; ignore failures from double initialization
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        } else {
            eprintln!("warning: ignoring unparsable CSLRATE_THREADS={v}");
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Rate {
            scenario: path,
            method,
        } => {
            let sc = scenario::load(&path)?;
            let report = run::rate_report(&sc, method)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            Ok(())
        }
        Command::Layering { scenario: path } => {
            let sc = scenario::load(&path)?;
            let report = run::layering_report(&sc)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            Ok(())
        }
        Command::Figure {
            name,
            out,
            density,
            rc,
            lambda,
            d,
            delta,
            l,
            big_l,
        } => {
            let overrides = figures::Overrides {
                density,
                rc,
                lambda,
                d,
                delta,
                l,
                big_l,
            };
            figures::emit_figure(name, &overrides, &out)
        }
        Command::Sweep {
            scenario: path,
            variable,
            min,
            max,
            points,
            scale,
            methods,
            out,
        } => {
            let sc = scenario::load(&path)?;
            figures::emit_sweep(&sc, variable, min, max, points, scale, &methods, &out)
        }
        Command::EmError {
            regime,
            rc,
            lambda,
            big_l,
            delta,
            l_min,
            l_max,
            points,
            out,
        } => figures::emit_em_error(regime, rc, lambda, big_l, delta, l_min, l_max, points, &out),
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
