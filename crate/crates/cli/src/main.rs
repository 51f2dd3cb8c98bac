use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod settings;

use settings::NumberList;

/// Extinction/invasion analysis of an invasive prey facing a generalist predator.
#[derive(Debug, Parser)]
#[command(name = "predwave", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print h1, h*, h**, h-, h+ and the transition zones for (E, alpha).
    Thresholds {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
    },
    /// List the homogeneous steady states and their stability.
    Steady {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
    },
    /// Integrate the space-free system and report where it settles.
    Ode {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
        /// Initial prey density.
        #[arg(long, env = "PREDWAVE_U0", allow_negative_numbers = true)]
        u0: Option<f64>,
        /// Initial predator density.
        #[arg(long, env = "PREDWAVE_V0", allow_negative_numbers = true)]
        v0: Option<f64>,
        /// Integration horizon.
        #[arg(long = "t-end", env = "PREDWAVE_T_END", allow_negative_numbers = true)]
        t_end: Option<f64>,
    },
    /// Run the reaction-diffusion system and classify the outcome.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        sim: Sim,
    },
    /// Analytic zone of (E, h) together with the simulated outcome.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        sim: Sim,
    },
    /// Bisect the simulated extinction/invasion threshold in h.
    Hcrit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        sim: Sim,
        /// Evaluate h_crit for each of these predator diffusion rates.
        #[arg(long = "d-list", env = "PREDWAVE_D_LIST")]
        d_list: Option<NumberList>,
    },
    /// Label a grid of the (E, h) plane.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        sim: Sim,
        #[command(flatten)]
        grid: SweepGrid,
        /// Rerun cells next to a simulated boundary at full resolution.
        #[arg(long, env = "PREDWAVE_REFINE")]
        refine: Option<bool>,
    },
    /// Re-run a command from its manifest and compare the output hashes.
    Replay {
        /// Manifest written by a previous run.
        manifest: PathBuf,
        /// Directory for the replayed outputs.
        #[arg(long, env = "PREDWAVE_OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output directory [default: predwave-out].
    #[arg(long, env = "PREDWAVE_OUT")]
    pub out: Option<PathBuf>,
    /// Encoding of the printed result [default: json].
    #[arg(long, env = "PREDWAVE_FORMAT")]
    pub format: Option<Format>,
    /// Flat TOML file whose keys mirror the flags.
    #[arg(long, env = "PREDWAVE_CONFIG")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Model {
    /// Encounter rate E.
    #[arg(long = "E", env = "PREDWAVE_E", allow_negative_numbers = true)]
    pub e: Option<f64>,
    /// Handling time h.
    #[arg(long = "h", env = "PREDWAVE_H", allow_negative_numbers = true)]
    pub h: Option<f64>,
    /// Conversion rate alpha.
    #[arg(long, env = "PREDWAVE_ALPHA", allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Predator growth rate r [default: 1].
    #[arg(long = "r", env = "PREDWAVE_R", allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Predator diffusion d [default: 1].
    #[arg(long = "d", env = "PREDWAVE_D", allow_negative_numbers = true)]
    pub d: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct Sim {
    /// Domain length.
    #[arg(long = "L", env = "PREDWAVE_L", allow_negative_numbers = true)]
    pub length: Option<f64>,
    /// Number of grid nodes.
    #[arg(long, env = "PREDWAVE_NX")]
    pub nx: Option<usize>,
    /// Time step.
    #[arg(long, env = "PREDWAVE_DT", allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Simulation horizon.
    #[arg(long = "t-end", env = "PREDWAVE_T_END", allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Initial front position [default: L/2].
    #[arg(long, env = "PREDWAVE_X0", allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Initial front steepness.
    #[arg(long, env = "PREDWAVE_K", allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Time discretisation: split or explicit.
    #[arg(long, env = "PREDWAVE_SCHEME")]
    pub scheme: Option<String>,
    /// Front detection level [default: half the expected plateau].
    #[arg(long = "front-level", env = "PREDWAVE_FRONT_LEVEL", allow_negative_numbers = true)]
    pub front_level: Option<f64>,
    /// Density below which prey counts as extinct.
    #[arg(long, env = "PREDWAVE_EPS", allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Time between history samples.
    #[arg(long = "sample-interval", env = "PREDWAVE_SAMPLE_INTERVAL", allow_negative_numbers = true)]
    pub sample_interval: Option<f64>,
    /// Comma-separated times at which snapshot CSVs are written.
    #[arg(long, env = "PREDWAVE_SNAPSHOTS")]
    pub snapshots: Option<NumberList>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepGrid {
    #[arg(long = "E-min", env = "PREDWAVE_E_MIN", allow_negative_numbers = true)]
    pub e_min: Option<f64>,
    #[arg(long = "E-max", env = "PREDWAVE_E_MAX", allow_negative_numbers = true)]
    pub e_max: Option<f64>,
    #[arg(long = "E-steps", env = "PREDWAVE_E_STEPS")]
    pub e_steps: Option<usize>,
    #[arg(long = "h-min", env = "PREDWAVE_H_MIN", allow_negative_numbers = true)]
    pub h_min: Option<f64>,
    #[arg(long = "h-max", env = "PREDWAVE_H_MAX", allow_negative_numbers = true)]
    pub h_max: Option<f64>,
    #[arg(long = "h-steps", env = "PREDWAVE_H_STEPS")]
    pub h_steps: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(status) => status.into(),
        Err(failure) => {
            eprintln!("predwave: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
