//! `liesym` command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 no symmetry detected, 4 solver
//! did not converge.

mod config;
mod json;
mod run;

use clap::{Args, Parser, Subcommand};
use config::{load, CompleteConfig, DenoiseCmdConfig, DiscoverConfig, GenerateConfig};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "liesym", version, about = "Point-symmetry discovery for first-order ODEs from trajectory data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config for this command; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate an ODE and write trajectories as CSV.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Built-in equation: riccati, linear_x, linear_t, constant.
        #[arg(long)]
        equation: Option<String>,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        t1: Option<f64>,
        /// Comma-separated initial values x(t0).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        initial: Option<Vec<f64>>,
        #[arg(long)]
        points: Option<usize>,
        /// Relative noise level.
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Search a trajectory CSV for a point symmetry.
    Discover {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        max_degree: Option<u32>,
        /// Allow negative powers in the bases.
        #[arg(long)]
        allow_negative: bool,
        #[arg(long)]
        mu: Option<f64>,
        /// Also read the right-hand side off an evolution-aligned generator.
        #[arg(long)]
        readout: bool,
    },
    /// Rank-truncate, corrupt and recover a PGM image.
    Complete {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Denoise a CSV matrix and test it for rank deficiency by one.
    Denoise {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<String>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        eps_rank: Option<f64>,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Generate { common, equation, t0, t1, initial, points, sigma } => {
            let mut cfg: GenerateConfig = load(common.config.as_deref())?;
            if equation.is_some() {
                cfg.terms = None;
            }
            set(&mut cfg.equation, equation);
            set(&mut cfg.t0, t0);
            set(&mut cfg.t1, t1);
            set(&mut cfg.initial, initial);
            set(&mut cfg.points, points);
            set(&mut cfg.sigma, sigma);
            set(&mut cfg.seed, common.seed);
            std::fs::create_dir_all(&common.out)?;
            run::generate(&cfg, &common.out)
        }
        Command::Discover { common, input, max_degree, allow_negative, mu, readout } => {
            let mut cfg: DiscoverConfig = load(common.config.as_deref())?;
            set(&mut cfg.input, input);
            set(&mut cfg.detect.max_degree, max_degree);
            set(&mut cfg.detect.denoise.mu, mu);
            cfg.detect.allow_negative |= allow_negative;
            cfg.readout |= readout;
            set(&mut cfg.seed, common.seed);
            cfg.detect.denoise.seed = cfg.seed;
            std::fs::create_dir_all(&common.out)?;
            run::discover(&cfg, &common.out)
        }
        Command::Complete { common, input, rank, fraction, mu } => {
            let mut cfg: CompleteConfig = load(common.config.as_deref())?;
            set(&mut cfg.input, input);
            set(&mut cfg.rank, rank);
            set(&mut cfg.fraction, fraction);
            set(&mut cfg.denoise.mu, mu);
            set(&mut cfg.seed, common.seed);
            cfg.denoise.seed = cfg.seed;
            std::fs::create_dir_all(&common.out)?;
            run::complete(&cfg, &common.out)
        }
        Command::Denoise { common, input, mu, eps_rank } => {
            let mut cfg: DenoiseCmdConfig = load(common.config.as_deref())?;
            set(&mut cfg.input, input);
            set(&mut cfg.denoise.mu, mu);
            set(&mut cfg.denoise.eps_rank, eps_rank);
            set(&mut cfg.seed, common.seed);
            cfg.denoise.seed = cfg.seed;
            std::fs::create_dir_all(&common.out)?;
            run::denoise(&cfg, &common.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
