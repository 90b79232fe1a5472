//! `potts`: command-line harness around `potts-core`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cache;
mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use potts_core::free_energy::Regime;

use crate::config::{parse_regime, CommonArgs};

#[derive(Parser)]
#[command(
    name = "potts",
    version,
    about = "Experiments on the p-tensor Curie-Weiss Potts model"
)]
struct Cli {
    /// Validate the configuration and print it without computing anything
    #[arg(long, global = true)]
    dry_run: bool,

    /// Worker threads (default: one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LawFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
pub enum Command {
    /// Regime of (β, h): Regular, Critical, SpecialI or SpecialII
    Classify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = potts_core::free_energy::DEFAULT_TOL_ZERO)]
        tol_zero: f64,
    },
    /// Global maximizers of the free energy
    Maximize {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Critical inverse temperature at h = 0
    BetaC {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Exact law of the magnetization vector
    ExactLaw {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'n', long)]
        n: Option<u32>,
        #[arg(long)]
        cap: Option<u128>,
        /// Fall back to Glauber sampling above the enumeration cap
        #[arg(long)]
        mcmc: bool,
        #[arg(long, value_enum, default_value_t = LawFormat::Json)]
        format: LawFormat,
    },
    /// Distance to the limit law across an N grid; writes rates.csv and rates.json
    Rates {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated, strictly increasing
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<u32>>,
        #[arg(long)]
        eps: Option<f64>,
        /// Exit with code 3 unless the point classifies as this regime
        #[arg(long, value_parser = parse_regime)]
        expected: Option<Regime>,
        #[arg(long)]
        cap: Option<u128>,
        #[arg(long)]
        mcmc: bool,
    },
    /// Law of the pseudolikelihood estimator; writes mpl.csv and mpl.json
    Mpl {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'n', long)]
        n: Option<u32>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Hessian of the dual function at a maximizer, a profile point or a special point
    Lambda {
        #[command(flatten)]
        common: CommonArgs,
        /// Evaluate at the profile point x_s instead of the first maximizer
        #[arg(long)]
        s: Option<f64>,
        /// Use a numerically located special point of (p, q); β and h are ignored
        #[arg(long)]
        special: bool,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Table of a generalized normal CDF
    LimitCdf {
        #[arg(long, default_value_t = 4)]
        shape: u32,
        /// Scale moment E|X|^shape
        #[arg(long)]
        moment: f64,
        #[arg(long, default_value_t = -3.0)]
        from: f64,
        #[arg(long, default_value_t = 3.0)]
        to: f64,
        #[arg(long, default_value_t = 121)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            eprintln!("error: cannot start {k} worker threads: {e}");
            std::process::exit(1);
        }
    }
    if let Err(e) = commands::run(cli.command, cli.dry_run) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
