use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

use output::Format;

/// Construct, decode and evaluate lattice quantizers.
#[derive(Debug, Parser)]
#[command(name = "latquant", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,

    /// Emit CSV (tabular commands only).
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the featured lattices, or describe one.
    Catalog { name: Option<String> },

    /// Closest lattice point to x: `decode NAME x1 .. xn` or `decode --matrix FILE x1 .. xn`.
    Decode {
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(required = true, allow_negative_numbers = true, num_args = 1..)]
        args: Vec<String>,
    },

    /// Monte Carlo estimate of the normalized second moment.
    Nsm {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        mc: MonteCarlo,
    },

    /// Error covariance and its departure from a multiple of the identity.
    Whiteness {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        mc: MonteCarlo,
    },

    /// Optimal scales and predicted NSM of a product such as `K12*Z` or `A2*Z@0.9`.
    Product {
        spec: String,
        /// Also estimate the NSM of the product by Monte Carlo.
        #[arg(long)]
        estimate: bool,
        #[command(flatten)]
        mc: MonteCarlo,
    },

    /// Stack shifted copies of a base lattice at a given spacing.
    Laminate {
        #[command(flatten)]
        target: Target,
        /// Offset of each layer, comma separated; defaults to zero.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        offset: Vec<f64>,
        /// Layer spacing.
        #[arg(long)]
        spacing: f64,
        #[arg(long)]
        estimate: bool,
        #[command(flatten)]
        mc: MonteCarlo,
    },

    /// Lower and upper bounds on the NSM with the best reported lattices.
    Bounds {
        #[arg(long, conflicts_with = "n_max")]
        n: Option<usize>,
        #[arg(long, default_value_t = 48)]
        n_max: usize,
    },

    /// Best reported lattices, bounds and best products for each dimension.
    Table {
        #[arg(long, default_value_t = 48)]
        n_max: usize,
    },

    /// Run the whitening, saddle and factorization experiments.
    Verify {
        #[command(subcommand)]
        experiment: Option<Experiment>,
        #[command(flatten)]
        mc: MonteCarlo,
    },
}

#[derive(Debug, Subcommand)]
enum Experiment {
    /// Transform by exp(beta·R̄); defaults to the rectangle diag(1,2).
    Whitening {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = -0.1, allow_negative_numbers = true)]
        beta: f64,
    },
    /// Offset the second factor of a two-factor product by epsilon·H.
    Saddle {
        #[arg(default_value = "Z*Z")]
        spec: String,
        /// H in row-major order (second dimension rows, first dimension columns).
        #[arg(long, value_delimiter = ',', default_value = "0.5", allow_negative_numbers = true)]
        offset: Vec<f64>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        epsilon: f64,
    },
    /// Blockwise decoding, error additivity and block-diagonal covariance.
    Factorization {
        #[arg(default_value = "D4*Z")]
        spec: String,
        #[arg(long, default_value_t = 10_000)]
        points: usize,
    },
    /// All three with their defaults.
    All,
}

/// A catalog name or a generator file.
#[derive(Debug, Args)]
struct Target {
    name: Option<String>,
    /// Generator matrix file: `n`, then n rows of n decimals or `p/q` rationals.
    #[arg(long, conflicts_with = "name")]
    matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MonteCarlo {
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

/// Bad invocation detected after argument parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Text
    };
    match commands::run(cli.command, format) {
        Ok(status) => status,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
