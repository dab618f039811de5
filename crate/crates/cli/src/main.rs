//! `matchlab`: run matching mechanisms, print exact lotteries, sweep axioms
//! and run welfare experiments from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "matchlab",
    version,
    about = "Proposal-based matching mechanisms and their properties"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one mechanism from one initial order and print the matching.
    Run {
        /// Profile file.
        profile: PathBuf,
        /// Mechanism code, e.g. TLS, PFQ+G, GS, BOS-SEQ.
        mechanism: String,
        /// Initial agent order, e.g. 2,1,3,4 (default: file order).
        #[arg(long)]
        order: Option<String>,
        /// Print the step-by-step proposal table.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Print the random-order assignment matrix of a mechanism.
    Lottery {
        profile: PathBuf,
        /// Mechanism code; the `R-` prefix is implied.
        mechanism: String,
        /// Enumerate all n! orders (the default).
        #[arg(long, conflicts_with = "samples")]
        exact: bool,
        /// Average over this many sampled orders instead.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Check axioms over every profile of size n, or over sampled profiles.
    Axioms {
        /// Comma-separated mechanism codes.
        #[arg(long, value_delimiter = ',', required = true)]
        mechanisms: Vec<String>,
        #[arg(long)]
        n: usize,
        /// Comma-separated axioms: ex-post, ordinal, strategyproof, bound-k<k>.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "ex-post,ordinal,strategyproof,bound-k2"
        )]
        axioms: Vec<String>,
        /// All n!^n profiles (the default; n <= 4).
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        /// Check this many uniformly sampled profiles instead.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Run a welfare experiment described by a key=value config file; CSV out.
    Experiment {
        config: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Write a corpus of uniform random profiles.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Every profile of size n instead (n <= 4).
        #[arg(long)]
        exhaustive: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Test two mechanisms for equal outputs.
    Compare {
        left: String,
        right: String,
        /// Profile size for generated profiles.
        #[arg(long, required_unless_present = "profiles")]
        n: Option<usize>,
        /// Corpus file to compare on instead of generated profiles.
        #[arg(long)]
        profiles: Option<PathBuf>,
        /// All profiles and all orders (the default; n <= 4).
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        /// Sampled profiles, each run from the same number of sampled orders.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Args, Debug)]
struct Out {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
