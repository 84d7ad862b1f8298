//! Command-line driver: batch experiment runs and the verification suites.

mod artifacts;
mod config;
mod error;
mod runner;
mod suites;

use std::path::PathBuf;
use std::process::exit;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "sbl",
    version,
    about = "Kinetic relaxation solver for scalar balance laws with transport noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a TOML config file
    Run {
        /// Path to the experiment config
        config: PathBuf,
        /// Output directory for CSV artifacts and the manifest
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the stochastic seed from the config
        #[arg(long)]
        seed: Option<u64>,
        /// Override a config entry, e.g. --set solver.eps=1e-3
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run a named verification suite on canned configurations
    Verify {
        /// One of: contraction, comparison, entropy, decay, convergence,
        /// stochastic-consistency, all
        suite: String,
        /// Output directory for the JSON reports
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            set,
        } => runner::run(&config, &out, seed, &set),
        Command::Verify { suite, out } => suites::verify(&suite, &out),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        exit(e.code());
    }
}
