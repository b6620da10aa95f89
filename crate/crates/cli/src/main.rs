//! `sgrass`: design sparse Grassmannian codebooks and evaluate them.

mod audit;
mod design;
mod eval;
mod output;
mod papr;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "sgrass",
    version,
    about = "Sparse Grassmannian codebook design and evaluation"
)]
struct Cli {
    /// Worker threads for Monte Carlo runs (results do not depend on it).
    #[arg(long, global = true, env = "SGRASS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a codebook and write it as JSON.
    Design(design::DesignArgs),
    /// Minimum chordal distance of codebook files.
    Mcd(eval::McdArgs),
    /// Paired achievable-rate curves under Rayleigh fading.
    Rate(eval::RateArgs),
    /// Selected effective-gain CDFs under Rician fading.
    GainCdf(eval::GainCdfArgs),
    /// PAPR CCDFs of precoded OFDM / DFT-s-OFDM.
    Papr(papr::PaprArgs),
    /// Complexity and real-variable counts.
    Audit(audit::AuditArgs),
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match &cli.command {
        Command::Design(a) => design::run(a),
        Command::Mcd(a) => eval::mcd(a),
        Command::Rate(a) => eval::rate(a),
        Command::GainCdf(a) => eval::gain_cdf(a),
        Command::Papr(a) => papr::run(a),
        Command::Audit(a) => audit::run(a),
    }
}
