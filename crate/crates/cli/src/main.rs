//! `adcert`: generate amplitude-damping codes, certify their combinatorial
//! conditions exactly, and sweep fidelity bounds over damping strengths.
//!
//! Exit codes: 0 success, 2 configuration error, 3 certification failure,
//! 4 numerical bound violation.

mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adcert", version, about = "Approximate error correction certification for amplitude damping codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the weight table of the order-t permutation-invariant code.
    GenCode {
        /// Correction order; the code uses 9t^2 + 4t qubits.
        #[arg(long)]
        t: u32,
        /// Output path for the code JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Certify the exact moment conditions of a code file.
    Certify {
        /// Path to a code JSON file.
        #[arg(long)]
        code: PathBuf,
        /// Order to certify against.
        #[arg(long)]
        t: u32,
    },
    /// Evaluate bounds and fidelities over a damping-strength grid.
    Sweep {
        /// Path to a code JSON file.
        #[arg(long)]
        code: PathBuf,
        /// Comma-separated strictly increasing grid inside (0, 1).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        gammas: Vec<f64>,
        /// Seed for the random density draws of the floor check.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving sweep.csv and kl_reports.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustively verify the alternating-sum and binomial-ratio identities.
    VerifyIdentities {
        /// Largest n for the alternating binomial sums.
        #[arg(long, default_value_t = 50)]
        max_n: u32,
        /// Largest m for the binomial ratio tuples.
        #[arg(long, default_value_t = 20)]
        max_m: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenCode { t, out } => commands::cmd_gen_code(t, &out),
        Command::Certify { code, t } => commands::cmd_certify(&code, t),
        Command::Sweep {
            code,
            gammas,
            seed,
            out,
        } => commands::cmd_sweep(&code, &gammas, seed, &out),
        Command::VerifyIdentities { max_n, max_m } => {
            commands::cmd_verify_identities(max_n, max_m)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
