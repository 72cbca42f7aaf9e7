//! Command line front end: analyze N-functions, verify the inequality
//! suites, and solve configured periodic minimization instances with
//! reproducible, seeded reports.
//!
//! Exit codes for `solve`: 0 converged, 1 config error, 2 not converged,
//! 3 hypotheses rejected. `verify` exits 0 on a clean sweep and 2 when
//! violations were found.

mod analyze;
mod config;
mod report;
mod solve;
mod verify;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "orlicz-el", version, about = "Orlicz-space calculus and periodic action minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report indices, doubling verdicts, conjugate tables and ordering relations
    Analyze(analyze::Args),
    /// Run the seeded inequality sweeps (Young, Hoelder, Sobolev, Amemiya)
    Verify(verify::Args),
    /// Check the hypotheses of a configured instance, then minimize its action
    Solve(solve::Args),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => analyze::run(args),
        Command::Verify(args) => verify::run(args),
        Command::Solve(args) => solve::run(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
