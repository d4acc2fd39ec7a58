mod commands;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{
    BuildPdaArgs, CompareArgs, ConverseArgs, GapsArgs, SimulateArgs, TransformArgs, VerifyArgs,
};
use report::{CliError, RunReport};

/// Placement delivery arrays and multiaccess coded caching.
#[derive(Parser, Debug)]
#[command(name = "macc", version)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a PDA in the plain-text grid format.
    BuildPda(BuildPdaArgs),
    /// Check C1-C5 on a PDA file.
    Verify(VerifyArgs),
    /// Turn a PDA into a multiaccess scheme descriptor.
    Transform(TransformArgs),
    /// Run placement, delivery and decoding for a scheme descriptor.
    Simulate(SimulateArgs),
    /// Tabulate loads of the compared schemes as CSV.
    Compare(CompareArgs),
    /// Evaluate the converse bound at one point.
    Converse(ConverseArgs),
    /// Evaluate the gap inequalities at one (K, L).
    Gaps(GapsArgs),
}

fn configure_threads() {
    if let Ok(v) = std::env::var("MACC_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("ignoring MACC_THREADS={v:?}"),
        }
    }
}

fn run(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let report = RunReport::new(argv, cli.seed);
    match &cli.command {
        Command::BuildPda(a) => commands::build_pda(a),
        Command::Verify(a) => commands::verify(a, report),
        Command::Transform(a) => commands::transform(a, report),
        Command::Simulate(a) => commands::simulate(a, cli.seed, report),
        Command::Compare(a) => commands::compare(a),
        Command::Converse(a) => commands::converse(a, report),
        Command::Gaps(a) => commands::gaps(a, report),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    configure_threads();
    let start = Instant::now();
    let outcome = run(&cli, &argv);
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
