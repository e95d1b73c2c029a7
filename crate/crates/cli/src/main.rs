use std::process::exit;

use clap::Command;
use fewzero_cli::commands::{density, dist, figure, mc_zeros, verify};
use fewzero_cli::CliError;

fn main() {
    if let Ok(threads) = std::env::var("FEWZERO_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t >= 1 => {
                // a failure here means a pool already exists; keep going
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("error: FEWZERO_THREADS must be a positive integer");
                exit(2);
            }
        }
    }

    let matches = Command::new("fewzero")
        .about("Expected zeros of random sparse polynomials: densities, \
                distributions, and Monte Carlo checks")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(density::command())
        .subcommand(dist::command())
        .subcommand(figure::command())
        .subcommand(mc_zeros::command())
        .subcommand(verify::command())
        .get_matches();

    let result: Result<(), CliError> = match matches.subcommand() {
        Some(("density", sub)) => density::run(sub),
        Some(("dist", sub)) => dist::run(sub),
        Some(("figure", sub)) => figure::run(sub),
        Some(("mc-zeros", sub)) => mc_zeros::run(sub),
        Some(("verify", sub)) => verify::run(sub),
        _ => unreachable!("subcommand_required"),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        exit(e.exit_code());
    }
}
