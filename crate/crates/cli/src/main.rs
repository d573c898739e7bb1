//! `nqp-sor`: generate problems, run the projected SOR solvers, scan fixed
//! relaxation parameters against the adaptive variants, and deblur images.

mod args;
mod cmd;
mod output;
mod report;
mod source;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => cmd::gen::run(&a),
        Command::Solve(a) => cmd::solve::run(&a),
        Command::Compare(a) => cmd::compare::run(&a),
        Command::Denoise(a) => cmd::denoise::run(&a),
    };
    match outcome {
        Ok(o) => {
            println!("{}", o.summary_line());
            if o.all_converged() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
