//! `lineshape`: simulate, synthesize, calibrate and fit qubit transition
//! line profiles, and tabulate the fits.
//!
//! Every file written is accompanied by `<file>.manifest.json`. Exit status
//! is 0 on success, 1 when a run fails and 2 for usage or configuration
//! errors.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod args;
mod commands;
mod failure;
mod manifest;

use commands::{calibrate, fit, report, simulate, synth};

#[derive(Parser, Debug)]
#[command(name = "lineshape", version, about = "Qubit transition line profiles for shaped pulses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Numerical and analytic profiles of one pulse as a wide CSV
    Simulate(simulate::SimulateArgs),
    /// Shot-sampled dataset from an experiment configuration
    Synth(synth::SynthArgs),
    /// Least-squares area-correction parameter for an RZC model
    #[command(name = "calibrate-a")]
    CalibrateA(calibrate::CalibrateArgs),
    /// Fit an analytic model and the Lorentzian baseline to a dataset
    Fit(fit::FitArgs),
    /// MAE/SDRF table from fit results
    Report(report::ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Synth(a) => synth::run(a),
        Command::CalibrateA(a) => calibrate::run(a),
        Command::Fit(a) => fit::run(a),
        Command::Report(a) => report::run(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
