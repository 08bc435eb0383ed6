//! Command-line front end.
//!
//! Every subcommand is deterministic: the same arguments, input files, and
//! seed produce bit-identical output files. Diagnostics go to standard
//! error, machine-readable results to standard output as tab-separated
//! `name\tvalue` lines. Exit codes: 0 success, 1 usage error, 2 runtime
//! error.

mod degrade;
mod eval;
mod extract_noise;
mod fit_kernel;
mod flags;
mod restore;
mod sample;
mod support;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::error::Error;

pub use flags::{KernelFlag, NoiseFlag};

/// Variational Bayes image restoration: blind denoising and
/// super-resolution under a blur-decimate-noise degradation model.
#[derive(Debug, Parser)]
#[command(name = "bayesr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Blur, decimate, and optionally add noise
    Degrade(degrade::DegradeArgs),
    /// Solve the variational posterior and write the restored image
    Restore(restore::RestoreArgs),
    /// Draw stochastic restorations from a posterior
    Sample(sample::SampleArgs),
    /// Compare two images under the evaluation conventions
    Eval(eval::EvalArgs),
    /// Harvest zero-mean noise patches from flat image regions
    ExtractNoise(extract_noise::ExtractNoiseArgs),
    /// Estimate a blur kernel from paired images by least squares
    FitKernel(fit_kernel::FitKernelArgs),
}

/// A subcommand failure, split by exit code.
#[derive(Debug)]
pub enum CmdError {
    /// Inconsistent or invalid arguments; exit code 1.
    Usage(String),
    /// I/O or numerical failure while working; exit code 2.
    Runtime(Error),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Runtime(e)
    }
}

pub(crate) fn usage(message: impl Into<String>) -> CmdError {
    CmdError::Usage(message.into())
}

/// Parses and runs one invocation, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Degrade(args) => degrade::execute(args),
        Command::Restore(args) => restore::execute(args),
        Command::Sample(args) => sample::execute(args),
        Command::Eval(args) => eval::execute(args),
        Command::ExtractNoise(args) => extract_noise::execute(args),
        Command::FitKernel(args) => fit_kernel::execute(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(CmdError::Usage(message)) => {
            eprintln!("error: {message}");
            1
        }
        Err(CmdError::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}
