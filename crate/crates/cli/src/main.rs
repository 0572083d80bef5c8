use std::process::ExitCode;

use clap::Parser;
use qinfluence::app::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(&Cli::parse()))
}
