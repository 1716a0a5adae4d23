use std::process::ExitCode;

use clap::Parser;
use stochastic_lv::cli::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
