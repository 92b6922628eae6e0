//! `usimul` command-line tool.
//!
//! Exit status: 0 success, 2 usage error, 3 I/O or malformed input,
//! 4 invalid configuration, 5 failed verification.

mod args;
mod commands;
mod config;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run() -> Result<(), CliError> {
    let argv = config::expand_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return Err(CliError::Usage(String::new()));
        }
        Err(e) => {
            // --help / --version
            let _ = e.print();
            return Ok(());
        }
    };
    match &cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::MakeWeak(a) => commands::make_weak(a),
        Command::Train(a) => commands::train_cmd(a),
        Command::Eval(a) => commands::eval(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            if !msg.is_empty() {
                eprintln!("usimul: {msg}");
            }
            e.exit_code()
        }
    }
}
