mod args;
mod commands;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::{Failure, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    let code = match commands::run(&cli.global, &cli.command) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            code
        }
    };
    ExitCode::from(code as u8)
}
