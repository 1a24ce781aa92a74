mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::config::{parse_config, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = parse_config(cli).and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(dir) => {
            println!("outputs in {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mchwave: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
