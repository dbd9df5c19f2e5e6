use std::process::ExitCode;

use clap::Parser;
use shewpt::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    match cli::run(&args) {
        Ok(report) => {
            eprint!("{}", report.summary());
            match serde_json::to_string_pretty(&report) {
                Ok(text) => println!("{text}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(cli::EXIT_COMPARISON_FAILED as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
