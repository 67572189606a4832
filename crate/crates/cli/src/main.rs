use clap::Parser;

use peelab::config::Cli;
use peelab::experiments::{emit, run};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => match emit(&report, &cli) {
            Ok(code) => std::process::exit(code),
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(e.exit_code());
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
