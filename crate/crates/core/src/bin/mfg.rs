use clap::Parser;

use mfg_core::cli::{self, RunConfig};

fn main() {
    cli::init_logging();
    let config = RunConfig::parse();
    match cli::run(&config) {
        Ok(outcome) => {
            for file in &outcome.files {
                println!("{}", file.display());
            }
            std::process::exit(outcome.exit_code);
        }
        Err(failure) => {
            eprintln!("error: {}", failure.error);
            std::process::exit(failure.code);
        }
    }
}
