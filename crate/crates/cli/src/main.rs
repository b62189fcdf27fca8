use std::process::ExitCode;

use clap::Parser;
use stroketrace_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match stroketrace_cli::execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stroketrace: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
