use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = lqgpbe::Cli::parse();
    match lqgpbe::configure_threads().and_then(|_| lqgpbe::run(&cli)) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
