use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use fredholm_cli::{run, Cli, Outcome};
use fredholm_core::ProblemRegistry;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = run(&cli, &ProblemRegistry::builtin());
    match &outcome {
        Outcome::Success => {}
        Outcome::Usage(e) => eprintln!("error: {e:#}"),
        Outcome::Numerical(msg) => eprintln!("numerical failure: {msg}"),
    }
    ExitCode::from(outcome.exit_code())
}
