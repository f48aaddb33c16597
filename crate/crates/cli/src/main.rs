//! `aerovln`: batch episode runs, evaluation suites, ablations, and a live
//! session service.

mod batch;
mod serve;
mod session;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aerovln",
    version,
    about = "Language-guided drone navigation in simulated scenes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its log.
    Run(batch::RunArgs),
    /// Run an evaluation suite from a JSON config.
    Suite(batch::SuiteArgs),
    /// Run an ablation matrix from a JSON config.
    Ablate(batch::AblateArgs),
    /// Serve live sessions over HTTP.
    Serve(serve::ServeArgs),
}

/// Exit status for configuration and usage errors.
const CONFIG_ERROR: u8 = 1;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(CONFIG_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => batch::run(args),
        Command::Suite(args) => batch::suite(args),
        Command::Ablate(args) => batch::ablate(args),
        Command::Serve(args) => serve::serve(args),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(CONFIG_ERROR)
    })
}
