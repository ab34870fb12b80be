mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;
use output::Output;

fn run(cli: Cli) -> error::CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let out = Output {
        dir: cli.out_dir.clone(),
        config: serde_json::to_value(&cli).expect("config serialises"),
    };
    match &cli.command {
        Command::ExactQ(a) => commands::exact::run(a, &out),
        Command::McQ(a) => commands::mc::run(a, &out),
        Command::Limits(a) => commands::limits::run(a, &out),
        Command::TwoLevel(a) => commands::two_level::run(a, &out),
        Command::Reproduce(a) => commands::reproduce::run(a, &out),
        Command::Gen(a) => commands::gen::run(a, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
