mod cli;
mod commands;
mod config;
mod error;
mod experiments;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::{CliError, EXIT_INVALID, EXIT_OK};

fn run() -> Result<(), CliError> {
    let argv = config::expand_args(std::env::args().collect())?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                e.exit();
            }
            let msg = e.to_string();
            let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            return Err(CliError::Config(first.trim_start_matches("error: ").to_string()));
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let start = Instant::now();
    let report = commands::run(&cli.command)?;
    if let Command::Gen(_) = cli.command {
        let graph = &report.result["graph"];
        if let Some(prefix) = &cli.out {
            let mut path = prefix.as_os_str().to_owned();
            path.push(".graph.json");
            std::fs::write(path, graph.to_string() + "\n")?;
        }
        println!("{graph}");
        return Ok(());
    }
    let summary = output::finish(&report, cli.out.as_deref(), cli.threads, start.elapsed())?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serialises"));
    if let Some(msg) = &report.failed {
        return Err(CliError::Failed(msg.clone()));
    }
    if let Some(msg) = &report.inconclusive {
        return Err(CliError::Inconclusive(msg.clone()));
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("{}", e.to_line());
            let code = e.exit_code();
            ExitCode::from(u8::try_from(code).unwrap_or(EXIT_INVALID as u8))
        }
    }
}
