mod args;
mod bench;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Status;

fn threads(flag: Option<usize>) -> anyhow::Result<Option<usize>> {
    match std::env::var("COVER_THREADS") {
        Ok(v) => Ok(Some(v.trim().parse().map_err(|_| anyhow::anyhow!("COVER_THREADS must be a positive integer, got {v:?}"))?)),
        Err(_) => Ok(flag),
    }
}

fn run(cli: &Cli) -> anyhow::Result<Status> {
    if let Some(n) = threads(cli.threads)? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Build(a) => commands::build(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sample(a) => commands::sample(a),
        Command::Embed(a) => commands::embed(a),
        Command::Lowerbound(a) => commands::lowerbound(a),
        Command::Bound(a) => commands::bound(a),
        Command::Bench(a) => bench::run(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
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
    match run(&cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
