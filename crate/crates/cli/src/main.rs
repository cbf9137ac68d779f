//! `contextrec` command-line entry point.

mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn category(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<contextrec::Error>() {
            return e.category();
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "parse";
        }
    }
    "error"
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            anyhow::bail!(contextrec::Error::InvalidParam("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let w = cli.workers;
    match &cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Ingest(a) => commands::ingest(a, w),
        Command::Generate(a) => commands::generate(a, w),
        Command::Train(a) => commands::train(a, w),
        Command::Experiment(a) => commands::experiment(a, w),
        Command::Report(a) => commands::report(a, w),
        Command::Graph(a) => commands::graph(a, w),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {err:#}", category(&err));
            ExitCode::from(1)
        }
    }
}
