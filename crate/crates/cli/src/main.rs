mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;
use hamsim::Error;

use crate::args::{Cli, Command};

/// Process exit status for each error class; clap's own usage errors also exit 2.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Usage(_) => 2,
        Error::Io { .. } => 3,
        Error::Parse { .. } => 4,
        Error::Symmetry { .. } => 5,
        Error::Domain(_) | Error::DegenerateWeight(_) => 6,
        Error::Numerical { .. } | Error::OracleFault { .. } => 7,
        Error::Resource(_) => 8,
    }
}

fn configure_threads() -> hamsim::Result<()> {
    let Ok(raw) = std::env::var("HAMSIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| Error::Usage(format!("HAMSIM_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Resource(format!("cannot size the worker pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Evolve(a) => run::evolve(&a),
        Command::Sweep(a) => run::sweep(&a),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("hamsim: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
