use std::error::Error as _;
use std::process::ExitCode;

use burstset::cli::{run, Cli, WORKERS_ENV};
use burstset::Error;
use clap::Parser;

fn init_workers() -> Result<(), Error> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Usage(format!(
            "{WORKERS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Usage(format!("cannot start {n} workers: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_workers().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprint!(": {s}");
                source = s.source();
            }
            eprintln!();
            ExitCode::from(e.exit_code())
        }
    }
}
