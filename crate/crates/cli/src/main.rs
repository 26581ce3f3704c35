use std::process::ExitCode;

use clap::Parser;
use donation_ca::pool::{build_pool, thread_count};
use donation_ca::{execute, Cli, CliError};

fn real_main() -> Result<(), CliError> {
    let cfg = Cli::parse().into_config()?;
    let pool = build_pool(thread_count()?)?;
    for path in execute(cfg, &pool)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
