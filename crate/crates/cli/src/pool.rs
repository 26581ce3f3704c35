use rayon::ThreadPool;

use crate::error::CliError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "DONATION_CA_THREADS";

/// Worker count from `DONATION_CA_THREADS`, or rayon's default when unset.
pub fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

pub fn build_pool(threads: Option<usize>) -> Result<ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}
