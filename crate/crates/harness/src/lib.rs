//! Scenario configuration, presets, experiment suites and result emission
//! for the `hoch-core` simulator.

pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod presets;
pub mod run;
pub mod scenario;
pub mod suites;

pub use error::HarnessError;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "HOCH_WORKERS";

/// `HOCH_WORKERS` when set to a positive integer, else `requested`, else the
/// available parallelism.
pub fn worker_count(requested: Option<usize>) -> Result<usize, HarnessError> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(HarnessError::config(format!("{WORKERS_ENV} = `{v}` is not a positive integer"))),
        };
    }
    match requested {
        Some(0) => Err(HarnessError::config("--workers must be positive")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs `f` on a pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Orchestration(e.to_string()))?;
    Ok(pool.install(f))
}
