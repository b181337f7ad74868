//! Configuration, run orchestration and output files.

pub mod config;
pub mod output;
pub mod run;
pub mod verify;

pub use config::{InlineRiemann, OutputFormat, RunConfig, INLINE_CASE};
pub use run::{convergence_study, execute, run, ConvergenceRow, ConvergenceTable, RunControl, RunOutcome, RunSummary, SnapshotInfo};
pub use verify::{verify, Check, Suite, VerifyReport};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "VLBM_THREADS";

/// Sizes the global worker pool from `VLBM_THREADS` when set. Returns the
/// pool size in effect.
pub fn configure_threads() -> crate::Result<usize> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| crate::Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        // a pool that already exists keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}
