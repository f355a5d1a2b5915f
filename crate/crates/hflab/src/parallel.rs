//! Parallel survey over starts. Each start draws from its own generator
//! stream, and runs are collected in start order, so results match the
//! sequential survey bit for bit.

use hflab_core::survey::{assemble_report, floor_from_runs, run_start, RunRecord, SurveyConfig, SurveyReport};
use hflab_core::{IntegralTables, Result};
use rayon::prelude::*;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "HF_LAB_THREADS";

/// Positive integer in `HF_LAB_THREADS`, if any.
pub fn thread_limit() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

fn pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit() {
        b = b.num_threads(n);
    }
    b.build().expect("thread pool")
}

fn runs(tables: &IntegralTables, n_orbitals: usize, config: &SurveyConfig) -> Vec<RunRecord> {
    (0..config.n_starts).into_par_iter().map(|k| run_start(tables, n_orbitals, config, k)).collect()
}

/// Same contract as `survey::run_survey`.
pub fn run_survey_parallel(tables: &IntegralTables, n_orbitals: usize, config: &SurveyConfig) -> Result<SurveyReport> {
    config.validate()?;
    pool().install(|| {
        let j_est = if n_orbitals <= 1 { Some(0.0) } else { floor_from_runs(&runs(tables, n_orbitals - 1, config)) };
        Ok(assemble_report(runs(tables, n_orbitals, config), config, j_est))
    })
}
