//! Deterministic data parallelism.
//!
//! Work items are mapped on the rayon pool and collected in index order, and
//! every reduction happens sequentially afterwards, so results never depend
//! on the number of worker threads.

use rayon::prelude::*;

use crate::error::Result;

/// Environment variable overriding the worker-pool size.
pub const THREADS_ENV: &str = "CONFORMAL_KIT_THREADS";

/// Configures the global pool from [`THREADS_ENV`] (or `threads` when given).
/// Returns the pool size in effect. Calling it after the pool was first used
/// keeps the existing pool.
pub fn init_pool(threads: Option<usize>) -> usize {
    let requested = threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
    });
    if let Some(n) = requested {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    rayon::current_num_threads()
}

/// `f(0), …, f(count-1)` in index order, evaluated in parallel.
pub fn map_indexed<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}
