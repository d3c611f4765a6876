//! Deterministic data parallelism: results keep input order and the first error
//! by index (not by completion time) is reported, so output does not depend on
//! the number of threads.

use rayon::prelude::*;

use crate::error::Result;

/// Maps `f` over `items` in parallel, preserving order.
pub fn map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    let results: Vec<Result<U>> = items.par_iter().map(f).collect();
    results.into_iter().collect()
}

/// Runs `f` inside a pool with `threads` workers (`0` = rayon default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
