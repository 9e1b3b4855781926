//! Replication-parallel execution with order-independent results.

use rayon::prelude::*;

/// Runs `f(0), …, f(reps - 1)` in parallel and returns the results in
/// replication order, so any later reduction is independent of scheduling.
pub fn replicate<T, F>(reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..reps as u64).into_par_iter().map(f).collect()
}

/// Like [`replicate`], stopping at the first error in replication order.
pub fn try_replicate<T, E, F>(reps: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    replicate(reps, f).into_iter().collect()
}
