//! Data-parallel execution of independent trials.
//!
//! Trials are pure functions of their index (every trial derives its own
//! RNG seed), so results are collected back in index order and the output
//! is identical whichever path runs, whatever the thread count. The
//! `parallel` feature (on by default) backs [`run_indexed`] with rayon;
//! without it the build falls back to the sequential loop and rayon is
//! not linked at all.

/// Map `f` over `0..count`, in parallel when the `parallel` feature is
/// enabled. Output order always matches index order.
#[cfg(feature = "parallel")]
pub fn run_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}

/// Always-sequential variant: the baseline the parallel path is compared
/// against in benchmarks and determinism tests.
pub fn run_indexed_seq<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}
