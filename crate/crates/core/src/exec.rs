//! Data-parallel execution of element loops with a sequential fallback.
//!
//! Per-element work is pure; results are collected in element order and
//! scattered sequentially, so parallel and sequential runs are bitwise
//! identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How element loops execute. `default()` picks Parallel when the crate is
/// built with the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for ExecMode {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        ExecMode::Parallel
    }

    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        ExecMode::Sequential
    }
}

/// Maps `f` over `0..n`, in parallel when requested, preserving index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Sums `f` over `0..n` with a deterministic reduction: chunk sums are
/// computed independently and combined in chunk order.
pub fn sum_indexed<F>(mode: ExecMode, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    const CHUNK: usize = 1024;
    let nchunks = n.div_ceil(CHUNK);
    let chunk_sum = |c: usize| -> f64 {
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK).min(n);
        (lo..hi).map(&f).sum()
    };
    match mode {
        ExecMode::Sequential => (0..nchunks).map(chunk_sum).sum(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..nchunks)
            .into_par_iter()
            .map(chunk_sum)
            .collect::<Vec<_>>()
            .into_iter()
            .sum(),
    }
}
