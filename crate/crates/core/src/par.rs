//! Order-preserving data parallelism with a sequential fallback.
//!
//! With the `parallel` feature (the default) [`Execution::Parallel`] runs on
//! the rayon global pool. Without it, both variants run sequentially. Results
//! always come back in index order, so output never depends on scheduling.

/// How independent work items are dispatched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// Whether work will actually run on more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(f)` collected in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Fallible [`map_indexed`]; the first error in index order is returned.
pub fn try_map_indexed<T, E, F>(n: usize, exec: Execution, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(n, exec, f).into_iter().collect()
}

/// Splits `0..n` into consecutive chunks of `chunk` items, maps each chunk
/// range with `f`, and folds the partial results left to right. The chunk
/// boundaries depend only on `n` and `chunk`, so floating-point sums are
/// reproducible across execution modes.
pub fn chunked_reduce<T, F, G>(
    n: usize,
    chunk: usize,
    exec: Execution,
    f: F,
    mut fold: G,
) -> Option<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    G: FnMut(T, T) -> T,
{
    let chunk = chunk.max(1);
    let count = n.div_ceil(chunk);
    let parts = map_indexed(count, exec, |c| f(c * chunk..((c + 1) * chunk).min(n)));
    let mut it = parts.into_iter();
    let first = it.next()?;
    Some(it.fold(first, &mut fold))
}
