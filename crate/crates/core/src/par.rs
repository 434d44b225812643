//! Data-parallel helpers with a sequential fallback when the `parallel`
//! feature is off. Results are always returned in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `f(0), f(1), ..., f(n - 1)`.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(items.len(), |i| f(&items[i]))
}

/// Lowest index `i < n` for which `f(i)` is `Some`, with its value.
///
/// Work proceeds in batches the size of the thread pool, so the answer is the
/// same as a sequential scan while later indices may be evaluated and dropped.
pub fn first_some<T, F>(n: usize, f: F) -> Option<(usize, T)>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    let batch = threads();
    let mut start = 0;
    while start < n {
        let end = (start + batch).min(n);
        let out = map_indexed(end - start, |k| f(start + k));
        if let Some((k, v)) = out.into_iter().enumerate().find_map(|(k, v)| v.map(|v| (k, v))) {
            return Some((start + k, v));
        }
        start = end;
    }
    None
}

pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads().max(1)
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
