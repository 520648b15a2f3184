//! Data-parallel facade.
//!
//! With the `parallel` feature (default) the loops fan out over rayon's
//! current thread pool; without it they run sequentially. Results are
//! collected in index order either way, so outputs are identical across
//! thread counts.

/// Applies `f` to `0..n` and collects the results in order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Applies `f` to `0..n` and collects the results in order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Caps the global worker pool at `jobs` threads. Call once, before any
/// parallel work; later calls are ignored. No-op without the feature.
pub fn configure_jobs(jobs: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(jobs) = jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
}

/// Runs `f` on a dedicated pool of `threads` workers (used by the benches to
/// compare thread counts). Runs `f` inline without the feature.
#[cfg(feature = "parallel")]
pub fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("building a scoped thread pool")
        .install(f)
}

/// Runs `f` on a dedicated pool of `threads` workers (used by the benches to
/// compare thread counts). Runs `f` inline without the feature.
#[cfg(not(feature = "parallel"))]
pub fn with_pool<R: Send>(_threads: usize, f: impl FnOnce() -> R + Send) -> R {
    f()
}
