//! Thread pool sizing from `HWL_THREADS`.

/// Installs the global pool once; `HWL_THREADS` caps the thread count,
/// otherwise the machine parallelism is used. Invalid values are ignored.
pub fn init_thread_pool() {
    let threads = std::env::var("HWL_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok());
    if let Some(n) = threads.filter(|n| *n > 0) {
        // a second call finds the pool built; that is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}
