//! Batch evaluation of independent jobs.
//!
//! With the `parallel` feature, [`map`] fans out over a rayon pool; without
//! it, jobs run in order on the calling thread. Results always come back in
//! input order, so output never depends on scheduling.

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CHEMOLAB_THREADS";

/// Thread cap read from [`THREADS_ENV`]; `None` when unset or invalid.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` over `items` one after another.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Runs `f` over `items` on the global rayon pool.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Runs `f` over `items` using at most `threads` workers (`None`: the
/// [`THREADS_ENV`] cap, else every core).
pub fn map<T, R, F>(items: &[T], threads: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        match threads.or_else(thread_cap_from_env) {
            Some(1) => map_sequential(items, f),
            Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| map_parallel(items, f)),
                Err(_) => map_sequential(items, f),
            },
            None => map_parallel(items, f),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        map_sequential(items, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..200).collect();
        let seq = map_sequential(&items, |x| x * x);
        assert_eq!(map(&items, None, |x| x * x), seq);
        assert_eq!(map(&items, Some(3), |x| x * x), seq);
        assert_eq!(map(&items, Some(1), |x| x * x), seq);
    }
}
