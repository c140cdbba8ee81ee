use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};

/// Evaluates independent grid points on a fixed-size thread pool and gathers
/// the results in index order.
///
/// Each point is computed by a pure function of its index, so the output
/// does not depend on the number of threads or on scheduling.
pub struct SweepEngine {
    pool: ThreadPool,
    threads: usize,
}

impl SweepEngine {
    pub fn new(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(Error::domain("threads", "parallelism must be >= 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::domain("threads", format!("cannot build thread pool: {e}")))?;
        Ok(SweepEngine { pool, threads })
    }

    pub fn serial() -> Self {
        Self::new(1).expect("one thread")
    }

    /// One worker per available core.
    pub fn all_cores() -> Self {
        let n = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1);
        Self::new(n).expect("at least one thread")
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Runs `f(0..n)`; on failure returns the error of the lowest failing
    /// index and no partial results.
    pub fn run<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        let results: Vec<Result<T>> = self
            .pool
            .install(|| (0..n).into_par_iter().map(&f).collect());
        results.into_iter().collect()
    }
}
