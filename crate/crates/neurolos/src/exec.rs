use neurolos_core::Executor;
use rayon::prelude::*;

/// Runs work units on a dedicated rayon pool.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `threads = 0` picks rayon's default (one per logical CPU).
    pub fn new(threads: usize) -> anyhow::Result<RayonExecutor> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(RayonExecutor { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        // Nested calls from inside a unit stay on the pool instead of blocking it.
        self.pool.install(|| (0..n).into_par_iter().map(&f).collect())
    }
}
