use std::sync::Arc;

use rayon::prelude::*;
use rayon::ThreadPool;
use subdiag_core::harness::{Trial, TrialMap};

/// Runs trials on a rayon pool. Results come back in index order, so reports
/// do not depend on the thread count.
#[derive(Clone, Default)]
pub struct RayonExecutor {
    pool: Option<Arc<ThreadPool>>,
}

impl RayonExecutor {
    /// Global pool.
    pub fn new() -> Self {
        Self::default()
    }

    /// Dedicated pool with `threads` workers.
    pub fn with_threads(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self {
            pool: Some(Arc::new(pool)),
        })
    }
}

impl TrialMap for RayonExecutor {
    fn map_trials(&self, count: usize, f: &(dyn Fn(usize) -> Trial + Sync)) -> Vec<Trial> {
        let run = || (0..count).into_par_iter().map(f).collect();
        match &self.pool {
            Some(pool) => pool.install(run),
            None => run(),
        }
    }
}
