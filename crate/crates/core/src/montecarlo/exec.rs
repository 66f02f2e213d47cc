//! Index-ordered map over trial indices, on a rayon pool when the `parallel`
//! feature is enabled and more than one job is requested, sequentially
//! otherwise. Results always come back in index order, so anything folded
//! from them is independent of the worker count.

use std::ops::Range;

#[derive(Debug)]
pub struct Executor {
    jobs: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    /// `jobs == 0` uses every available core, `jobs == 1` runs inline.
    pub fn new(jobs: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            let pool = (jobs != 1).then(|| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .expect("failed to build worker pool")
            });
            Self { jobs, pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Self { jobs }
        }
    }

    pub fn sequential() -> Self {
        Self::new(1)
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    pub fn map<T, F>(&self, range: Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| range.into_par_iter().map(f).collect());
        }
        range.map(f).collect()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::new(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_are_index_ordered() {
        let seq = Executor::sequential().map(0..1000, |i| i * i);
        for jobs in [0, 2, 8] {
            assert_eq!(Executor::new(jobs).map(0..1000, |i| i * i), seq);
        }
        assert!(!Executor::sequential().is_parallel());
    }
}
