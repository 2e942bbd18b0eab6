//! Deterministic worker pool for batch evaluations.
//!
//! Collocation values, Jacobian columns, and eigenvalue tables are all
//! "map an index range through a pure function" jobs. `Workers::map` runs
//! them on a rayon pool of the requested size but always assembles results
//! in index order, so the output — and every floating-point reduction done
//! on it afterwards — is identical for 1 thread and for N.

use rayon::prelude::*;

pub struct Workers {
    pool: Option<rayon::ThreadPool>,
}

impl Workers {
    /// `threads = 1` runs everything on the calling thread; larger values
    /// build a dedicated pool (global rayon state is left untouched).
    pub fn new(threads: usize) -> Self {
        let pool = if threads <= 1 {
            None
        } else {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .expect("failed to build worker pool"),
            )
        };
        Workers { pool }
    }

    pub fn threads(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// Evaluate `f(0), …, f(n-1)` and return the results in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.pool {
            None => (0..n).map(f).collect(),
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }
}

impl Default for Workers {
    fn default() -> Self {
        Workers::new(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_index_order() {
        let w = Workers::new(4);
        let out = w.map(100, |i| i * i);
        for (i, v) in out.iter().enumerate() {
            assert_eq!(*v, i * i);
        }
    }

    #[test]
    fn single_and_multi_thread_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.37).sin().exp() / (1.0 + i as f64);
        let a = Workers::new(1).map(1000, f);
        let b = Workers::new(8).map(1000, f);
        for i in 0..1000 {
            assert_eq!(a[i].to_bits(), b[i].to_bits(), "index {i}");
        }
    }
}
