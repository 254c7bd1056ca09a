//! Execution strategy for the per-channel and per-sample loops.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] fans work out
//! over the rayon pool; without it every strategy runs sequentially. Results
//! are always collected in input order and reduced with [`pairwise_sum`], so
//! the numbers produced do not depend on the strategy or the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this strategy actually runs on the thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Fallible map; the first error in input order is returned.
    pub fn try_map<T, R, E, F>(self, items: &[T], f: F) -> Result<Vec<R>, E>
    where
        T: Sync,
        R: Send,
        E: Send,
        F: Fn(&T) -> Result<R, E> + Sync + Send,
    {
        self.map(items, f).into_iter().collect()
    }
}

/// Reduces `items` by recursive halving in input order.
pub fn pairwise_sum<T>(mut items: Vec<T>, combine: impl Fn(&T, &T) -> T + Copy) -> Option<T> {
    fn go<T>(items: &mut [Option<T>], combine: impl Fn(&T, &T) -> T + Copy) -> T {
        if items.len() == 1 {
            return items[0].take().expect("each slot is consumed once");
        }
        let (lo, hi) = items.split_at_mut(items.len() / 2);
        let a = go(lo, combine);
        let b = go(hi, combine);
        combine(&a, &b)
    }
    if items.is_empty() {
        return None;
    }
    let mut slots: Vec<Option<T>> = items.drain(..).map(Some).collect();
    Some(go(&mut slots, combine))
}
