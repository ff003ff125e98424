//! Map-reduce over independent work items, run on rayon when the `parallel`
//! feature is enabled and sequentially otherwise.
//!
//! Callers must pass an associative, commutative reduction so the result does
//! not depend on how rayon splits the range.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

pub fn map_reduce<T, ID, M, R>(exec: Execution, items: u64, identity: ID, map: M, reduce: R) -> T
where
    T: Send,
    ID: Fn() -> T + Sync + Send,
    M: Fn(u64) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..items).into_par_iter().map(map).reduce(identity, reduce)
        }
        _ => (0..items).map(map).fold(identity(), reduce),
    }
}

pub fn current_num_threads() -> usize {
    #[cfg(feature = "parallel")]
    return rayon::current_num_threads();

    #[cfg(not(feature = "parallel"))]
    return 1;
}
