//! Execution-strategy adapters. All data-parallel loops in this crate go
//! through these helpers so that results are identical whether a loop runs
//! sequentially or on the rayon pool (every reduction used is associative
//! with a documented tie-break).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How to execute a data-parallel loop. `Rayon` silently degrades to
/// `Sequential` when the `parallel` feature is disabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Rayon,
}

impl Default for Parallelism {
    fn default() -> Self {
        Parallelism::Rayon
    }
}

/// Map `f` over `items` and fold the results with `combine`, starting from
/// `identity`. `combine` must be associative and commutative up to the
/// caller's tie-break rule.
pub fn map_reduce<T, U, F, C>(items: Vec<T>, par: Parallelism, identity: U, f: F, combine: C) -> U
where
    T: Send,
    U: Send + Sync + Clone,
    F: Fn(T) -> U + Send + Sync,
    C: Fn(U, U) -> U + Send + Sync,
{
    match par {
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => items
            .into_par_iter()
            .map(f)
            .reduce(|| identity.clone(), combine),
        _ => items.into_iter().map(f).fold(identity, combine),
    }
}

/// Map `f` over `items`, preserving order.
pub fn map_collect<T, U, F>(items: Vec<T>, par: Parallelism, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    match par {
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => items.into_par_iter().map(f).collect(),
        _ => items.into_iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_matches_sequential() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map_reduce(items.clone(), Parallelism::Sequential, 0, |x| x * x, |a, b| a + b);
        let par = map_reduce(items, Parallelism::Rayon, 0, |x| x * x, |a, b| a + b);
        assert_eq!(seq, par);
    }
}
