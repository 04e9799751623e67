//! Replicate-level execution: rayon when the `parallel` feature is on,
//! a plain loop otherwise.

/// How independent replicates are scheduled. Results are identical either
/// way; only wall-clock time differs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// Whether `Parallel` actually runs on a thread pool in this build.
    pub const PARALLEL_AVAILABLE: bool = cfg!(feature = "parallel");
}

/// Evaluates `f(0), ..., f(count - 1)` and returns the results in index order.
pub fn map_indices<T, F>(execution: Execution, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_result_both_ways() {
        let f = |i: usize| (i as f64).sqrt() * 3.0;
        assert_eq!(
            map_indices(Execution::Parallel, 1000, f),
            map_indices(Execution::Sequential, 1000, f)
        );
        assert!(map_indices(Execution::Sequential, 0, f).is_empty());
    }
}
