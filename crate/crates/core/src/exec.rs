//! Data-parallel helpers.
//!
//! Every scan in the crate (flux sweeps, frequency grids, disorder ensembles)
//! goes through [`map_indexed`]. With the `parallel` feature the work is
//! distributed with rayon; without it, or with [`Execution::Sequential`], the
//! same closure runs in a plain loop. Results are always returned in index
//! order, so the two paths produce identical output.

/// How a batch of independent jobs is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise falls
    /// back to sequential execution.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0..n)` and collects the results in order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] for fallible jobs; returns the error of the lowest
/// failing index.
pub fn try_map_indexed<T, E, F>(exec: Execution, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Send + Sync,
{
    map_indexed(exec, n, f).into_iter().collect()
}

/// Pairwise summation of equally shaped arrays. The reduction tree depends
/// only on the number of inputs, so the result is independent of how the
/// inputs were produced.
pub fn pairwise_sum<T>(items: &[Vec<T>]) -> Vec<T>
where
    T: Copy + std::ops::Add<Output = T> + Default,
{
    match items.len() {
        0 => Vec::new(),
        1 => items[0].clone(),
        n => {
            let (lo, hi) = items.split_at(n / 2);
            let a = pairwise_sum(lo);
            let b = pairwise_sum(hi);
            a.iter().zip(&b).map(|(&x, &y)| x + y).collect()
        }
    }
}
