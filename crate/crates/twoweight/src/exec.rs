//! Execution mode for the data-parallel scans.
//!
//! With the `parallel` feature (default) the `Parallel` mode fans work out via
//! rayon; results are collected in input order and reduced sequentially, so
//! output is identical between modes. Without the feature both modes run
//! sequentially.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Order-preserving map over a slice.
pub fn map_collect<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(&f).collect();
        }
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Order-preserving map over an index range.
pub fn map_range<R, F>(mode: ExecMode, range: std::ops::Range<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return range.into_par_iter().map(&f).collect();
        }
    }
    let _ = mode;
    range.map(f).collect()
}

/// Deterministic pairwise tree reduction for float sums.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map_collect(ExecMode::Sequential, &items, |x| x * x);
        let par = map_collect(ExecMode::Parallel, &items, |x| x * x);
        assert_eq!(seq, par);
    }

    #[test]
    fn pairwise_sum_is_deterministic() {
        let xs: Vec<f64> = (1..=10_000).map(|i| 1.0 / i as f64).collect();
        assert_eq!(pairwise_sum(&xs), pairwise_sum(&xs));
    }
}
