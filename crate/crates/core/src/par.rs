//! Thin switch between rayon and plain iteration.
//!
//! Every data-parallel loop in the crate funnels through these helpers. The
//! `*_opt` variants take an explicit `parallel` flag so the criterion benches
//! can compare both execution paths in a single binary; the un-suffixed
//! wrappers follow the `parallel` cargo feature. Without the feature the flag
//! is ignored and everything runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_indexed_opt<U, F>(parallel: bool, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Send + Sync,
{
    map_indexed_opt(true, n, f)
}

/// Maximum of `f(0..n)`, `NEG_INFINITY` when `n == 0`.
pub fn max_indexed_opt<F>(parallel: bool, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n)
            .into_par_iter()
            .map(&f)
            .reduce(|| f64::NEG_INFINITY, f64::max);
    }
    let _ = parallel;
    (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
}

pub fn max_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Send + Sync,
{
    max_indexed_opt(true, n, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let sq = |i: usize| (i * i) as f64;
        assert_eq!(map_indexed_opt(true, 100, sq), map_indexed_opt(false, 100, sq));
        assert_eq!(max_indexed_opt(true, 100, sq), max_indexed_opt(false, 100, sq));
    }

    #[test]
    fn empty_max_is_neg_infinity() {
        assert_eq!(max_indexed(0, |_| 1.0), f64::NEG_INFINITY);
    }
}
