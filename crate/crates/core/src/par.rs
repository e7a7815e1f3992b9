//! Data-parallel helpers. With the `parallel` feature the work is spread over the
//! rayon pool; without it (or with [`Execution::Sequential`]) everything runs on the
//! calling thread. Results are identical either way: work is split into fixed chunks
//! and always recombined in order.

use crate::mat2::Mat2;

/// How independent work items are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
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

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Steps per chunk of an ordered product.
const CHUNK: usize = 256;

/// `factor(n-1) * ... * factor(1) * factor(0)`: later indices multiply on the left.
pub fn ordered_product<E, F>(exec: Execution, n: usize, factor: F) -> Result<Mat2, E>
where
    E: Send,
    F: Fn(usize) -> Result<Mat2, E> + Sync + Send,
{
    let chunks: Vec<(usize, usize)> = (0..n).step_by(CHUNK).map(|s| (s, (s + CHUNK).min(n))).collect();
    let partial = map(exec, &chunks, |&(lo, hi)| {
        let mut acc = Mat2::IDENTITY;
        for j in lo..hi {
            acc = factor(j)? * acc;
        }
        Ok(acc)
    });
    let mut total = Mat2::IDENTITY;
    for p in partial {
        total = p? * total;
    }
    Ok(total)
}

/// Runs `f` inside a pool capped at `threads` workers (no-op without the `parallel` feature).
pub fn with_thread_cap<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn step(j: usize) -> Result<Mat2, ()> {
        let t = (0.01 * j as f64).sin();
        Ok(Mat2::new(
            Complex64::new(1.0, t),
            Complex64::new(0.1, 0.0),
            Complex64::new(-0.1 * t, 0.2),
            Complex64::new(0.9, -t),
        )
        .scale(Complex64::new(0.5, 0.0)))
    }

    #[test]
    fn ordered_product_matches_naive_fold() {
        let n = 1000;
        let mut naive = Mat2::IDENTITY;
        for j in 0..n {
            naive = step(j).unwrap() * naive;
        }
        for exec in [Execution::Sequential, Execution::Parallel] {
            let p = ordered_product(exec, n, step).unwrap();
            assert!(p.max_abs_diff(&naive) <= 1e-12 * naive.max_abs().max(1.0));
        }
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let a = ordered_product(Execution::Sequential, 3000, step).unwrap();
        let b = ordered_product(Execution::Parallel, 3000, step).unwrap();
        assert_eq!(a, b);
        let xs: Vec<u64> = (0..100).collect();
        assert_eq!(map(Execution::Parallel, &xs, |x| x * x), map(Execution::Sequential, &xs, |x| x * x));
    }

    #[test]
    fn empty_product_is_identity() {
        assert_eq!(ordered_product(Execution::default(), 0, step).unwrap(), Mat2::IDENTITY);
    }
}
