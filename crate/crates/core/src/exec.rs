//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper returns results in index order, and every reduction first
//! materialises per-index partials and then sums them left to right. Results
//! are therefore bit-identical whether the work ran on one thread or many.
//!
//! With the `parallel` feature the work is spread over the rayon pool. Without
//! it, or inside [`sequential`], the same closures run in a plain loop.

use std::cell::Cell;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with every helper in this module forced onto the calling thread.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    struct Reset(bool);
    impl Drop for Reset {
        fn drop(&mut self) {
            FORCE_SEQUENTIAL.with(|c| c.set(self.0));
        }
    }
    let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let _reset = Reset(prev);
    f()
}

/// True when helpers called from this thread will use the rayon pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|c| c.get())
}

/// Evaluates `f(i)` for `i in 0..n`, collected in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Sums `f(i)` over `i in 0..n` with an ordered, thread-count independent reduction.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indexed(n, f).into_iter().sum()
}

/// Component-wise ordered sum of `K` accumulators.
pub fn sum_indexed_array<const K: usize, F>(n: usize, f: F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K] + Sync + Send,
{
    map_indexed(n, f)
        .into_iter()
        .fold([0.0; K], |mut acc, row| {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
            acc
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_results() {
        let v = map_indexed(100, |i| i * i);
        assert_eq!(v[7], 49);
        assert_eq!(v.len(), 100);
    }

    #[test]
    fn sequential_matches_parallel_bitwise() {
        let f = |i: usize| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (1.0 + i as f64);
        let a = sum_indexed(10_000, f);
        let b = sequential(|| sum_indexed(10_000, f));
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(!sequential(is_parallel));
    }

    #[test]
    fn array_sum() {
        let s = sum_indexed_array(4, |i| [i as f64, 1.0]);
        assert_eq!(s, [6.0, 4.0]);
    }
}
