//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) work is spread over rayon's pool;
//! without it every helper runs sequentially. Reductions are always assembled
//! in index order, so results do not depend on the worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `f(0), f(1), …, f(n-1)` collected in index order.
pub fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Exact integer sum of `f(i)` over `0..n`.
pub fn sum_u64<F>(n: usize, f: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).sum()
    }
}

/// Run `f` on a single worker. Used by benches to compare against the pool.
pub fn single_threaded<R, F>(f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}

/// Number of workers the helpers will use.
pub fn workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Index of the largest value; ties go to the lowest index. NaN never wins.
pub(crate) fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            None if !v.is_nan() => best = Some(i),
            Some(b) if v > values[b] => best = Some(i),
            _ => {}
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_keeps_order() {
        let v = map_indexed(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
        assert_eq!(sum_u64(100, |i| i as u64), 4950);
        assert_eq!(single_threaded(|| sum_u64(10, |i| i as u64)), 45);
    }

    #[test]
    fn argmax_ties_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, f64::NAN]), Some(1));
        assert_eq!(argmax(&[f64::NAN, 0.0]), Some(1));
        assert_eq!(argmax(&[]), None);
    }
}
