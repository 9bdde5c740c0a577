//! Seeded random streams.
//!
//! Every Monte Carlo loop is cut into fixed-size batches; batch `b` draws from
//! ChaCha8 stream `b` of the run seed. Which worker runs a batch is
//! irrelevant to the numbers it produces.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Trials per RNG stream.
pub const BATCH: u64 = 1024;

/// Stream `stream` of the generator seeded by `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive an independent seed for a named purpose (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Circularly symmetric complex Gaussian with the given variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `rows × cols` matrix of i.i.d. `CN(0, variance)` entries, filled row by row.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = complex_normal(rng, variance);
        }
    }
    m
}

/// Number of batches needed for `trials` trials and the size of batch `b`.
pub(crate) fn batches(trials: u64) -> usize {
    trials.div_ceil(BATCH) as usize
}

pub(crate) fn batch_len(trials: u64, b: usize) -> u64 {
    let start = b as u64 * BATCH;
    (trials - start).min(BATCH)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ_and_repeat() {
        let a: u64 = substream(7, 0).random();
        let b: u64 = substream(7, 1).random();
        let c: u64 = substream(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
        assert_ne!(derive_seed(1, 2), derive_seed(1, 3));
    }

    #[test]
    fn complex_normal_variance() {
        let mut rng = substream(3, 0);
        let n = 200_000;
        let mean_sq: f64 = (0..n).map(|_| complex_normal(&mut rng, 2.0).norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean_sq - 2.0).abs() < 0.03);
    }

    #[test]
    fn batch_partition() {
        assert_eq!(batches(1), 1);
        assert_eq!(batches(2048), 2);
        assert_eq!(batches(2049), 3);
        assert_eq!(batch_len(2049, 2), 1);
        assert_eq!(batch_len(2049, 0), BATCH);
    }
}
