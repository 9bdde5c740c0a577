//! Rate-side functionals: cutoff rate and the KL covering converse.

use std::f64::consts::LN_2;

use super::family::{DistanceMatrix, LawFamily};
use crate::error::{invalid, Result};
use crate::snr::Snr;

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// `R0 = −log2 Σ P(x)P(x') 2^{−d_B(x,x')}` for a weighted input set.
pub fn cutoff_rate<F: LawFamily>(family: &F, points: &[F::Point], weights: &[f64]) -> Result<f64> {
    if points.len() != weights.len() {
        return Err(invalid("need one weight per point and at least one point"));
    }
    cutoff_from(weights, |i, j| family.distance(&points[i], &points[j]))
}

/// [`cutoff_rate`] from a precomputed distance matrix.
pub fn cutoff_rate_matrix(dm: &DistanceMatrix, weights: &[f64]) -> Result<f64> {
    if dm.len() != weights.len() {
        return Err(invalid("need one weight per point and at least one point"));
    }
    cutoff_from(weights, |i, j| dm.get(i, j))
}

fn cutoff_from(weights: &[f64], distance: impl Fn(usize, usize) -> f64) -> Result<f64> {
    if weights.is_empty() {
        return Err(invalid("need one weight per point and at least one point"));
    }
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(invalid("weights must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("weights must sum to 1, got {total}")));
    }
    let n = weights.len();
    let mut sum = weights.iter().map(|w| w * w).sum::<f64>();
    for i in 0..n {
        for j in i + 1..n {
            sum += 2.0 * weights[i] * weights[j] * (-distance(i, j)).exp2();
        }
    }
    Ok((-sum.log2()).max(0.0))
}

/// Fano-style converse `(log2 n_cover + δ + 2 h₂(η)) / (1 − η)` on `log2 K`.
pub fn kl_converse_bound(n_cover: f64, delta: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(invalid(format!("eta must lie in (0, 1/2), got {eta}")));
    }
    if !(n_cover >= 1.0) || !n_cover.is_finite() {
        return Err(invalid(format!("cover size must be at least 1, got {n_cover}")));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(invalid(format!("delta must be nonnegative, got {delta}")));
    }
    Ok((n_cover.log2() + delta + 2.0 * binary_entropy(eta)) / (1.0 - eta))
}

/// Size of a KL cover of the scale family by balls of radius δ bits.
///
/// A ball centred at log-variance `c` holds every `u` with
/// `N(e^{u−c} − 1 − (u−c)) ≤ δ ln 2`; its width is the gap between the two
/// roots, and `⌈L / width⌉` balls tile `[0, L]`.
pub fn scale_kl_cover(delta: f64, snr: Snr, n: usize) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let target = delta * LN_2 / n as f64;
    let g = |w: f64| w.exp_m1() - w;
    let root = |sign: f64| {
        let (mut lo, mut hi) = (0.0, 1.0);
        while g(sign * hi) < target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(sign * mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    };
    let width = root(1.0) + root(-1.0);
    Ok((snr.log_variance_range() / width).ceil().max(1.0))
}
