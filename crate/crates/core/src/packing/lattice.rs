//! Fixed-H packings by lattice construction in the image of `H`.
//!
//! Codewords live in the ball `‖X‖_F² ≤ T`; their images `HX` fill an
//! ellipsoid with real semi-axes `σ_j √T` (each singular value repeated over
//! `T` uses and two real coordinates). Packing in Bhattacharyya distance δ is
//! Euclidean packing of the image at spacing `ε = √(4 ln 2 · δ / ρ)`.
//! A cubic grid in the inscribed box gives the lower bound; a volume count
//! over the enclosing box gives the upper bound.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use super::{check_count, PackingResult};
use crate::channel::InputPoint;
use crate::error::{invalid, Result};
use crate::linalg::{self, CMatrix};
use crate::rng::{complex_gaussian_matrix, derive_seed, substream};
use crate::snr::Snr;

const CHANNEL_TAG: u64 = 0xc0e7;

/// Real semi-axes of the image ellipsoid.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedHGeometry {
    semi_axes: Vec<f64>,
    sigma_max: f64,
}

impl FixedHGeometry {
    pub fn new(h: &CMatrix, t: usize) -> Result<Self> {
        if t == 0 {
            return Err(invalid("T must be at least 1"));
        }
        let s = linalg::singular_values(h);
        let top = s.first().copied().unwrap_or(0.0);
        if !(top > 0.0) {
            return Err(invalid("H must be nonzero"));
        }
        let radius = (t as f64).sqrt();
        let mut semi_axes = Vec::new();
        for &sv in s.iter().filter(|&&v| v > linalg::RANK_TOL * top) {
            for _ in 0..2 * t {
                semi_axes.push(sv * radius);
            }
        }
        Ok(Self { semi_axes, sigma_max: top })
    }

    /// Real dimension of the image.
    pub fn dims(&self) -> usize {
        self.semi_axes.len()
    }

    /// `log2` of the grid-point count at spacing `e^{ln_eps}`.
    pub fn grid_log2(&self, ln_eps: f64) -> f64 {
        let inv_sqrt_d = 1.0 / (self.dims() as f64).sqrt();
        self.semi_axes.iter().map(|&a| (1.0 + (2.0 * a * inv_sqrt_d / ln_eps.exp()).floor()).log2()).sum()
    }

    /// `log2` of the volume bound at spacing `e^{ln_eps}`.
    pub fn volume_log2(&self, ln_eps: f64) -> f64 {
        let eps = ln_eps.exp();
        let d = self.dims() as f64;
        let boxed: f64 = self.semi_axes.iter().map(|&a| (2.0 * a + eps).log2()).sum();
        let half_d = self.dims() / 2;
        let ln_gamma: f64 = (1..=half_d).map(|k| (k as f64).ln()).sum();
        let ball = 0.5 * d * PI.log2() + d * (ln_eps - LN_2) / LN_2 - ln_gamma / LN_2;
        (boxed - ball).max(0.0)
    }

    fn ln_eps_for(delta: f64, snr: Snr) -> f64 {
        0.5 * ((4.0 * LN_2 * delta).ln() - snr.ln())
    }

    fn delta_for(ln_eps: f64, snr: Snr) -> f64 {
        (snr.ln() + 2.0 * ln_eps).exp() / (4.0 * LN_2)
    }

    /// Largest spacing at which `count_log2(ln ε) ≥ bits`.
    fn widest(&self, bits: f64, count_log2: impl Fn(f64) -> f64) -> f64 {
        let top = (4.0 * self.semi_axes.iter().copied().fold(0.0, f64::max)).ln() + 1.0;
        let (mut lo, mut hi) = (top - 1600.0, top);
        if count_log2(lo) < bits {
            return f64::NEG_INFINITY;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_log2(mid) >= bits {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Packing-number bounds for a known `H` over `T` uses.
pub fn fixed_h_pack_bounds(h: &CMatrix, t: usize, snr: Snr, delta: f64) -> Result<PackingResult> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    let geo = FixedHGeometry::new(h, t)?;
    let ln_eps = FixedHGeometry::ln_eps_for(delta, snr);
    PackingResult::threshold(delta, snr, geo.grid_log2(ln_eps), geo.volume_log2(ln_eps), "grid in image box", "volume")
        .diag("image_real_dims", geo.dims() as f64)
        .checked()
}

/// Exact `Δ*(2)` for known `H`: the antipodal pair along the top right
/// singular vector, `ρ T σ_max² / ln 2`.
pub fn fixed_h_pair_frontier(h: &CMatrix, t: usize, snr: Snr) -> Result<PackingResult> {
    let geo = FixedHGeometry::new(h, t)?;
    let value = (snr.ln() + (t as f64).ln() + 2.0 * geo.sigma_max.ln()).exp() / LN_2;
    let svd = h.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let top = (0..svd.singular_values.len())
        .max_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .unwrap_or(0);
    let direction = v_t.row(top).adjoint();
    let scale = Complex64::from((t as f64).sqrt());
    let mut x = CMatrix::zeros(h.ncols(), t);
    x.set_column(0, &(direction * scale));
    let points = vec![InputPoint::Matrix(x.clone()), InputPoint::Matrix(-x)];
    PackingResult::count(2.0, snr, value, value, "antipodal top singular direction", "diameter")
        .with_certificate(points, Some(value))
        .checked()
}

/// `Δ*(K)` bounds for known `H`: grid spacing achieving `K` points (lower),
/// volume bound (upper), both capped by the exact pair value.
pub fn fixed_h_frontier_bounds(h: &CMatrix, t: usize, snr: Snr, k: f64) -> Result<PackingResult> {
    let k = check_count(k)?;
    let pair = fixed_h_pair_frontier(h, t, snr)?;
    if k == 2.0 {
        return Ok(pair);
    }
    let geo = FixedHGeometry::new(h, t)?;
    let bits = k.log2();
    let lower = FixedHGeometry::delta_for(geo.widest(bits, |e| geo.grid_log2(e)), snr);
    let upper = FixedHGeometry::delta_for(geo.widest(bits, |e| geo.volume_log2(e)), snr);
    PackingResult::count(k, snr, lower.min(pair.value_lower), upper.min(pair.value_upper), "grid in image box", "volume")
        .diag("image_real_dims", geo.dims() as f64)
        .checked()
}

/// Coherent MIMO with CSIR, packed against one seeded realization of `H`.
pub fn coherent_pack_bounds(m: usize, n: usize, t: usize, snr: Snr, delta: f64, seed: u64) -> Result<PackingResult> {
    let h = coherent_channel_draw(m, n, seed);
    Ok(fixed_h_pack_bounds(&h, t, snr, delta)?.diag("channel_draw_seed", seed as f64))
}

/// The `N × M` Rayleigh realization used for coherent threshold packings.
pub(crate) fn coherent_channel_draw(m: usize, n: usize, seed: u64) -> CMatrix {
    complex_gaussian_matrix(&mut substream(derive_seed(seed, CHANNEL_TAG), 0), n, m, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::fixed_h_bhatt;
    use crate::packing::family::{FixedHFamily, LawFamily};
    use crate::packing::verify_certificate;

    #[test]
    fn pair_frontier_is_exact_and_certified() {
        let h = CMatrix::from_row_slice(2, 2, &[Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0)]);
        let snr = Snr::from_linear(10.0).unwrap();
        let r = fixed_h_pair_frontier(&h, 3, snr).unwrap();
        let smax = linalg::singular_values(&h)[0];
        assert!((r.value_lower - 10.0 * 3.0 * smax * smax / LN_2).abs() < 1e-9 * r.value_lower);
        let fam = FixedHFamily { h: h.clone(), snr, t: 3 };
        let min = verify_certificate(&fam, r.certificate.as_ref().unwrap(), fam.power()).unwrap().unwrap();
        assert!((min - r.value_lower).abs() < 1e-10 * r.value_lower);
        let _ = fixed_h_bhatt;
    }

    #[test]
    fn bounds_are_ordered_and_grow_with_snr() {
        let h = CMatrix::identity(2, 2);
        let mut prev = 0.0;
        for d in [2.0, 4.0, 8.0] {
            let r = fixed_h_pack_bounds(&h, 1, Snr::from_decades(d), 1.0).unwrap();
            let (lo, hi) = (r.k_pack.unwrap(), r.k_pack_upper.unwrap());
            assert!(lo <= hi && lo >= prev);
            prev = lo;
        }
        let r = fixed_h_frontier_bounds(&h, 1, Snr::from_decades(6.0), 1e6).unwrap();
        assert!(r.value_lower > 0.0 && r.value_lower <= r.value_upper);
    }
}
