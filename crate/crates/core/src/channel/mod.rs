//! Channel classes, their output laws and model-specific distances.

mod fraclog;
mod spec;

use std::f64::consts::{FRAC_PI_2, LN_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divergence::{self, Bits, ScaleLaw};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::snr::{ln_one_plus_exp, Snr};

pub use fraclog::{
    frac_log_pair_distance, szego_integral, toeplitz_autocovariance, ToeplitzSpectrum,
    AUTOCOVARIANCE_SAMPLES,
};
pub use spec::{ChannelKind, ChannelSpec, InputPoint, PowerConstraint};

/// Transmit power of FracLog inputs.
pub(crate) fn spec_power(_spec: &ChannelSpec) -> f64 {
    spec::FRACLOG_POWER
}

/// `T · rank(H)`.
pub fn fixed_h_dof(h: &CMatrix, t: usize) -> usize {
    t * linalg::numerical_rank(h)
}

/// `N · rank(D)`.
pub fn fixed_h_diversity(d: &CMatrix, n: usize) -> usize {
    n * linalg::numerical_rank(d)
}

/// `ρ ‖H D‖_F² / (4 ln 2)`.
pub fn fixed_h_bhatt(h: &CMatrix, d: &CMatrix, snr: Snr) -> Result<Bits> {
    if h.ncols() != d.nrows() {
        return Err(Error::Dimension(format!(
            "H is {}x{} but D has {} rows",
            h.nrows(),
            h.ncols(),
            d.nrows()
        )));
    }
    Ok(Bits::clamped(scaled_energy(snr, linalg::frobenius_sq(&(h * d)))))
}

/// `ρ · e / (4 ln 2)` computed without forming ρ when it would overflow.
fn scaled_energy(snr: Snr, energy: f64) -> f64 {
    if energy == 0.0 {
        return 0.0;
    }
    (snr.ln() + energy.ln()).exp() / (4.0 * LN_2)
}

/// Which decomposition [`bridge_terms`] should use.
#[derive(Debug, Clone, Copy)]
pub enum BridgeChannel<'a> {
    /// Receiver knows `H`.
    KnownH(&'a CMatrix),
    /// i.i.d. Rayleigh `H` with `n` receive antennas, averaged.
    Rayleigh { n: usize },
}

/// Additive decomposition of a pairwise distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeTerms {
    pub terms: Vec<f64>,
    /// Factor turning the term sum into bits.
    pub scale: f64,
}

impl BridgeTerms {
    pub fn total(&self) -> f64 {
        self.terms.iter().sum::<f64>() * self.scale
    }
}

/// Split a pairwise distance into its per-direction contributions.
///
/// Known `H`: terms `σ_j² |h_ℓ u_j|²` over receive rows `ℓ` and the `rank(D)`
/// left singular directions `u_j` of `D`; scale `ρ/(4 ln 2)`.
/// Rayleigh: `rank(D)` terms `N log2(1 + ρσ_j²/4)`; scale 1.
pub fn bridge_terms(channel: BridgeChannel<'_>, d: &CMatrix, snr: Snr) -> Result<BridgeTerms> {
    let svd = d.clone().svd(true, false);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(invalid("difference matrix must be nonzero"));
    }
    let u = svd.u.expect("requested U");
    let dirs: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&j| svd.singular_values[j] > linalg::RANK_TOL * top)
        .collect();
    match channel {
        BridgeChannel::KnownH(h) => {
            if h.ncols() != d.nrows() {
                return Err(Error::Dimension(format!(
                    "H has {} columns but D has {} rows",
                    h.ncols(),
                    d.nrows()
                )));
            }
            let mut terms = Vec::with_capacity(h.nrows() * dirs.len());
            for l in 0..h.nrows() {
                for &j in &dirs {
                    let s2 = svd.singular_values[j].powi(2);
                    terms.push(s2 * (h.row(l) * u.column(j))[(0, 0)].norm_sqr());
                }
            }
            let scale = scaled_energy(snr, 1.0);
            Ok(BridgeTerms { terms, scale })
        }
        BridgeChannel::Rayleigh { n } => {
            if n == 0 {
                return Err(invalid("receive antenna count must be at least 1"));
            }
            let terms = dirs
                .iter()
                .map(|&j| {
                    let s2 = svd.singular_values[j].powi(2);
                    n as f64 * ln_one_plus_exp(snr.ln() + (0.25 * s2).ln()) / LN_2
                })
                .collect();
            Ok(BridgeTerms { terms, scale: 1.0 })
        }
    }
}

/// `ln(1 + ρ e)`, the log-variance of a fast-fading output for input energy `e`.
pub fn log_variance(snr: Snr, energy: f64) -> f64 {
    if energy <= 0.0 {
        return 0.0;
    }
    ln_one_plus_exp(snr.ln() + energy.ln())
}

/// Output law of the noncoherent fast-fading channel: `N` i.i.d. copies of
/// `CN(0, ρ|x|² + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FastFadingLaw {
    pub per_antenna: ScaleLaw,
    pub receive: usize,
}

impl FastFadingLaw {
    pub fn bhattacharyya(&self, other: &FastFadingLaw) -> Result<Bits> {
        if self.receive != other.receive {
            return Err(Error::Dimension("laws with different antenna counts".into()));
        }
        Ok(Bits::clamped(self.receive as f64 * self.per_antenna.bhattacharyya(other.per_antenna).value()))
    }
}

pub fn fast_fading_law(x: Complex64, snr: Snr, n: usize) -> Result<FastFadingLaw> {
    if n == 0 {
        return Err(invalid("receive antenna count must be at least 1"));
    }
    let energy = x.norm_sqr();
    if !(energy <= 1.0 + 1e-12) {
        return Err(invalid(format!("peak power violated: |x|^2 = {energy} > 1")));
    }
    Ok(FastFadingLaw {
        per_antenna: ScaleLaw::from_log_variance(log_variance(snr, energy))?,
        receive: n,
    })
}

/// Fast-fading spec with effective SNR `ρ Σ σ_ℓ²`.
pub fn multipath_effective_spec(taps: &[f64], snr: Snr, n: usize) -> Result<ChannelSpec> {
    let total = tap_power(taps)?;
    let eff = snr.scaled(total)?;
    ChannelSpec::fast_fading(n, eff.linear())
}

pub(crate) fn tap_power(taps: &[f64]) -> Result<f64> {
    if taps.iter().any(|&t| t.is_nan() || t < 0.0) {
        return Err(invalid("tap powers must be nonnegative"));
    }
    let total: f64 = taps.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(invalid("multipath profile needs at least one positive tap"));
    }
    Ok(total)
}

/// Principal angles between two `M`-dimensional subspaces, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalAngles {
    theta: Vec<f64>,
}

impl PrincipalAngles {
    pub fn new(mut theta: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = theta.iter().find(|&&t| !(0.0..=FRAC_PI_2).contains(&t)) {
            return Err(invalid(format!("principal angle {bad} outside [0, pi/2]")));
        }
        theta.sort_by(|a, b| a.total_cmp(b));
        Ok(Self { theta })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Chordal distance `Σ sin²θ_k`.
    pub fn chordal_sq(&self) -> f64 {
        self.theta.iter().map(|t| t.sin().powi(2)).sum()
    }
}

/// Angles between the row spaces of two full-row-rank `M × T` inputs.
pub fn principal_angles(x1: &CMatrix, x2: &CMatrix) -> Result<PrincipalAngles> {
    if x1.shape() != x2.shape() {
        return Err(Error::Dimension(format!("inputs of shape {:?} and {:?}", x1.shape(), x2.shape())));
    }
    let q1 = linalg::row_space_basis(x1)?;
    let q2 = linalg::row_space_basis(x2)?;
    angles_from_bases(&q1, &q2)
}

/// Principal angles from orthonormal `T × M` bases.
pub fn angles_from_bases(q1: &CMatrix, q2: &CMatrix) -> Result<PrincipalAngles> {
    let cross = q1.adjoint() * q2;
    let theta = cross
        .svd(false, false)
        .singular_values
        .iter()
        .map(|&c| c.clamp(0.0, 1.0).acos())
        .collect();
    PrincipalAngles::new(theta)
}

/// `N Σ_k log2(1 + ρ² sin²θ_k / (4(1+ρ)))`, the noncoherent block-fading
/// distance between two subspace codewords.
pub fn block_fading_bhatt(angles: &PrincipalAngles, snr: Snr, n: usize) -> Bits {
    Bits::clamped(n as f64 * block_sum_sin_sq(angles.theta.iter().map(|t| t.sin().powi(2)), snr))
}

/// `Σ log2(1 + a s_k)` with `a = ρ²/(4(1+ρ))`, in log domain.
pub(crate) fn block_sum_sin_sq(sin_sq: impl Iterator<Item = f64>, snr: Snr) -> f64 {
    let ln_a = block_ln_a(snr);
    sin_sq
        .map(|s| if s > 0.0 { ln_one_plus_exp(ln_a + s.ln()) / LN_2 } else { 0.0 })
        .sum()
}

/// `ln(ρ²/(4(1+ρ)))`.
pub(crate) fn block_ln_a(snr: Snr) -> f64 {
    2.0 * snr.ln() - 4f64.ln() - snr.log_variance_range()
}

/// Scale-family distance between two fast-fading inputs, `N` antennas.
pub fn fast_fading_bhatt(x1: Complex64, x2: Complex64, snr: Snr, n: usize) -> Result<Bits> {
    fast_fading_law(x1, snr, n)?.bhattacharyya(&fast_fading_law(x2, snr, n)?)
}

/// Explicit zero-mean output covariance `ρ X^† X + I_T` of a block-fading
/// codeword (one receive antenna). For cross-checks.
pub fn block_fading_covariance(x: &CMatrix, snr: Snr) -> CMatrix {
    let t = x.ncols();
    x.adjoint() * x * Complex64::from(snr.linear()) + CMatrix::identity(t, t)
}

/// Distance between the explicit block-fading covariances.
pub fn block_fading_bhatt_explicit(x1: &CMatrix, x2: &CMatrix, snr: Snr, n: usize) -> Result<Bits> {
    let d = divergence::bhatt_same_mean(&block_fading_covariance(x1, snr), &block_fading_covariance(x2, snr))?;
    Ok(Bits::clamped(n as f64 * d.value()))
}
