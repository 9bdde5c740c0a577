//! Divergences between circularly symmetric complex Gaussian laws.
//!
//! Density convention: `(π^d det Σ)^{-1} exp(-(y-μ)^† Σ^{-1} (y-μ))`.
//! Every value is in bits.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::quadrature::{self, Tolerance};

/// A nonnegative divergence in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bits(f64);

impl Bits {
    pub const ZERO: Bits = Bits(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(invalid(format!("divergence must be nonnegative, got {value}")));
        }
        Ok(Bits(value))
    }

    /// Clamp rounding residue below zero.
    pub(crate) fn clamped(value: f64) -> Self {
        Bits(if value > 0.0 { value } else { 0.0 })
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Bhattacharyya coefficient `2^{-d}`.
    pub fn coefficient(self) -> f64 {
        (-self.0).exp2()
    }
}

impl std::fmt::Display for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// `CN(μ, Σ)` with a validated positive-definite covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputLaw {
    mean: CVector,
    covariance: CMatrix,
}

impl OutputLaw {
    pub fn new(mean: CVector, covariance: CMatrix) -> Result<Self> {
        if mean.len() != covariance.nrows() {
            return Err(Error::Dimension(format!(
                "mean has dimension {} but covariance has order {}",
                mean.len(),
                covariance.nrows()
            )));
        }
        linalg::check_positive_definite(&covariance)?;
        Ok(Self { mean, covariance })
    }

    pub fn zero_mean(covariance: CMatrix) -> Result<Self> {
        Self::new(CVector::zeros(covariance.nrows()), covariance)
    }

    pub fn mean(&self) -> &CVector {
        &self.mean
    }

    pub fn covariance(&self) -> &CMatrix {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Scalar zero-mean law `CN(0, v)`, held as `u = ln v`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ScaleLaw {
    log_variance: f64,
}

impl ScaleLaw {
    pub fn new(variance: f64) -> Result<Self> {
        check_variance(variance)?;
        Ok(Self { log_variance: variance.ln() })
    }

    pub fn from_log_variance(u: f64) -> Result<Self> {
        if !u.is_finite() {
            return Err(Error::InvalidLaw(format!("log-variance must be finite, got {u}")));
        }
        Ok(Self { log_variance: u })
    }

    pub fn log_variance(self) -> f64 {
        self.log_variance
    }

    pub fn variance(self) -> f64 {
        self.log_variance.exp()
    }

    pub fn bhattacharyya(self, other: ScaleLaw) -> Bits {
        bhatt_log_variance(self.log_variance, other.log_variance)
    }
}

fn check_variance(v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidLaw(format!("variance must be positive and finite, got {v}")));
    }
    Ok(())
}

/// `log2 cosh x`, accurate near zero and free of overflow for large `|x|`.
pub fn log2_cosh(x: f64) -> f64 {
    let a = x.abs();
    if a < 0.5 {
        let h = (0.5 * a).sinh();
        (2.0 * h * h).ln_1p() / LN_2
    } else {
        (a + (-2.0 * a).exp().ln_1p() - LN_2) / LN_2
    }
}

/// `(μ1−μ2)^† Σ^{-1} (μ1−μ2) / (4 ln 2)`.
pub fn bhatt_same_covariance(mean1: &CVector, mean2: &CVector, cov: &CMatrix) -> Result<Bits> {
    if mean1.len() != mean2.len() || mean1.len() != cov.nrows() {
        return Err(Error::Dimension(format!(
            "means of dimension {} and {} with covariance of order {}",
            mean1.len(),
            mean2.len(),
            cov.nrows()
        )));
    }
    linalg::check_positive_definite(cov)?;
    let chol = linalg::cholesky(cov)?;
    Ok(Bits::clamped(mahalanobis(&chol, &(mean1 - mean2)) / (4.0 * LN_2)))
}

fn mahalanobis(chol: &nalgebra::Cholesky<Complex64, nalgebra::Dyn>, d: &CVector) -> f64 {
    let y = chol.l_dirty().solve_lower_triangular(d).expect("nonsingular factor");
    y.iter().map(|z| z.norm_sqr()).sum()
}

/// `log2 [det((Σ1+Σ2)/2) / √(det Σ1 det Σ2)]`.
pub fn bhatt_same_mean(cov1: &CMatrix, cov2: &CMatrix) -> Result<Bits> {
    if cov1.shape() != cov2.shape() {
        return Err(Error::Dimension(format!(
            "covariances of order {} and {}",
            cov1.nrows(),
            cov2.nrows()
        )));
    }
    linalg::check_positive_definite(cov1)?;
    linalg::check_positive_definite(cov2)?;
    let avg = (cov1 + cov2) * Complex64::from(0.5);
    let nats = linalg::hermitian_log_det(&avg)?
        - 0.5 * (linalg::hermitian_log_det(cov1)? + linalg::hermitian_log_det(cov2)?);
    Ok(Bits::clamped(nats / LN_2))
}

/// General Gaussian pair: mean and covariance terms together.
pub fn bhattacharyya(p: &OutputLaw, q: &OutputLaw) -> Result<Bits> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension(format!("laws of dimension {} and {}", p.dim(), q.dim())));
    }
    let avg = (&p.covariance + &q.covariance) * Complex64::from(0.5);
    let chol = linalg::cholesky(&avg)?;
    let shift = mahalanobis(&chol, &(&p.mean - &q.mean)) / 4.0;
    let spread = linalg::log_det_from_cholesky(&chol)
        - 0.5 * (linalg::hermitian_log_det(&p.covariance)? + linalg::hermitian_log_det(&q.covariance)?);
    Ok(Bits::clamped((shift + spread) / LN_2))
}

/// `log2 cosh((ln v1 − ln v2)/2)`.
pub fn bhatt_scale(v1: f64, v2: f64) -> Result<Bits> {
    check_variance(v1)?;
    check_variance(v2)?;
    Ok(bhatt_log_variance(v1.ln(), v2.ln()))
}

/// Scale-family distance from log-variances; no overflow for any finite input.
pub fn bhatt_log_variance(u1: f64, u2: f64) -> Bits {
    Bits::clamped(log2_cosh(0.5 * (u1 - u2)))
}

/// `KL(CN(0,v1) ‖ CN(0,v2))` in bits.
pub fn kl_scale(v1: f64, v2: f64) -> Result<Bits> {
    check_variance(v1)?;
    check_variance(v2)?;
    Ok(kl_log_variance(v1.ln(), v2.ln()))
}

/// KL from log-variances: `(e^t − 1 − t)/ln 2` with `t = u1 − u2`.
pub fn kl_log_variance(u1: f64, u2: f64) -> Bits {
    let t = u1 - u2;
    Bits::clamped((t.exp_m1() - t) / LN_2)
}

/// Squared Hellinger distance `1 − 2^{-d_B}`.
pub fn hellinger_from_bhatt(db: f64) -> Result<f64> {
    if db.is_nan() || db < 0.0 {
        return Err(invalid(format!("Bhattacharyya distance must be nonnegative, got {db}")));
    }
    Ok(-(-db * LN_2).exp_m1())
}

/// `−log2 ∫ p^s q^{1−s}` for `p = CN(0,v1)`, `q = CN(0,v2)`.
pub fn chernoff_scale(v1: f64, v2: f64, s: f64) -> Result<Bits> {
    check_variance(v1)?;
    check_variance(v2)?;
    chernoff_log_variance(v1.ln(), v2.ln(), s)
}

/// Chernoff distance from log-variances. At `s = 1/2` this is the
/// Bhattacharyya path exactly.
pub fn chernoff_log_variance(u1: f64, u2: f64, s: f64) -> Result<Bits> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid(format!("Chernoff parameter must lie in (0,1), got {s}")));
    }
    if s == 0.5 {
        return Ok(bhatt_log_variance(u1, u2));
    }
    if u1 == u2 {
        return Ok(Bits::ZERO);
    }
    // log[(s v2 + (1−s) v1) / (v1^{1−s} v2^s)] with the larger exponent factored out.
    let m = u1.max(u2);
    let mix = (s * (u2 - m).exp() + (1.0 - s) * (u1 - m).exp()).ln() + m;
    Ok(Bits::clamped((mix - (1.0 - s) * u1 - s * u2) / LN_2))
}

/// Chernoff information `max_s` of [`chernoff_scale`], by golden-section
/// search on the concave exponent. Returns `(s*, value)`.
pub fn chernoff_information_scale(v1: f64, v2: f64) -> Result<(f64, Bits)> {
    check_variance(v1)?;
    check_variance(v2)?;
    let (u1, u2) = (v1.ln(), v2.ln());
    let f = |s: f64| chernoff_log_variance(u1, u2, s).map(Bits::value).unwrap_or(0.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (1e-12, 1.0 - 1e-12);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-13 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let s = 0.5 * (a + b);
    Ok((s, Bits::clamped(f(s))))
}

/// `CN(μ, v)` on the complex plane, for oracle use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarGaussian {
    pub mean: Complex64,
    pub variance: f64,
}

impl ScalarGaussian {
    pub fn ln_density(&self, y: Complex64) -> f64 {
        -(y - self.mean).norm_sqr() / self.variance - (PI * self.variance).ln()
    }

    /// Log-density as a function of the radius, for zero-mean laws.
    pub fn ln_radial_density(&self, r: f64) -> f64 {
        -r * r / self.variance - (PI * self.variance).ln()
    }
}

/// Where to center the quadrature map and on what length scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleHint {
    pub center: Complex64,
    pub scale: f64,
}

impl Default for OracleHint {
    fn default() -> Self {
        Self { center: Complex64::new(0.0, 0.0), scale: 1.0 }
    }
}

const ORACLE_TOL: Tolerance = Tolerance { abs: 1e-11, rel: 1e-11, max_intervals: 2000 };
const NORMALIZATION_TOL: f64 = 1e-6;

/// `−log2 ∫_ℂ √(p q)` by nested adaptive quadrature. Densities are given as
/// log-densities so far tails cannot underflow to `0/0`.
pub fn quadrature_bhatt_oracle<P, Q>(ln_p: P, ln_q: Q, hint: OracleHint) -> Result<Bits>
where
    P: Fn(Complex64) -> f64,
    Q: Fn(Complex64) -> f64,
{
    let center = (hint.center.re, hint.center.im);
    let plane = |g: &dyn Fn(Complex64) -> f64| {
        quadrature::integrate_plane(|x, y| g(Complex64::new(x, y)), center, hint.scale, ORACLE_TOL)
    };
    for (name, ln_d) in [("first", &ln_p as &dyn Fn(Complex64) -> f64), ("second", &ln_q)] {
        let mass = plane(&|y| ln_d(y).exp())?.value;
        check_mass(name, mass)?;
    }
    let coeff = plane(&|y| (0.5 * (ln_p(y) + ln_q(y))).exp())?.value;
    coefficient_to_bits(coeff)
}

/// Radial form of the oracle for circularly symmetric zero-mean laws:
/// `∫_0^∞ 2π r √(p(r) q(r)) dr`.
pub fn quadrature_bhatt_oracle_radial<P, Q>(ln_p: P, ln_q: Q, scale: f64) -> Result<Bits>
where
    P: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    let radial = |g: &dyn Fn(f64) -> f64| {
        quadrature::integrate_semi_infinite(|r| 2.0 * PI * r * g(r), 0.0, scale, ORACLE_TOL)
    };
    check_mass("first", radial(&|r| ln_p(r).exp())?.value)?;
    check_mass("second", radial(&|r| ln_q(r).exp())?.value)?;
    coefficient_to_bits(radial(&|r| (0.5 * (ln_p(r) + ln_q(r))).exp())?.value)
}

/// `∫ p ln(p/q)` in bits, radial form.
pub fn quadrature_kl_oracle_radial<P, Q>(ln_p: P, ln_q: Q, scale: f64) -> Result<Bits>
where
    P: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    let radial = |g: &dyn Fn(f64) -> f64| {
        quadrature::integrate_semi_infinite(|r| 2.0 * PI * r * g(r), 0.0, scale, ORACLE_TOL)
    };
    check_mass("first", radial(&|r| ln_p(r).exp())?.value)?;
    let kl = radial(&|r| {
        let lp = ln_p(r);
        let p = lp.exp();
        if p == 0.0 {
            0.0
        } else {
            p * (lp - ln_q(r))
        }
    })?;
    Ok(Bits::clamped(kl.value / LN_2))
}

fn check_mass(which: &str, mass: f64) -> Result<()> {
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Quadrature(format!(
            "{which} density integrates to {mass}, not 1"
        )));
    }
    Ok(())
}

fn coefficient_to_bits(coeff: f64) -> Result<Bits> {
    if !(coeff > 0.0) {
        return Err(Error::Quadrature(format!("Bhattacharyya coefficient {coeff} is not positive")));
    }
    Ok(Bits::clamped(-coeff.log2()))
}

/// Averaged Bhattacharyya quantities over i.i.d. Rayleigh fading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvgBhatt {
    /// `E_H[B] = ∏ (1 + ρλ_j/4)^{-N}`.
    pub coefficient: f64,
    /// `−log2 E_H[B]`.
    pub distance: Bits,
}

/// Closed form for `E_H[2^{-d_B(H)}]` given the eigenvalues of `D D^†`.
pub fn avg_bhatt_rayleigh(eigs: &[f64], n: usize, rho: f64) -> Result<AvgBhatt> {
    if n == 0 {
        return Err(invalid("receive antenna count must be at least 1"));
    }
    if !(rho > 0.0) || rho.is_nan() {
        return Err(invalid(format!("rho must be positive, got {rho}")));
    }
    if let Some(&bad) = eigs.iter().find(|&&l| l.is_nan() || l < 0.0) {
        return Err(invalid(format!("eigenvalues must be nonnegative, got {bad}")));
    }
    Ok(avg_bhatt_unchecked(eigs, n, rho))
}

pub(crate) fn avg_bhatt_unchecked(eigs: &[f64], n: usize, rho: f64) -> AvgBhatt {
    let nats: f64 = eigs.iter().map(|&l| (0.25 * rho * l).ln_1p()).sum::<f64>() * n as f64;
    let distance = Bits::clamped(nats / LN_2);
    AvgBhatt { coefficient: (-nats).exp(), distance }
}
