//! Power-law spectrum `f(λ) = c_β |λ|^{2/β − 2}`: Szegő integral and the
//! Toeplitz covariances of finite blocks.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use rustfft::{num_complex::Complex, FftPlanner};

use crate::divergence::Bits;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::snr::{ln_one_plus_exp, Snr};

/// PSD samples used for the autocovariance FFT.
pub const AUTOCOVARIANCE_SAMPLES: usize = 1 << 16;

const SZEGO_TOL: Tolerance = Tolerance { abs: 1e-300, rel: 1e-11, max_intervals: 4000 };

fn check_psd(beta: f64, c_beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta must lie in (0,1), got {beta}")));
    }
    if !(c_beta > 0.0) || !c_beta.is_finite() {
        return Err(invalid(format!("c_beta must be positive, got {c_beta}")));
    }
    Ok(2.0 / beta - 2.0)
}

/// `(1/2π) ∫_{−π}^{π} log2(1 + ρ P c_β |λ|^p) dλ` in bits per symbol.
///
/// With `λ = π e^{−s}` the integrand becomes a softplus in `s` times `e^{−s}`;
/// the range is split at the softplus knee.
pub fn szego_integral(beta: f64, c_beta: f64, power: f64, snr: Snr) -> Result<f64> {
    let p = check_psd(beta, c_beta)?;
    if !(power > 0.0) || !power.is_finite() {
        return Err(invalid(format!("power must be positive, got {power}")));
    }
    // Log of the integrand argument at λ = π, and its slope in s.
    let z0 = snr.ln() + power.ln() + c_beta.ln() + p * PI.ln();
    let g = |s: f64| ln_one_plus_exp(z0 - p * s) * (-s).exp();
    let knee = z0 / p;
    let mut total = 0.0;
    let tail_start = if knee > 0.0 {
        total += quadrature::integrate(g, 0.0, knee, SZEGO_TOL)
            .map_err(|e| Error::Quadrature(format!("Szego integral: {e}")))?
            .value;
        knee
    } else {
        0.0
    };
    total += quadrature::integrate_semi_infinite(g, tail_start, 1.0, SZEGO_TOL)
        .map_err(|e| Error::Quadrature(format!("Szego integral: {e}")))?
        .value;
    // (1/π) ∫_0^π … dλ = ∫_0^∞ … e^{−s} ds in nats, then to bits.
    Ok(total / LN_2)
}

/// `r_0, …, r_{T−1}` of the spectrum, from an FFT of `2^16` PSD samples.
pub fn toeplitz_autocovariance(beta: f64, c_beta: f64, t: usize) -> Result<Vec<f64>> {
    let p = check_psd(beta, c_beta)?;
    let n = AUTOCOVARIANCE_SAMPLES;
    if t > n / 2 {
        return Err(Error::Toeplitz(format!("block length {t} too large for {n} spectral samples")));
    }
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|j| {
            let idx = if j <= n / 2 { j } else { n - j };
            let lambda = 2.0 * PI * idx as f64 / n as f64;
            Complex::new(c_beta * lambda.powf(p), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(buf[..t].iter().map(|z| z.re / n as f64).collect())
}

/// Eigenvalues of the `T × T` Toeplitz covariance of the spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSpectrum {
    eigenvalues: Vec<f64>,
    autocovariance: Vec<f64>,
}

impl ToeplitzSpectrum {
    pub fn new(beta: f64, c_beta: f64, t: usize) -> Result<Self> {
        if t < 8 {
            return Err(invalid(format!("block length must be at least 8, got {t}")));
        }
        let r = toeplitz_autocovariance(beta, c_beta, t)?;
        let m = toeplitz(&r);
        let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.total_cmp(b));
        let top = *e.last().unwrap();
        if !(top > 0.0) || e[0] < -1e-8 * top {
            return Err(Error::Toeplitz(format!(
                "autocovariance is not positive semidefinite (eigenvalues in [{:e}, {top:e}])",
                e[0]
            )));
        }
        let floor = 1e-12 * top;
        for v in &mut e {
            *v = v.max(floor);
        }
        Ok(Self { eigenvalues: e, autocovariance: r })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn autocovariance(&self) -> &[f64] {
        &self.autocovariance
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        toeplitz(&self.autocovariance)
    }

    pub fn block_length(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Per-symbol distance between `CN(0, ρP R_T + I)` and `CN(0, I)` with
    /// `N` receive antennas.
    pub fn pair_distance(&self, power: f64, snr: Snr, n: usize) -> Bits {
        let shift = snr.ln() + power.ln();
        let nats: f64 = self
            .eigenvalues
            .iter()
            .map(|&l| {
                let z = shift + l.ln();
                ln_one_plus_exp(z - LN_2) - 0.5 * ln_one_plus_exp(z)
            })
            .sum();
        Bits::clamped(n as f64 * nats / (LN_2 * self.block_length() as f64))
    }
}

fn toeplitz(r: &[f64]) -> DMatrix<f64> {
    let t = r.len();
    DMatrix::from_fn(t, t, |i, j| r[i.abs_diff(j)])
}

/// Per-symbol on–off pair distance for the fractional-log channel.
pub fn frac_log_pair_distance(power: f64, beta: f64, c_beta: f64, snr: Snr, n: usize, t: usize) -> Result<Bits> {
    if !(power > 0.0) || !power.is_finite() {
        return Err(invalid(format!("power must be positive, got {power}")));
    }
    if n == 0 {
        return Err(invalid("receive antenna count must be at least 1"));
    }
    Ok(ToeplitzSpectrum::new(beta, c_beta, t)?.pair_distance(power, snr, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::bhatt_same_mean;
    use crate::linalg::CMatrix;
    use num_complex::Complex64;

    #[test]
    fn autocovariance_half_beta_closed_form() {
        // β = 1/2: f = λ², r_0 = π²/3, r_k = 2(−1)^k/k².
        let r = toeplitz_autocovariance(0.5, 1.0, 12).unwrap();
        assert!((r[0] - PI * PI / 3.0).abs() < 1e-7);
        for (k, &rk) in r.iter().enumerate().skip(1) {
            let exact = 2.0 * if k % 2 == 0 { 1.0 } else { -1.0 } / (k * k) as f64;
            assert!((rk - exact).abs() < 1e-7, "k={k}: {rk} vs {exact}");
        }
    }

    #[test]
    fn szego_refinement_agrees() {
        let snr = Snr::from_decades(6.0);
        let coarse = szego_integral(0.5, 1.0, 1.0, snr).unwrap();
        // Independent evaluation: plain adaptive quadrature in λ, split at the knee.
        let a = 1e6f64;
        let f = |l: f64| (a * l * l).ln_1p() / LN_2 / PI;
        let knee = a.powf(-0.5);
        let tol = Tolerance { abs: 1e-14, rel: 1e-13, max_intervals: 20000 };
        let fine = quadrature::integrate(f, 0.0, knee, tol).unwrap().value
            + quadrature::integrate(f, knee, PI, tol).unwrap().value;
        assert!((coarse - fine).abs() < 1e-8 * fine, "{coarse} vs {fine}");
        // Closed form for p = 2: (1/π)∫_0^π ln(1+aλ²) = ln(1+aπ²) − 2 + 2 atan(√a π)/(√a π).
        let x = a.sqrt() * PI;
        let exact = ((x * x).ln_1p() - 2.0 + 2.0 * x.atan() / x) / LN_2;
        assert!((coarse - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn szego_limits_and_monotone() {
        let tiny = szego_integral(0.3, 1.0, 1.0, Snr::from_decades(-12.0)).unwrap();
        assert!(tiny < 1e-10);
        let mut prev = 0.0;
        for d in [0.0, 1.0, 4.0, 20.0, 100.0, 300.0] {
            let v = szego_integral(0.3, 2.0, 1.0, Snr::from_decades(d)).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(szego_integral(1.0, 1.0, 1.0, Snr::from_decades(1.0)).is_err());
    }

    #[test]
    fn pair_distance_matches_explicit_log_det() {
        let snr = Snr::from_linear(50.0).unwrap();
        let spec = ToeplitzSpectrum::new(0.5, 1.0, 8).unwrap();
        let r = spec.matrix().map(|v| Complex64::new(v * 50.0, 0.0));
        let sigma = r + CMatrix::identity(8, 8);
        let explicit = bhatt_same_mean(&sigma, &CMatrix::identity(8, 8)).unwrap().value() / 8.0;
        assert!((spec.pair_distance(1.0, snr, 1).value() - explicit).abs() < 1e-10);
        let two = spec.pair_distance(1.0, snr, 2).value();
        assert_eq!(two, 2.0 * spec.pair_distance(1.0, snr, 1).value());
    }

    #[test]
    fn pair_distance_converges_in_block_length() {
        let snr = Snr::from_decades(4.0);
        let vals: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&t| frac_log_pair_distance(1.0, 0.5, 1.0, snr, 1, t).unwrap().value())
            .collect();
        for w in vals.windows(2) {
            assert!((w[1] / w[0] - 1.0).abs() < 0.05);
        }
        let low = frac_log_pair_distance(1.0, 0.5, 1.0, Snr::from_decades(-10.0), 1, 16).unwrap();
        assert!(low.value() < 1e-9);
        assert!(frac_log_pair_distance(1.0, 0.5, 1.0, snr, 1, 4).is_err());
    }
}
