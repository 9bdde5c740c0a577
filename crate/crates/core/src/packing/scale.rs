//! Exact packing of the scale family on the log-variance interval `[0, L]`.

use std::f64::consts::LN_2;

use super::family::{LawFamily, ScaleFamily};
use super::{check_count, PackingResult, CERTIFICATE_LIMIT};
use crate::divergence::log2_cosh;
use crate::error::{invalid, Result};
use crate::snr::Snr;

/// Log-variance spacing `c_N(δ) = 2 acosh(2^{δ/N})` at which two scale laws
/// observed on `N` antennas are exactly `δ` bits apart.
pub fn scale_spacing(delta: f64, n: usize) -> f64 {
    let t = delta / n as f64;
    if t > 40.0 {
        // acosh(y) = ln(2y) − O(y^{-2}), and y^{-2} < 2^{-80} here.
        2.0 * (t * LN_2 + LN_2)
    } else {
        // acosh(1 + ε) = ln(1 + ε + √(ε(2 + ε))) with ε = 2^t − 1.
        let eps = (t * LN_2).exp_m1();
        2.0 * (eps + (eps * (2.0 + eps)).sqrt()).ln_1p()
    }
}

/// `Δ*(K) = N log2 cosh(L / (2(K−1)))`; `K` may exceed `u64`.
pub fn scale_frontier_value(k: f64, snr: Snr, n: usize) -> Result<f64> {
    let k = check_count(k)?;
    check_antennas(n)?;
    Ok(frontier(k, snr.log_variance_range(), n))
}

fn frontier(k: f64, range: f64, n: usize) -> f64 {
    n as f64 * log2_cosh(range / (2.0 * (k - 1.0)))
}

fn check_antennas(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("receive antenna count must be at least 1"));
    }
    Ok(())
}

fn equal_levels(count: usize, range: f64) -> Vec<f64> {
    if count == 1 {
        return vec![0.0];
    }
    (0..count).map(|i| if i + 1 == count { range } else { range * i as f64 / (count - 1) as f64 }).collect()
}

/// Exact `N_pack(δ)`: equally spaced levels achieve it, pigeonhole caps it.
///
/// The count is settled against [`scale_frontier_value`] so that
/// `N_pack(δ) ≥ K ⇔ Δ*(K) ≥ δ` holds exactly in floating point.
pub fn scale_pack_count(delta: f64, snr: Snr, n: usize) -> Result<PackingResult> {
    let count = pack_count(delta, snr, n)?;
    let family = ScaleFamily { snr, receive: n };
    let k_pack = count.log2();
    let mut res = PackingResult::threshold(delta, snr, k_pack, k_pack, "equal-spacing", "pigeonhole");
    res.value_lower = count;
    res.value_upper = count;
    if count <= CERTIFICATE_LIMIT as f64 {
        let levels = equal_levels(count as usize, snr.log_variance_range());
        let min = if levels.len() > 1 { Some(frontier(count, snr.log_variance_range(), n)) } else { None };
        res = res.with_certificate(levels.iter().map(|u| family.to_input(u)).collect(), min);
    }
    res.checked()
}

fn pack_count(delta: f64, snr: Snr, n: usize) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    check_antennas(n)?;
    let range = snr.log_variance_range();
    let c = scale_spacing(delta, n);
    let mut count = 1.0 + (range / c).floor();
    if count < 9e15 {
        while frontier(count + 1.0, range, n) >= delta {
            count += 1.0;
        }
        while count >= 2.0 && frontier(count, range, n) < delta {
            count -= 1.0;
        }
    }
    Ok(count)
}

/// Exact `Δ*(K)` with its equally spaced certificate.
pub fn scale_frontier(k: usize, snr: Snr, n: usize) -> Result<PackingResult> {
    let value = scale_frontier_value(k as f64, snr, n)?;
    let mut res = PackingResult::count(k as f64, snr, value, value, "equal-spacing", "pigeonhole");
    if k <= CERTIFICATE_LIMIT {
        let family = ScaleFamily { snr, receive: n };
        let levels = equal_levels(k, snr.log_variance_range());
        let points: Vec<_> = levels.iter().map(|u| family.to_input(u)).collect();
        res = res.with_certificate(points, Some(value));
    }
    res.checked()
}

/// Divergence used to define the packing threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleDivergence {
    Bhattacharyya,
    /// Squared Hellinger distance of the `N`-antenna product laws.
    Hellinger,
    /// `min(KL(P‖Q), KL(Q‖P))` of the product laws, in bits.
    Kl,
}

/// Packing number of the scale family under another divergence threshold.
pub fn scale_pack_count_with(div: ScaleDivergence, delta: f64, snr: Snr, n: usize) -> Result<f64> {
    match div {
        ScaleDivergence::Bhattacharyya => pack_count(delta, snr, n),
        ScaleDivergence::Hellinger => {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(invalid(format!("Hellinger threshold must lie in (0,1), got {delta}")));
            }
            // 1 − 2^{−d_B} ≥ h  ⇔  d_B ≥ −log2(1 − h).
            pack_count(-(-delta).ln_1p() / LN_2, snr, n)
        }
        ScaleDivergence::Kl => {
            if !(delta > 0.0) || !delta.is_finite() {
                return Err(invalid(format!("delta must be positive, got {delta}")));
            }
            check_antennas(n)?;
            // The smaller direction at spacing w is N(e^{−w} − 1 + w) nats.
            let target = delta * LN_2 / n as f64;
            let g = |w: f64| (-w).exp_m1() + w;
            let (mut lo, mut hi) = (0.0, 1.0);
            while g(hi) < target {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(1.0 + (snr.log_variance_range() / hi).floor())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn spacing_inverts_distance() {
        for &(delta, n) in &[(1e-9, 1), (0.3, 1), (2.0, 4), (100.0, 2), (500.0, 1)] {
            let c = scale_spacing(delta, n);
            let back = n as f64 * log2_cosh(c / 2.0);
            assert!((back - delta).abs() < 1e-9 * delta.max(1e-6), "{delta}: {back}");
        }
    }

    #[test]
    fn pack_count_examples() {
        let snr = Snr::from_linear(E * E - 1.0).unwrap();
        let d = log2_cosh(1.0);
        assert_eq!(scale_pack_count(d, snr, 1).unwrap().value_lower, 2.0);
        let many = scale_pack_count(1e-6, snr, 1).unwrap();
        assert!(many.value_lower > 800.0);
        let one = scale_pack_count(50.0, snr, 1).unwrap();
        assert_eq!(one.value_lower, 1.0);
        assert_eq!(one.certificate_min_distance, None);
        let big = Snr::from_decades(6.0);
        assert!(scale_pack_count(0.5, big, 2).unwrap().value_lower >= scale_pack_count(0.5, big, 1).unwrap().value_lower);
        assert!(scale_pack_count(0.0, big, 1).is_err());
    }

    #[test]
    fn frontier_examples() {
        let snr = Snr::from_linear(E * E - 1.0).unwrap();
        let r = scale_frontier(2, snr, 1).unwrap();
        assert!((r.value_lower - log2_cosh(1.0)).abs() < 1e-14);
        assert!(matches!(scale_frontier(1, snr, 1), Err(crate::Error::NoPair(1))));
        let far = scale_frontier_value(1e12, Snr::from_decades(300.0), 1).unwrap();
        assert!(far > 0.0 && far < 1e-18);
        let rho = Snr::from_decades(300.0);
        let k = rho.log2().ceil();
        let v = scale_frontier_value(k, rho, 3).unwrap();
        assert!((v / (3.0 * log2_cosh(LN_2 / 2.0)) - 1.0).abs() < 0.02);
    }

    #[test]
    fn alternative_divergences_order() {
        let snr = Snr::from_decades(9.0);
        let b = scale_pack_count_with(ScaleDivergence::Bhattacharyya, 1.0, snr, 1).unwrap();
        let h = scale_pack_count_with(ScaleDivergence::Hellinger, 0.5, snr, 1).unwrap();
        assert_eq!(b, h);
        let kl = scale_pack_count_with(ScaleDivergence::Kl, 1.0, snr, 1).unwrap();
        assert!(kl > 1.0);
        assert!(scale_pack_count_with(ScaleDivergence::Hellinger, 1.0, snr, 1).is_err());
    }
}
