//! Coherent MIMO and Grassmannian frontiers: random codebooks scored by
//! exact pairwise distances, against ball-packing and chordal-volume converses.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use super::family::{DistanceMatrix, GrassmannFamily, LawFamily, RayleighFamily};
use super::search::greedy_maxmin;
use super::{check_count, PackingResult};
use crate::channel::{block_ln_a, InputPoint};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::par;
use crate::rng::{complex_gaussian_matrix, derive_seed, substream};
use crate::snr::{ln_one_plus_exp, Snr};

const MIMO_TAG: u64 = 0x4d494d4f;
const GRASSMANN_TAG: u64 = 0x4752;
const POOL_STREAM: u64 = u64::MAX;
const POOL_LIMIT: usize = 2048;

/// Best-of-trials random search settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSearch {
    pub trials: usize,
    pub seed: u64,
    /// Also try a greedy farthest-point pick from this many candidates.
    pub candidates: Option<usize>,
}

impl Default for RandomSearch {
    fn default() -> Self {
        Self { trials: 16, seed: 0, candidates: None }
    }
}

/// Minimum pairwise distance, or `None` with fewer than two points.
///
/// Rows whose running minimum drops to `abort_below` stop early, so the
/// result is exact whenever it exceeds `abort_below`.
pub fn min_pairwise_distance<F: LawFamily>(family: &F, points: &[F::Point], abort_below: f64) -> Option<f64> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let rows = par::map_indexed(n - 1, |i| {
        let mut best = f64::INFINITY;
        for j in i + 1..n {
            best = best.min(family.distance(&points[i], &points[j]));
            if best <= abort_below {
                break;
            }
        }
        best
    });
    Some(rows.into_iter().fold(f64::INFINITY, f64::min))
}

fn check_mimo_shape(m: usize, n: usize, t: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(invalid("M and N must be at least 1"));
    }
    if t < m {
        return Err(invalid(format!("need T >= M, got T={t}, M={m}")));
    }
    Ok(())
}

/// `ln` of the ball-packing converse.
///
/// `K` codewords in the `2MT`-dimensional ball of radius `√T` with minimum
/// Frobenius distance `d` satisfy `d² ≤ 4T·min(1, (K^{1/(2MT)} − 1)^{−2})`;
/// eigenvalue concavity then gives `NM log2(1 + ρ d²/(4M))`.
pub fn mimo_frontier_upper_ln(m: usize, n: usize, t: usize, snr: Snr, ln_k: f64) -> f64 {
    let step = (ln_k / (2.0 * (m * t) as f64)).exp_m1();
    let ln_d2 = (4.0 * t as f64).ln() - 2.0 * step.ln().max(0.0);
    (n * m) as f64 * ln_one_plus_exp(snr.ln() + ln_d2 - (4.0 * m as f64).ln())
}

/// Converse on `Δ*(K)` for coherent MIMO over Rayleigh `H`, in bits.
pub fn mimo_frontier_upper(m: usize, n: usize, t: usize, snr: Snr, k: f64) -> Result<f64> {
    check_mimo_shape(m, n, t)?;
    let k = check_count(k)?;
    Ok(mimo_frontier_upper_ln(m, n, t, snr, k.ln()) / LN_2)
}

/// Exact `Δ*(2)`: the antipodal pair `±√(T/M)[I 0]` meets the trace bound,
/// `NM log2(1 + ρT/M)`.
pub fn coherent_pair_frontier(m: usize, n: usize, t: usize, snr: Snr) -> Result<PackingResult> {
    check_mimo_shape(m, n, t)?;
    let value = (n * m) as f64 * ln_one_plus_exp(snr.ln() + (t as f64 / m as f64).ln()) / LN_2;
    let mut x = CMatrix::zeros(m, t);
    let amp = Complex64::from((t as f64 / m as f64).sqrt());
    for i in 0..m {
        x[(i, i)] = amp;
    }
    let fam = RayleighFamily { m, receive: n, t, snr };
    let min = min_pairwise_distance(&fam, &[x.clone(), -x.clone()], f64::NEG_INFINITY);
    PackingResult::count(2.0, snr, value, value, "antipodal pair", "trace concavity")
        .with_certificate(vec![InputPoint::Matrix(x.clone()), InputPoint::Matrix(-x)], min)
        .checked()
}

struct Best<P> {
    points: Vec<P>,
    min: f64,
    trial: Option<usize>,
}

/// Sequential best-of-trials with parallel scoring inside each trial.
/// Ties keep the earlier trial.
fn best_of_trials<F: LawFamily>(
    family: &F,
    trials: usize,
    draw: impl Fn(usize) -> Vec<F::Point>,
) -> Best<F::Point> {
    let mut best = Best { points: Vec::new(), min: f64::NEG_INFINITY, trial: None };
    for trial in 0..trials {
        let points = draw(trial);
        if let Some(d) = min_pairwise_distance(family, &points, best.min) {
            if d > best.min {
                best = Best { points, min: d, trial: Some(trial) };
            }
        }
    }
    best
}

fn greedy_candidate<F: LawFamily>(family: &F, pool: Vec<F::Point>, k: usize, seed: u64) -> Result<(Vec<F::Point>, f64)> {
    let dm = DistanceMatrix::compute(family, &pool);
    let sel = greedy_maxmin(&dm, k, seed)?;
    let points = sel.indices.iter().map(|&i| pool[i].clone()).collect();
    Ok((points, sel.min_distance.unwrap_or(f64::INFINITY)))
}

fn pool_size(search: &RandomSearch, k: usize) -> Result<Option<usize>> {
    match search.candidates {
        None => Ok(None),
        Some(c) if c < k => Err(invalid(format!("candidate pool {c} smaller than K={k}"))),
        Some(c) if c > POOL_LIMIT => Err(Error::TooLarge(format!("candidate pool {c} exceeds {POOL_LIMIT}"))),
        Some(c) => Ok(Some(c)),
    }
}

fn draw_mimo(m: usize, t: usize, count: usize, seed: u64, stream: u64) -> Vec<CMatrix> {
    let mut rng = substream(seed, stream);
    (0..count)
        .map(|_| linalg::project_to_ball(complex_gaussian_matrix(&mut rng, m, t, 1.0 / m as f64), t as f64))
        .collect()
}

/// Random Gaussian codebooks for coherent MIMO, scored by the averaged
/// distance. Diagnostics carry the smallest-eigenvalue share
/// `λ_min(DD†)/‖D‖_F²` over all pairs of the winning codebook.
pub fn mimo_frontier_lower(m: usize, n: usize, t: usize, snr: Snr, k: usize, search: RandomSearch) -> Result<PackingResult> {
    check_mimo_shape(m, n, t)?;
    check_count(k as f64)?;
    if search.trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let fam = RayleighFamily { m, receive: n, t, snr };
    let seed = derive_seed(search.seed, MIMO_TAG);
    let mut best = best_of_trials(&fam, search.trials, |i| draw_mimo(m, t, k, seed, i as u64));
    let mut method = "random gaussian codebook";
    if let Some(c) = pool_size(&search, k)? {
        let (points, min) = greedy_candidate(&fam, draw_mimo(m, t, c, seed, POOL_STREAM), k, search.seed)?;
        if min > best.min {
            best = Best { points, min, trial: None };
            method = "greedy farthest-point";
        }
    }
    let upper = mimo_frontier_upper(m, n, t, snr, k as f64)?;
    let (share_min, share_mean) = eigen_shares(&best.points);
    let certificate = best.points.iter().map(|p| fam.to_input(p)).collect();
    let mut r = PackingResult::count(k as f64, snr, best.min, upper, method, "ball packing + concavity")
        .with_certificate(certificate, Some(best.min))
        .diag("min_eig_share_min", share_min)
        .diag("min_eig_share_mean", share_mean);
    if let Some(i) = best.trial {
        r = r.diag("winning_trial", i as f64);
    }
    r.checked()
}

fn eigen_shares(points: &[CMatrix]) -> (f64, f64) {
    let k = points.len();
    let shares: Vec<f64> = par::map_indexed(k * k, |idx| {
        let (i, j) = (idx / k, idx % k);
        if j <= i {
            return f64::NAN;
        }
        let eigs = RayleighFamily::gram_eigenvalues(&(&points[i] - &points[j]));
        let total: f64 = eigs.iter().sum();
        let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        if total > 0.0 { min / total } else { 0.0 }
    })
    .into_iter()
    .filter(|v| !v.is_nan())
    .collect();
    let min = shares.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = shares.iter().sum::<f64>() / shares.len().max(1) as f64;
    (min, mean)
}

fn check_grassmann_shape(m: usize, n: usize, t: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(invalid("M and N must be at least 1"));
    }
    if t < 2 * m {
        return Err(Error::Unsupported(format!(
            "Grassmannian bounds need T >= 2M (got T={t}, M={m}); below that the subspace geometry changes"
        )));
    }
    Ok(())
}

/// Chordal-volume converse on `Δ*(K)` for block fading, in bits.
///
/// The minimum chordal distance obeys
/// `d_c² ≤ min(M, M(T−M)/T · K/(K−1), 4M K^{−1/(M(T−M))})`, and concavity in
/// the `sin²θ_k` gives `NM log2(1 + a d_c²/M)`.
pub fn grassmann_frontier_upper(m: usize, n: usize, t: usize, snr: Snr, k: f64) -> Result<f64> {
    check_grassmann_shape(m, n, t)?;
    let k = check_count(k)?;
    let (mf, dim) = (m as f64, (m * (t - m)) as f64);
    let simplex = (mf * (t - m) as f64 / t as f64).ln() + (k / (k - 1.0)).ln();
    let volume = (4.0 * mf).ln() - k.ln() / dim;
    let ln_dc2 = mf.ln().min(simplex).min(volume);
    Ok((n * m) as f64 * ln_one_plus_exp(block_ln_a(snr) + ln_dc2 - mf.ln()) / LN_2)
}

fn draw_bases(m: usize, t: usize, count: usize, seed: u64, stream: u64) -> Vec<CMatrix> {
    let mut rng = substream(seed, stream);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = complex_gaussian_matrix(&mut rng, m, t, 1.0);
        // Rank deficiency has probability zero; redraw if it happens.
        if let Ok(q) = linalg::row_space_basis(&x) {
            out.push(q);
        }
    }
    out
}

fn orthogonal_pair(m: usize, t: usize) -> Vec<CMatrix> {
    let mut a = CMatrix::zeros(t, m);
    let mut b = CMatrix::zeros(t, m);
    for i in 0..m {
        a[(i, i)] = Complex64::from(1.0);
        b[(m + i, i)] = Complex64::from(1.0);
    }
    vec![a, b]
}

/// Block-fading frontier bounds. `K = 2` uses an orthogonal subspace pair,
/// which is optimal; larger `K` uses random subspaces.
pub fn grassmann_frontier_bounds(m: usize, n: usize, t: usize, snr: Snr, k: usize, search: RandomSearch) -> Result<PackingResult> {
    check_grassmann_shape(m, n, t)?;
    check_count(k as f64)?;
    if search.trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let fam = GrassmannFamily { m, receive: n, t, snr };
    let seed = derive_seed(search.seed, GRASSMANN_TAG);
    let (points, min, method) = if k == 2 {
        let pair = orthogonal_pair(m, t);
        let d = min_pairwise_distance(&fam, &pair, f64::NEG_INFINITY).unwrap_or(0.0);
        (pair, d, "orthogonal subspaces")
    } else {
        let mut best = best_of_trials(&fam, search.trials, |i| draw_bases(m, t, k, seed, i as u64));
        let mut method = "random subspaces";
        if let Some(c) = pool_size(&search, k)? {
            let (points, min) = greedy_candidate(&fam, draw_bases(m, t, c, seed, POOL_STREAM), k, search.seed)?;
            if min > best.min {
                best = Best { points, min, trial: None };
                method = "greedy farthest-point";
            }
        }
        (best.points, best.min, method)
    };
    let upper = grassmann_frontier_upper(m, n, t, snr, k as f64)?;
    let r = (k as f64).log2() / ((m * (t - m)) as f64 * snr.log2());
    let certificate = points.iter().map(|p| fam.to_input(p)).collect();
    PackingResult::count(k as f64, snr, min, upper, method, "chordal volume + concavity")
        .with_certificate(certificate, Some(min))
        .diag("load_r", r)
        .diag("sandwich_low_coeff", n as f64 * (1.0 - r))
        .diag("sandwich_high_coeff", (m * n) as f64 * (1.0 - r))
        .checked()
}

/// Packing-number bounds on the Grassmannian at threshold δ.
///
/// With `a = ρ²/(4(1+ρ))`, a chordal-ball argument certifies
/// `K ≥ M(T−M) log2(a / (2^{δ/N} − 1))` (the Gilbert–Varshamov side) and the
/// volume bound caps `K ≤ M(T−M) log2(4a / (2^{δ/(NM)} − 1))`.
pub fn grassmann_pack_bounds(m: usize, n: usize, t: usize, snr: Snr, delta: f64) -> Result<PackingResult> {
    check_grassmann_shape(m, n, t)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    let dim = (m * (t - m)) as f64;
    let ln_a = block_ln_a(snr);
    let lower = dim * (ln_a - (delta * LN_2 / n as f64).exp_m1().ln()) / LN_2;
    let upper = dim * (4f64.ln() + ln_a - (delta * LN_2 / (n * m) as f64).exp_m1().ln()) / LN_2;
    let upper = upper.max(0.0);
    PackingResult::threshold(delta, snr, lower.clamp(0.0, upper), upper, "gilbert-varshamov on chordal balls", "chordal volume")
        .checked()
}
