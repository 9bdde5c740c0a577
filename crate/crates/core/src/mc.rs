//! Monte Carlo ML decoding to check the union–Bhattacharyya bound, the
//! averaged coefficient over Rayleigh `H`, and error-exponent slopes.
//!
//! Trials run in batches of [`crate::rng::BATCH`], batch `b` on substream
//! `b`. Error counts are integers, so results do not depend on the number of
//! workers.

use std::f64::consts::LN_2;

use nalgebra::{Cholesky, Dyn};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{block_fading_bhatt_explicit, block_fading_covariance, ChannelKind, ChannelSpec, InputPoint};
use crate::divergence::avg_bhatt_rayleigh;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::packing::{DistanceMatrix, FixedHFamily, LawFamily, RayleighFamily, ScaleFamily};
use crate::par;
use crate::rng::{batch_len, batches, complex_gaussian_matrix, complex_normal, derive_seed, substream};
use crate::snr::Snr;

/// Smallest trial count accepted by [`simulate_pe`].
pub const MIN_TRIALS: u64 = 1_000;
/// Smallest trial count accepted by [`verify_avg_bhatt`].
pub const MIN_AVG_TRIALS: u64 = 10_000;
/// Default ceiling for automatic trial escalation.
pub const DEFAULT_MAX_TRIALS: u64 = 100_000_000;

const SIM_TAG: u64 = 0x51;
const AVG_TAG: u64 = 0xa7;

fn default_confidence() -> f64 {
    3.0
}

fn default_max_trials() -> u64 {
    DEFAULT_MAX_TRIALS
}

fn default_escalate() -> bool {
    true
}

/// A simulation request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub spec: ChannelSpec,
    pub codebook: Vec<InputPoint>,
    /// Independent channel uses (blocks) per message.
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// Raise trials until the bound is resolvable (`bound ≥ 100/trials`).
    #[serde(default = "default_escalate")]
    pub escalate: bool,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
}

impl SimConfig {
    pub fn new(spec: ChannelSpec, codebook: Vec<InputPoint>, n: usize, trials: u64, seed: u64) -> Self {
        Self { spec, codebook, n, trials, seed, confidence: 3.0, escalate: true, max_trials: DEFAULT_MAX_TRIALS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub pe_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    pub errors: u64,
    /// `(K−1) 2^{−n Δ_min}`.
    pub bound: f64,
    pub delta_min: Option<f64>,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub rho: f64,
    pub seed: u64,
    /// `pe_hat − confidence · stderr ≤ bound`.
    pub pass: bool,
    /// False when even the trial ceiling cannot resolve the bound.
    pub resolvable: bool,
}

/// Index of the largest log-likelihood; ties go to the lowest index.
fn decide(ll: &[f64]) -> usize {
    par::argmax(ll).unwrap_or(0)
}

/// Fast-fading ML decision from the received energy `S = Σ|y|²` over
/// `count` samples: maximizes `−count · ln v_k − S / v_k`.
pub fn energy_decision(variances: &[f64], count: usize, energy: f64) -> usize {
    let ll: Vec<f64> = variances.iter().map(|&v| -(count as f64) * v.ln() - energy / v).collect();
    decide(&ll)
}

/// Fast-fading ML decision from the full sample vector.
pub fn full_decision(variances: &[f64], samples: &[Complex64]) -> usize {
    let ll: Vec<f64> = variances
        .iter()
        .map(|&v| samples.iter().map(|y| -v.ln() - y.norm_sqr() / v).sum())
        .collect();
    decide(&ll)
}

/// Received samples `y = √ρ h x + z` over `uses × receive` independent draws.
pub fn fast_fading_samples<R: Rng + ?Sized>(rng: &mut R, x: Complex64, snr: Snr, receive: usize, uses: usize) -> Vec<Complex64> {
    let amp = snr.linear().sqrt();
    (0..uses * receive)
        .map(|_| {
            let h = complex_normal(rng, 1.0);
            let z = complex_normal(rng, 1.0);
            h * x * amp + z
        })
        .collect()
}

enum Decoder {
    Scale { points: Vec<Complex64>, variances: Vec<f64> },
    Mean { h: Option<CMatrix>, points: Vec<CMatrix> },
    Block { points: Vec<CMatrix>, factors: Vec<(Cholesky<Complex64, Dyn>, f64)> },
}

struct Simulator {
    decoder: Decoder,
    snr: Snr,
    receive: usize,
    m: usize,
    t: usize,
}

impl Simulator {
    fn new(spec: &ChannelSpec, codebook: &[InputPoint]) -> Result<Self> {
        let snr = spec.snr()?;
        let (m, t, receive) = (spec.m, spec.t, spec.n);
        let matrices = || -> Result<Vec<CMatrix>> {
            codebook
                .iter()
                .map(|p| {
                    let x = p.as_matrix();
                    if x.shape() != (m, t) {
                        return Err(Error::Dimension(format!("codeword is {:?}, expected {m}x{t}", x.shape())));
                    }
                    Ok(x)
                })
                .collect()
        };
        let decoder = match spec.kind {
            ChannelKind::FastFading => {
                let points = codebook.iter().map(|p| p.as_scalar()).collect::<Result<Vec<_>>>()?;
                let rho = snr.linear();
                let variances = points.iter().map(|x| rho * x.norm_sqr() + 1.0).collect();
                Decoder::Scale { points, variances }
            }
            ChannelKind::FixedH => Decoder::Mean { h: Some(spec.h_matrix()?), points: matrices()? },
            ChannelKind::CoherentMIMO => Decoder::Mean { h: None, points: matrices()? },
            ChannelKind::BlockFading => {
                let points = matrices()?;
                let factors = points
                    .iter()
                    .map(|x| {
                        let cov = block_fading_covariance(x, snr);
                        Ok((linalg::cholesky(&cov)?, linalg::hermitian_log_det(&cov)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Decoder::Block { points, factors }
            }
            ChannelKind::Multipath => {
                return Err(Error::Unsupported(
                    "Multipath simulation is not provided; simulate the equivalent FastFading spec".into(),
                ))
            }
            ChannelKind::FracLog => {
                return Err(Error::Unsupported("FracLog simulation is out of scope (block covariance too large)".into()))
            }
        };
        Ok(Self { decoder, snr, receive, m, t })
    }

    fn len(&self) -> usize {
        match &self.decoder {
            Decoder::Scale { points, .. } => points.len(),
            Decoder::Mean { points, .. } | Decoder::Block { points, .. } => points.len(),
        }
    }

    /// One message over `uses` blocks; true on a decoding error.
    fn trial(&self, rng: &mut ChaCha8Rng, uses: usize) -> bool {
        let k = self.len();
        let w = rng.random_range(0..k);
        let amp = Complex64::from(self.snr.linear().sqrt());
        let decision = match &self.decoder {
            Decoder::Scale { points, variances } => {
                let samples = fast_fading_samples(rng, points[w], self.snr, self.receive, uses);
                let energy: f64 = samples.iter().map(|y| y.norm_sqr()).sum();
                energy_decision(variances, samples.len(), energy)
            }
            Decoder::Mean { h, points } => {
                let mut ll = vec![0.0; k];
                for _ in 0..uses {
                    let hh = match h {
                        Some(h) => h.clone(),
                        None => complex_gaussian_matrix(rng, self.receive, self.m, 1.0),
                    };
                    let z = complex_gaussian_matrix(rng, self.receive, self.t, 1.0);
                    let means: Vec<CMatrix> = points.iter().map(|x| &hh * x * amp).collect();
                    let y = &means[w] + z;
                    for (l, mu) in ll.iter_mut().zip(&means) {
                        *l -= linalg::frobenius_sq(&(&y - mu));
                    }
                }
                decide(&ll)
            }
            Decoder::Block { points, factors } => {
                let mut ll = vec![0.0; k];
                for _ in 0..uses {
                    let h = complex_gaussian_matrix(rng, self.receive, self.m, 1.0);
                    let z = complex_gaussian_matrix(rng, self.receive, self.t, 1.0);
                    let y = &h * &points[w] * amp + z;
                    for (l, (chol, log_det)) in ll.iter_mut().zip(factors) {
                        for i in 0..self.receive {
                            let col = y.row(i).adjoint();
                            let solved = chol.solve(&col);
                            *l -= log_det + col.dotc(&solved).re;
                        }
                    }
                }
                decide(&ll)
            }
        };
        decision != w
    }

    fn errors(&self, trials: u64, uses: usize, seed: u64) -> u64 {
        let seed = derive_seed(seed, SIM_TAG);
        par::sum_u64(batches(trials), |b| {
            let mut rng = substream(seed, b as u64);
            (0..batch_len(trials, b)).filter(|_| self.trial(&mut rng, uses)).count() as u64
        })
    }
}

/// Pairwise distances of a codebook under the spec's law family.
pub fn codebook_distances(spec: &ChannelSpec, codebook: &[InputPoint]) -> Result<DistanceMatrix> {
    let snr = spec.snr()?;
    match spec.kind {
        ChannelKind::FastFading | ChannelKind::Multipath => {
            matrix_for(&ScaleFamily { snr: spec.effective_snr()?, receive: spec.n }, codebook)
        }
        ChannelKind::FixedH => matrix_for(&FixedHFamily { h: spec.h_matrix()?, snr, t: spec.t }, codebook),
        ChannelKind::CoherentMIMO => matrix_for(&RayleighFamily { m: spec.m, receive: spec.n, t: spec.t, snr }, codebook),
        ChannelKind::BlockFading => {
            // Explicit covariances: codewords need not have orthogonal rows.
            let xs: Vec<CMatrix> = codebook.iter().map(|p| p.as_matrix()).collect();
            let k = xs.len();
            let mut d = vec![0.0; k * k];
            for i in 0..k {
                for j in i + 1..k {
                    let v = block_fading_bhatt_explicit(&xs[i], &xs[j], snr, spec.n)?.value();
                    d[i * k + j] = v;
                    d[j * k + i] = v;
                }
            }
            Ok(DistanceMatrix::from_fn(k, |i, j| d[i * k + j]))
        }
        ChannelKind::FracLog => Err(Error::Unsupported("FracLog codebooks are not simulated".into())),
    }
}

/// Exact minimum pairwise distance of a codebook under the spec's law family.
pub fn codebook_delta_min(spec: &ChannelSpec, codebook: &[InputPoint]) -> Result<Option<f64>> {
    let dm = codebook_distances(spec, codebook)?;
    Ok(dm.min_over(&(0..codebook.len()).collect::<Vec<_>>()))
}

fn matrix_for<F: LawFamily>(family: &F, codebook: &[InputPoint]) -> Result<DistanceMatrix> {
    let pts = codebook.iter().map(|p| family.from_input(p)).collect::<Result<Vec<_>>>()?;
    Ok(DistanceMatrix::compute(family, &pts))
}

/// `(K−1) 2^{−n Δ_min}`; zero for a single codeword.
pub fn union_bound(k: usize, n: usize, delta_min: Option<f64>) -> f64 {
    match delta_min {
        None => 0.0,
        Some(d) => ((k - 1) as f64).log2().mul_add(1.0, -(n as f64) * d).exp2(),
    }
}

/// Estimate the ML error probability and compare it with the union bound.
///
/// Trials escalate (up to `max_trials`) when the bound is below
/// `100 / trials`; if the ceiling is reached first the result is marked
/// unresolvable rather than claiming a vacuous pass.
pub fn simulate_pe(config: &SimConfig) -> Result<SimResult> {
    config.spec.validate()?;
    if config.trials < MIN_TRIALS {
        return Err(invalid(format!("trials must be at least {MIN_TRIALS}, got {}", config.trials)));
    }
    if config.n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if !(config.confidence > 0.0) || !config.confidence.is_finite() {
        return Err(invalid("confidence multiplier must be positive"));
    }
    if config.codebook.is_empty() {
        return Err(invalid("codebook is empty"));
    }
    let constraint = config.spec.power_constraint();
    for p in &config.codebook {
        p.check_power(constraint)?;
    }
    let sim = Simulator::new(&config.spec, &config.codebook)?;
    let k = config.codebook.len();
    let delta_min = codebook_delta_min(&config.spec, &config.codebook)?;
    let bound = union_bound(k, config.n, delta_min);
    let mut trials = config.trials;
    let needed = if bound > 0.0 { (100.0 / bound).ceil() } else { 0.0 };
    if config.escalate && needed > trials as f64 {
        trials = (needed.min(config.max_trials.max(config.trials) as f64)) as u64;
    }
    let resolvable = k == 1 || bound * trials as f64 >= 100.0;
    let errors = if k == 1 { 0 } else { sim.errors(trials, config.n, config.seed) };
    let pe_hat = errors as f64 / trials as f64;
    let stderr = (pe_hat * (1.0 - pe_hat) / trials as f64).sqrt();
    Ok(SimResult {
        pe_hat,
        stderr,
        trials,
        errors,
        bound,
        delta_min,
        n: config.n,
        k,
        rho: config.spec.rho,
        seed: config.seed,
        pass: pe_hat - config.confidence * stderr <= bound,
        resolvable,
    })
}

/// Monte Carlo check of the averaged Bhattacharyya coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvgBhattCheck {
    pub mc_estimate: f64,
    pub stderr: f64,
    pub closed_form: f64,
    pub z_score: f64,
    pub trials: u64,
}

/// Average `exp(−ρ‖HD‖_F²/4)` over i.i.d. `CN(0,1)` `H` (`N × M`) against
/// `∏(1 + ρλ_j/4)^{−N}`.
pub fn verify_avg_bhatt(d: &CMatrix, n: usize, rho: f64, trials: u64, seed: u64) -> Result<AvgBhattCheck> {
    if trials < MIN_AVG_TRIALS {
        return Err(invalid(format!("trials must be at least {MIN_AVG_TRIALS}, got {trials}")));
    }
    let eigs = linalg::hermitian_eigenvalues(&(d * d.adjoint()));
    let eigs: Vec<f64> = eigs.into_iter().map(|l| l.max(0.0)).collect();
    let closed = avg_bhatt_rayleigh(&eigs, n, rho)?.coefficient;
    let m = d.nrows();
    let seed = derive_seed(seed, AVG_TAG);
    let sums: Vec<(f64, f64)> = par::map_indexed(batches(trials), |b| {
        let mut rng = substream(seed, b as u64);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..batch_len(trials, b) {
            let h = complex_gaussian_matrix(&mut rng, n, m, 1.0);
            let v = (-0.25 * rho * linalg::frobenius_sq(&(&h * d))).exp();
            s += v;
            s2 += v * v;
        }
        (s, s2)
    });
    let (s, s2) = sums.iter().fold((0.0, 0.0), |acc, &(a, b)| (acc.0 + a, acc.1 + b));
    let tn = trials as f64;
    let mean = s / tn;
    let var = ((s2 / tn - mean * mean) * tn / (tn - 1.0)).max(0.0);
    let stderr = (var / tn).sqrt();
    let diff = (mean - closed).abs();
    let z_score = if diff == 0.0 { 0.0 } else if stderr == 0.0 { f64::INFINITY } else { diff / stderr };
    Ok(AvgBhattCheck { mc_estimate: mean, stderr, closed_form: closed, z_score, trials })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub n: usize,
    pub pe_hat: f64,
    pub stderr: f64,
    /// Inside the estimable window `[10/trials, 0.3]`.
    pub used: bool,
}

/// Weighted least-squares slope of `−log2 pe_hat` against `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Bits per use, clamped at zero.
    pub slope: f64,
    /// Half-width `confidence · se(slope)`.
    pub ci: f64,
    pub intercept: f64,
    pub delta_min: Option<f64>,
    /// `Δ_min − log2(K−1)/n_max`.
    pub floor: Option<f64>,
    pub above_floor: bool,
    pub points: Vec<ExponentPoint>,
}

/// Fit the per-use error exponent over a grid of block counts.
pub fn exponent_estimate(spec: &ChannelSpec, codebook: &[InputPoint], n_grid: &[usize], trials: u64, seed: u64, confidence: f64) -> Result<ExponentFit> {
    if codebook.len() < 2 {
        return Err(invalid("exponent estimation needs at least two codewords"));
    }
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let cfg = SimConfig {
            escalate: false,
            confidence,
            ..SimConfig::new(spec.clone(), codebook.to_vec(), n, trials, derive_seed(seed, n as u64))
        };
        let r = simulate_pe(&cfg)?;
        let used = r.pe_hat >= 10.0 / trials as f64 && r.pe_hat <= 0.3;
        points.push(ExponentPoint { n, pe_hat: r.pe_hat, stderr: r.stderr, used });
    }
    let used: Vec<&ExponentPoint> = points.iter().filter(|p| p.used).collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} grid points have pe_hat in [10/trials, 0.3]; need 3",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = used.iter().map(|p| -p.pe_hat.log2()).collect();
    let ws: Vec<f64> = used.iter().map(|p| (p.pe_hat * LN_2 / p.stderr).powi(2)).collect();
    let sw: f64 = ws.iter().sum();
    let xm = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = ws.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = ws.iter().zip(xs.iter().zip(&ys)).map(|(w, (x, y))| w * (x - xm) * (y - ym)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("n grid needs at least two distinct values".into()));
    }
    let raw = sxy / sxx;
    let slope = raw.max(0.0);
    let ci = confidence * (1.0 / sxx).sqrt();
    let delta_min = codebook_delta_min(spec, codebook)?;
    let n_max = xs.iter().copied().fold(0.0, f64::max);
    let floor = delta_min.map(|d| d - ((codebook.len() - 1) as f64).log2() / n_max);
    Ok(ExponentFit {
        slope,
        ci,
        intercept: ym - raw * xm,
        delta_min,
        floor,
        above_floor: floor.map_or(true, |f| slope + ci >= f),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn on_off(rho: f64, n: usize) -> (ChannelSpec, Vec<InputPoint>) {
        let spec = ChannelSpec::fast_fading(n, rho).unwrap();
        (spec, vec![InputPoint::Scalar(0.0.into()), InputPoint::Scalar(1.0.into())])
    }

    #[test]
    fn single_codeword_never_errs() {
        let (spec, cb) = on_off(10.0, 1);
        let r = simulate_pe(&SimConfig::new(spec, cb[..1].to_vec(), 3, 1000, 0)).unwrap();
        assert_eq!((r.pe_hat, r.bound, r.delta_min), (0.0, 0.0, None));
        assert!(r.pass);
    }

    #[test]
    fn duplicate_codewords_tie_low() {
        let (spec, _) = on_off(10.0, 1);
        let x = InputPoint::Scalar(0.5.into());
        let r = simulate_pe(&SimConfig::new(spec, vec![x.clone(), x], 1, 20_000, 4)).unwrap();
        // Every tie goes to index 0, so message 1 is always lost.
        assert!((r.pe_hat - 0.5).abs() < 4.0 * r.stderr, "{}", r.pe_hat);
    }

    #[test]
    fn too_few_trials_rejected() {
        let (spec, cb) = on_off(10.0, 1);
        assert!(simulate_pe(&SimConfig::new(spec, cb, 1, 100, 0)).is_err());
    }

    #[test]
    fn deterministic_and_worker_independent() {
        let (spec, cb) = on_off(10.0, 2);
        let cfg = SimConfig::new(spec, cb, 2, 5_000, 9);
        let a = simulate_pe(&cfg).unwrap();
        let b = par::single_threaded(|| simulate_pe(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn energy_matches_full_decoding() {
        let snr = Snr::from_linear(30.0).unwrap();
        let pts = [0.0, 0.3, 0.7, 1.0].map(|a: f64| Complex64::new(a, 0.0));
        let vs: Vec<f64> = pts.iter().map(|x| 30.0 * x.norm_sqr() + 1.0).collect();
        let mut rng = substream(5, 0);
        for i in 0..2000 {
            let s = fast_fading_samples(&mut rng, pts[i % 4], snr, 2, 3);
            let e: f64 = s.iter().map(|y| y.norm_sqr()).sum();
            assert_eq!(energy_decision(&vs, s.len(), e), full_decision(&vs, &s));
        }
    }

    #[test]
    fn avg_bhatt_zero_difference() {
        let r = verify_avg_bhatt(&CMatrix::zeros(2, 3), 2, 10.0, 10_000, 1).unwrap();
        assert_eq!((r.mc_estimate, r.closed_form, r.z_score), (1.0, 1.0, 0.0));
    }

    #[test]
    fn avg_bhatt_scalar_half() {
        let rho = 100.0;
        let d = CMatrix::from_element(1, 1, Complex64::new((4.0 / rho as f64).sqrt(), 0.0));
        let r = verify_avg_bhatt(&d, 1, rho, 200_000, 2).unwrap();
        assert!((r.closed_form - 0.5).abs() < 1e-12);
        assert!(r.z_score < 4.0);
    }
}
