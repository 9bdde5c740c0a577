//! Random coding with expurgation: draw `K` codewords, drop one codeword per
//! pair closer than δ, keep the survivors. Doubling `K` until the certified
//! size stops growing or the pair budget runs out.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::family::{FixedHFamily, FracLogFamily, GrassmannFamily, LawFamily, RayleighFamily, ScaleFamily};
use super::PackingResult;
use crate::channel::{spec_power, ChannelKind, ChannelSpec, InputPoint, ToeplitzSpectrum};
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CVector};
use crate::par;
use crate::rng::{complex_gaussian_matrix, derive_seed, substream};
use crate::snr::Snr;

const EXPURGATE_TAG: u64 = 0x6578;
const MAX_LEVEL: u32 = 40;

/// Outcome of an expurgated random-coding run.
#[derive(Debug, Clone, PartialEq)]
pub struct Expurgation {
    /// Codebook size drawn at the winning level.
    pub drawn: usize,
    /// Surviving codebook size; every surviving pair is at least δ apart.
    pub certified: usize,
    pub bad_pairs: u64,
    /// Pair distances evaluated across all levels.
    pub evaluations: u64,
    pub survivors: Vec<InputPoint>,
    pub min_distance: Option<f64>,
    /// `(drawn, certified)` per level tried.
    pub schedule: Vec<(usize, usize)>,
}

impl Expurgation {
    /// Threshold-mode result. No converse is attached, so the upper value is infinite.
    pub fn into_result(self, delta: f64, snr: Snr) -> PackingResult {
        let k_lower = (self.certified as f64).log2();
        let mut r = PackingResult::threshold(delta, snr, k_lower, f64::INFINITY, "random coding + expurgation", "none")
            .diag("drawn", self.drawn as f64)
            .diag("bad_pairs", self.bad_pairs as f64)
            .diag("pair_evaluations", self.evaluations as f64);
        let min = self.min_distance;
        r = r.with_certificate(self.survivors, min);
        r
    }
}

/// Keep-lowest expurgation. Returns survivor indices and the bad-pair count.
///
/// Walking codewords in order, each live codeword removes every later one
/// within δ of it. Survivors are pairwise at least δ apart and number at
/// least `K − bad pairs`.
pub fn expurgate<F: LawFamily>(family: &F, points: &[F::Point], delta: f64) -> (Vec<usize>, u64) {
    let n = points.len();
    let close: Vec<Vec<usize>> = par::map_indexed(n, |i| {
        (i + 1..n).filter(|&j| !(family.distance(&points[i], &points[j]) >= delta)).collect()
    });
    let bad = close.iter().map(|c| c.len() as u64).sum();
    let mut alive = vec![true; n];
    for (i, c) in close.iter().enumerate() {
        if alive[i] {
            for &j in c {
                alive[j] = false;
            }
        }
    }
    ((0..n).filter(|&i| alive[i]).collect(), bad)
}

fn pair_cost(k: usize) -> u64 {
    (k as u64) * (k as u64 - 1) / 2
}

/// Doubling-schedule expurgation over a law family.
///
/// Level `j` draws `2^j` points from substream `j` of the seed, so runs at
/// different SNRs share their random inputs when the sampler ignores SNR.
/// `r0_estimate` (bits) caps `K` at `2^{⌈R0⌉+2}`.
pub fn expurgated_pack_lower_family<F, S>(
    family: &F,
    sampler: S,
    delta: f64,
    r0_estimate: Option<f64>,
    budget: u64,
    seed: u64,
) -> Result<Expurgation>
where
    F: LawFamily,
    S: Fn(&mut ChaCha8Rng) -> F::Point,
{
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    if budget < pair_cost(2) {
        return Err(Error::Budget(format!("budget {budget} cannot afford a single pair")));
    }
    let cap_level = match r0_estimate {
        Some(r0) if r0.is_finite() && r0 >= 0.0 => (r0.ceil() as u32 + 2).clamp(1, MAX_LEVEL),
        Some(r0) => return Err(invalid(format!("R0 estimate must be a nonnegative number, got {r0}"))),
        None => MAX_LEVEL,
    };
    let seed = derive_seed(seed, EXPURGATE_TAG);
    let mut spent = 0u64;
    let mut schedule = Vec::new();
    let mut best: Option<(usize, Vec<F::Point>, Vec<usize>, u64)> = None;
    let mut decreases = 0;
    for level in 1..=cap_level {
        let k = 1usize << level;
        if spent + pair_cost(k) > budget {
            break;
        }
        spent += pair_cost(k);
        let mut rng = substream(seed, level as u64);
        let points: Vec<F::Point> = (0..k).map(|_| sampler(&mut rng)).collect();
        let (keep, bad) = expurgate(family, &points, delta);
        let size = keep.len();
        let prev = schedule.last().map(|&(_, c)| c);
        schedule.push((k, size));
        if best.as_ref().map_or(true, |b| size > b.2.len()) {
            best = Some((k, points, keep, bad));
        }
        match prev {
            Some(p) if size < p => {
                decreases += 1;
                if decreases == 2 {
                    break;
                }
            }
            _ => decreases = 0,
        }
    }
    let (drawn, points, keep, bad_pairs) = best.expect("budget covers the first level");
    let kept: Vec<F::Point> = keep.iter().map(|&i| points[i].clone()).collect();
    let min_distance = super::min_pairwise_distance(family, &kept, f64::NEG_INFINITY);
    Ok(Expurgation {
        drawn,
        certified: kept.len(),
        bad_pairs,
        evaluations: spent,
        survivors: kept.iter().map(|p| family.to_input(p)).collect(),
        min_distance,
        schedule,
    })
}

/// Expurgated lower bound on the packing number for any channel spec.
///
/// Input distributions: scale family uniform in log-variance; coherent and
/// fixed-H Gaussian matrices projected into the power ball; block fading
/// uniform subspaces; FracLog i.i.d. amplitudes uniform in `[0, √P]`.
pub fn expurgated_pack_lower(spec: &ChannelSpec, delta: f64, r0_estimate: Option<f64>, budget: u64, seed: u64) -> Result<Expurgation> {
    spec.validate()?;
    let snr = spec.effective_snr()?;
    let (m, t) = (spec.m, spec.t);
    let gaussian = |rng: &mut ChaCha8Rng| {
        linalg::project_to_ball(complex_gaussian_matrix(rng, m, t, 1.0 / m as f64), t as f64)
    };
    match spec.kind {
        ChannelKind::FastFading | ChannelKind::Multipath => {
            let fam = ScaleFamily { snr, receive: spec.n };
            let range = fam.range();
            expurgated_pack_lower_family(&fam, |rng| rng.random::<f64>() * range, delta, r0_estimate, budget, seed)
        }
        ChannelKind::FixedH => {
            let fam = FixedHFamily { h: spec.h_matrix()?, snr, t };
            expurgated_pack_lower_family(&fam, gaussian, delta, r0_estimate, budget, seed)
        }
        ChannelKind::CoherentMIMO => {
            let fam = RayleighFamily { m, receive: spec.n, t, snr };
            expurgated_pack_lower_family(&fam, gaussian, delta, r0_estimate, budget, seed)
        }
        ChannelKind::BlockFading => {
            if t < m {
                return Err(invalid("block fading needs T >= M"));
            }
            let fam = GrassmannFamily { m, receive: spec.n, t, snr };
            let sampler = |rng: &mut ChaCha8Rng| loop {
                if let Ok(q) = linalg::row_space_basis(&complex_gaussian_matrix(rng, m, t, 1.0)) {
                    break q;
                }
            };
            expurgated_pack_lower_family(&fam, sampler, delta, r0_estimate, budget, seed)
        }
        ChannelKind::FracLog => {
            let power = spec_power(spec);
            let toeplitz = ToeplitzSpectrum::new(spec.beta.unwrap(), spec.c_beta.unwrap(), t)?;
            let fam = FracLogFamily::new(&toeplitz, snr, power, spec.n);
            let amp = power.sqrt();
            let sampler = |rng: &mut ChaCha8Rng| {
                let x = CVector::from_fn(t, |_, _| Complex64::new(amp * rng.random::<f64>(), 0.0));
                fam.point(x).expect("diag(x) R diag(x)† + I is positive definite")
            };
            expurgated_pack_lower_family(&fam, sampler, delta, r0_estimate, budget, seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::scale_pack_count;

    #[test]
    fn huge_threshold_certifies_one() {
        let spec = ChannelSpec::fast_fading(1, 100.0).unwrap();
        let e = expurgated_pack_lower(&spec, 1e3, None, 10_000, 1).unwrap();
        assert_eq!(e.certified, 1);
        assert!(e.min_distance.is_none());
    }

    #[test]
    fn scale_within_few_bits_of_exact() {
        let spec = ChannelSpec::fast_fading(1, 1e6).unwrap();
        let e = expurgated_pack_lower(&spec, 1.0, None, 2_000_000, 7).unwrap();
        let exact = scale_pack_count(1.0, Snr::from_linear(1e6).unwrap(), 1).unwrap().k_pack.unwrap();
        let got = (e.certified as f64).log2();
        assert!(got <= exact + 1e-12 && exact - got < 3.0, "{got} vs {exact}");
        assert!(e.min_distance.unwrap() >= 1.0);
    }

    #[test]
    fn budget_errors() {
        let spec = ChannelSpec::fast_fading(1, 100.0).unwrap();
        assert!(matches!(expurgated_pack_lower(&spec, 1.0, None, 0, 1), Err(Error::Budget(_))));
    }

    #[test]
    fn survivors_are_separated() {
        let spec = ChannelSpec::block_fading(1, 1, 3, 1e3).unwrap();
        let e = expurgated_pack_lower(&spec, 2.0, Some(4.0), 100_000, 3).unwrap();
        assert!(e.schedule.len() <= 6);
        if let Some(d) = e.min_distance {
            assert!(d >= 2.0);
        }
    }
}
