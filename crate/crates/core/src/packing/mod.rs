//! Packing numbers and diversity frontiers.
//!
//! The scale family (fast fading, multipath) is solved exactly. MIMO,
//! fixed-H and Grassmannian classes get constructive lower bounds with
//! certificates and converse upper bounds; results whose lower bound exceeds
//! the upper bound are rejected.

mod bounds;
mod expurgate;
mod family;
mod lattice;
mod mimo;
mod scale;
mod search;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelKind, ChannelSpec, InputPoint, PowerConstraint};
use crate::error::{invalid, Error, Result};
use crate::snr::Snr;

pub use bounds::{binary_entropy, cutoff_rate, cutoff_rate_matrix, kl_converse_bound, scale_kl_cover};
pub use expurgate::{expurgate, expurgated_pack_lower, expurgated_pack_lower_family, Expurgation};
pub use family::{
    DistanceMatrix, FixedHFamily, FracLogFamily, FracLogPoint, GrassmannFamily, LawFamily, RayleighFamily,
    ScaleFamily,
};
pub use lattice::{
    coherent_pack_bounds, fixed_h_frontier_bounds, fixed_h_pack_bounds, fixed_h_pair_frontier, FixedHGeometry,
};
pub use mimo::{
    coherent_pair_frontier, grassmann_frontier_bounds, grassmann_frontier_upper, grassmann_pack_bounds,
    min_pairwise_distance, mimo_frontier_lower, mimo_frontier_upper, mimo_frontier_upper_ln, RandomSearch,
};
pub use scale::{
    scale_frontier, scale_frontier_value, scale_pack_count, scale_pack_count_with, scale_spacing, ScaleDivergence,
};
pub use search::{bruteforce_frontier, greedy_maxmin, Selection, BRUTEFORCE_LIMIT};

/// Largest codebook returned as an explicit certificate.
pub const CERTIFICATE_LIMIT: usize = 4096;

/// What a packing query fixes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PackingMode {
    /// Fix δ, bound the packing number.
    Threshold,
    /// Fix K, bound the frontier Δ*(K).
    Count,
}

/// Outcome of a packing computation.
///
/// In threshold mode the values are packing numbers (codebook sizes); in
/// count mode they are frontier distances in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    pub mode: PackingMode,
    pub delta: Option<f64>,
    pub k: Option<f64>,
    pub rho: f64,
    pub value_lower: f64,
    pub value_upper: f64,
    pub method_lower: String,
    pub method_upper: String,
    /// `log2` of the certified packing number (threshold mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_pack: Option<f64>,
    /// `log2` of the packing-number upper bound (threshold mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_pack_upper: Option<f64>,
    pub certificate: Option<Vec<InputPoint>>,
    /// Minimum pairwise distance of the certificate, in bits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate_min_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
}

impl PackingResult {
    pub(crate) fn count(k: f64, snr: Snr, lower: f64, upper: f64, method_lower: &str, method_upper: &str) -> Self {
        Self {
            mode: PackingMode::Count,
            delta: None,
            k: Some(k),
            rho: snr.linear(),
            value_lower: lower,
            value_upper: upper,
            method_lower: method_lower.into(),
            method_upper: method_upper.into(),
            k_pack: None,
            k_pack_upper: None,
            certificate: None,
            certificate_min_distance: None,
            diagnostics: BTreeMap::new(),
        }
    }

    /// Threshold-mode result from `log2` bounds on the packing number.
    pub(crate) fn threshold(delta: f64, snr: Snr, k_lower: f64, k_upper: f64, method_lower: &str, method_upper: &str) -> Self {
        Self {
            mode: PackingMode::Threshold,
            delta: Some(delta),
            k: None,
            rho: snr.linear(),
            value_lower: k_lower.exp2(),
            value_upper: k_upper.exp2(),
            method_lower: method_lower.into(),
            method_upper: method_upper.into(),
            k_pack: Some(k_lower),
            k_pack_upper: Some(k_upper),
            certificate: None,
            certificate_min_distance: None,
            diagnostics: BTreeMap::new(),
        }
    }

    pub(crate) fn with_certificate(mut self, points: Vec<InputPoint>, min_distance: Option<f64>) -> Self {
        self.certificate = Some(points);
        self.certificate_min_distance = min_distance;
        self
    }

    pub(crate) fn diag(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.into(), value);
        self
    }

    /// Enforce `lower ≤ upper` (with a relative slack for rounding).
    pub(crate) fn checked(self) -> Result<Self> {
        let (lo, hi) = match self.mode {
            PackingMode::Count => (self.value_lower, self.value_upper),
            PackingMode::Threshold => (self.k_pack.unwrap_or(0.0), self.k_pack_upper.unwrap_or(f64::INFINITY)),
        };
        if lo > hi + 1e-9 * hi.abs().max(1.0) {
            return Err(Error::Sandwich { lower: lo, upper: hi });
        }
        Ok(self)
    }
}

/// A packing request against a channel spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingQuery {
    pub spec: ChannelSpec,
    pub mode: PackingMode,
    /// δ in bits (threshold mode).
    pub delta: Option<f64>,
    /// K (count mode).
    pub k: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Pool size for a greedy farthest-point candidate, if any.
    pub candidates: Option<usize>,
    /// Pair-evaluation budget for expurgated constructions.
    pub budget: u64,
}

impl PackingQuery {
    pub fn threshold(spec: ChannelSpec, delta: f64) -> Self {
        Self { spec, mode: PackingMode::Threshold, delta: Some(delta), k: None, trials: 16, seed: 0, candidates: None, budget: 2_000_000 }
    }

    pub fn count(spec: ChannelSpec, k: f64) -> Self {
        Self { spec, mode: PackingMode::Count, delta: None, k: Some(k), trials: 16, seed: 0, candidates: None, budget: 2_000_000 }
    }
}

/// Run a packing query with the construction appropriate to the channel.
pub fn pack(q: &PackingQuery) -> Result<PackingResult> {
    q.spec.validate()?;
    let spec = &q.spec;
    let snr = spec.effective_snr()?;
    match q.mode {
        PackingMode::Threshold => {
            let delta = q.delta.ok_or_else(|| invalid("threshold mode needs delta"))?;
            if !(delta > 0.0) || !delta.is_finite() {
                return Err(invalid(format!("delta must be positive, got {delta}")));
            }
            match spec.kind {
                ChannelKind::FastFading | ChannelKind::Multipath => scale_pack_count(delta, snr, spec.n),
                ChannelKind::FixedH => fixed_h_pack_bounds(&spec.h_matrix()?, spec.t, snr, delta),
                ChannelKind::CoherentMIMO => coherent_pack_bounds(spec.m, spec.n, spec.t, snr, delta, q.seed),
                ChannelKind::BlockFading => grassmann_pack_bounds(spec.m, spec.n, spec.t, snr, delta),
                ChannelKind::FracLog => expurgated_pack_lower(spec, delta, None, q.budget, q.seed)
                    .map(|e| e.into_result(delta, snr)),
            }
        }
        PackingMode::Count => {
            let k = q.k.ok_or_else(|| invalid("count mode needs K"))?;
            let k = check_count(k)?;
            match spec.kind {
                ChannelKind::FastFading | ChannelKind::Multipath => {
                    if k <= CERTIFICATE_LIMIT as f64 {
                        scale_frontier(k as usize, snr, spec.n)
                    } else {
                        let v = scale_frontier_value(k, snr, spec.n)?;
                        Ok(PackingResult::count(k, snr, v, v, "equal-spacing", "pigeonhole"))
                    }
                }
                ChannelKind::FixedH => fixed_h_frontier_bounds(&spec.h_matrix()?, spec.t, snr, k),
                ChannelKind::CoherentMIMO => {
                    if k == 2.0 {
                        coherent_pair_frontier(spec.m, spec.n, spec.t, snr)
                    } else if k <= CERTIFICATE_LIMIT as f64 {
                        let search = RandomSearch { trials: q.trials, seed: q.seed, candidates: q.candidates };
                        mimo_frontier_lower(spec.m, spec.n, spec.t, snr, k as usize, search)
                    } else {
                        let up = mimo_frontier_upper(spec.m, spec.n, spec.t, snr, k)?;
                        Ok(PackingResult::count(k, snr, 0.0, up, "none (K above certificate limit)", "volume-concavity"))
                    }
                }
                ChannelKind::BlockFading => {
                    if k <= CERTIFICATE_LIMIT as f64 {
                        let search = RandomSearch { trials: q.trials, seed: q.seed, candidates: q.candidates };
                        grassmann_frontier_bounds(spec.m, spec.n, spec.t, snr, k as usize, search)
                    } else {
                        let up = grassmann_frontier_upper(spec.m, spec.n, spec.t, snr, k)?;
                        Ok(PackingResult::count(k, snr, 0.0, up, "none (K above certificate limit)", "grassmann-volume"))
                    }
                }
                ChannelKind::FracLog => {
                    if k != 2.0 {
                        return Err(Error::Unsupported(
                            "FracLog frontier is only available for K = 2 (on-off pair)".into(),
                        ));
                    }
                    frac_log_pair_frontier(spec)
                }
            }
        }
    }
}

pub(crate) fn check_count(k: f64) -> Result<f64> {
    if !(k >= 1.0) || k.fract() != 0.0 || !k.is_finite() {
        return Err(invalid(format!("K must be a positive integer, got {k}")));
    }
    if k < 2.0 {
        return Err(Error::NoPair(k as usize));
    }
    Ok(k)
}

/// On–off pair frontier per symbol for FracLog, with the trace-concavity
/// upper bound `N log2(1 + ρ r_0 P)`.
pub fn frac_log_pair_frontier(spec: &ChannelSpec) -> Result<PackingResult> {
    spec.validate()?;
    if spec.kind != ChannelKind::FracLog {
        return Err(invalid("frac_log_pair_frontier needs a FracLog spec"));
    }
    let (beta, c) = (spec.beta.unwrap(), spec.c_beta.unwrap());
    let snr = spec.snr()?;
    let power = crate::channel::spec_power(spec);
    let toeplitz = crate::channel::ToeplitzSpectrum::new(beta, c, spec.t)?;
    let lower = toeplitz.pair_distance(power, snr, spec.n).value();
    let r0 = toeplitz.autocovariance()[0];
    let upper = spec.n as f64 * crate::snr::ln_one_plus_exp(snr.ln() + (r0 * power).ln()) / std::f64::consts::LN_2;
    let on = InputPoint::Matrix(crate::linalg::CMatrix::from_element(1, spec.t, power.sqrt().into()));
    let off = InputPoint::Matrix(crate::linalg::CMatrix::zeros(1, spec.t));
    PackingResult::count(2.0, snr, lower, upper, "on-off pair (per symbol)", "trace-concavity (per symbol)")
        .with_certificate(vec![off, on], Some(lower))
        .checked()
}

/// Certificate checks: every point feasible, min distance reproduced.
pub fn verify_certificate<F: LawFamily>(family: &F, points: &[InputPoint], constraint: PowerConstraint) -> Result<Option<f64>> {
    let mut decoded = Vec::with_capacity(points.len());
    for p in points {
        p.check_power(constraint)?;
        decoded.push(family.from_input(p)?);
    }
    Ok(min_pairwise_distance(family, &decoded, f64::NEG_INFINITY))
}
