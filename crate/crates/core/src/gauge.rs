//! Gauge identification from SNR sweeps, gauge-DOF and B-diversity
//! readings, tradeoff classification and the DMT comparison line.
//!
//! All gauges are evaluated from `log2 ρ`, so grids may reach `ρ = 10^300`.

use std::f64::consts::LN_2;
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::channel::{spec_power, szego_integral, ChannelKind, ChannelSpec, ToeplitzSpectrum};
use crate::error::{invalid, Error, Result};
use crate::packing::{
    self, coherent_pair_frontier, fixed_h_pair_frontier, scale_frontier_value, PackingQuery, RandomSearch,
};
use crate::par;
use crate::snr::{ln_one_plus_exp, RhoGrid, Snr};

/// Minimum sweep length for any reading.
pub const MIN_SAMPLES: usize = 6;

/// A candidate growth function of ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "parameter", rename_all = "kebab-case")]
pub enum GaugeFamily {
    Const,
    #[serde(rename = "loglog")]
    LogLog,
    /// `(log2 ρ)^β`, `0 < β < 1`.
    PowLog(f64),
    Log,
    /// `ρ^a`, `a > 0`.
    Pow(f64),
}

impl GaugeFamily {
    /// `ln g(ρ)`, or `None` where the gauge is not positive.
    pub fn ln_eval(&self, snr: Snr) -> Option<f64> {
        let l = snr.log2();
        let v = match *self {
            GaugeFamily::Const => 0.0,
            GaugeFamily::LogLog => {
                if l <= 1.0 {
                    return None;
                }
                l.log2().ln()
            }
            GaugeFamily::PowLog(b) => {
                if l <= 0.0 {
                    return None;
                }
                b * l.ln()
            }
            GaugeFamily::Log => {
                if l <= 0.0 {
                    return None;
                }
                l.ln()
            }
            GaugeFamily::Pow(a) => a * snr.ln(),
        };
        Some(v)
    }

    pub fn eval(&self, snr: Snr) -> Option<f64> {
        self.ln_eval(snr).map(f64::exp)
    }

    /// Const, loglog, `(log ρ)^β` for β = 0.1…0.9 (plus `extra_beta`), log,
    /// and `ρ^a` for a = 0.1…1.0.
    pub fn default_menu(extra_beta: Option<f64>) -> Vec<GaugeFamily> {
        let mut menu = vec![GaugeFamily::Const, GaugeFamily::LogLog];
        let mut betas: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        if let Some(b) = extra_beta {
            if b > 0.0 && b < 1.0 && betas.iter().all(|&x| (x - b).abs() > 1e-12) {
                betas.push(b);
                betas.sort_by(f64::total_cmp);
            }
        }
        menu.extend(betas.into_iter().map(GaugeFamily::PowLog));
        menu.push(GaugeFamily::Log);
        menu.extend((1..=10).map(|i| GaugeFamily::Pow(i as f64 / 10.0)));
        menu
    }
}

impl fmt::Display for GaugeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeFamily::Const => write!(f, "const"),
            GaugeFamily::LogLog => write!(f, "loglog"),
            GaugeFamily::PowLog(b) => write!(f, "pow-log({b})"),
            GaugeFamily::Log => write!(f, "log"),
            GaugeFamily::Pow(a) => write!(f, "pow({a})"),
        }
    }
}

/// How a candidate's fit is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftMethod {
    /// `|r_last / r_mid − 1|` with `r = value / g`; coefficient `r_last`.
    Ratio,
    /// Change of the slope `Δvalue / Δg` between the two tail quarters;
    /// coefficient is the last slope. Insensitive to additive offsets.
    Increment,
}

/// Decision thresholds and candidate menu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeConfig {
    pub drift_threshold: f64,
    /// Ratio growth (last over mid) that counts as divergent.
    pub divergence_factor: f64,
    /// Relative change (last over mid) that still counts as bounded.
    pub same_band: f64,
    pub method: DriftMethod,
    pub candidates: Vec<GaugeFamily>,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        Self {
            drift_threshold: 0.10,
            divergence_factor: 4.0,
            same_band: 0.25,
            method: DriftMethod::Ratio,
            candidates: GaugeFamily::default_menu(None),
        }
    }
}

impl GaugeConfig {
    pub fn with_method(mut self, method: DriftMethod) -> Self {
        self.method = method;
        self
    }

    /// Menu for a spec: adds the declared β of a FracLog channel.
    pub fn for_spec(spec: &ChannelSpec) -> Self {
        let extra = if spec.kind == ChannelKind::FracLog { spec.beta } else { None };
        Self { candidates: GaugeFamily::default_menu(extra), ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFit {
    pub gauge: GaugeFamily,
    pub drift: f64,
    pub coefficient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeStatus {
    Identified,
    Inconclusive,
}

/// Winning gauge with its coefficient and the per-candidate diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeReading {
    pub status: GaugeStatus,
    pub best: GaugeFamily,
    pub coefficient: f64,
    pub drift: f64,
    /// Drift of the runner-up minus drift of the winner.
    pub margin: f64,
    pub runner_up: Option<GaugeFamily>,
    pub method: DriftMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub fits: Vec<CandidateFit>,
    pub rho_log10: Vec<f64>,
    pub values: Vec<f64>,
}

fn tail_indices(n: usize) -> (usize, usize, usize) {
    let mid = n / 2;
    let last = n - 1;
    (mid, (mid + last) / 2, last)
}

fn fit_candidate(gauge: GaugeFamily, rho: &[Snr], values: &[f64], method: DriftMethod) -> CandidateFit {
    let bad = CandidateFit { gauge, drift: f64::INFINITY, coefficient: f64::NAN };
    let ln_g: Option<Vec<f64>> = rho.iter().map(|&s| gauge.ln_eval(s)).collect();
    let Some(ln_g) = ln_g else { return bad };
    let (mid, q, last) = tail_indices(values.len());
    let ratio = |i: usize| (values[i].ln() - ln_g[i]).exp();
    let use_ratio = method == DriftMethod::Ratio || gauge == GaugeFamily::Const;
    if use_ratio {
        let (rm, rl) = (values[mid].ln() - ln_g[mid], values[last].ln() - ln_g[last]);
        return CandidateFit { gauge, drift: (rl - rm).exp_m1().abs(), coefficient: ratio(last) };
    }
    let g = |i: usize| ln_g[i].exp();
    let slope = |a: usize, b: usize| {
        let dg = g(b) - g(a);
        if dg > 0.0 && dg.is_finite() {
            (values[b] - values[a]) / dg
        } else {
            f64::NAN
        }
    };
    let (sa, sb) = (slope(mid, q), slope(q, last));
    if !(sa > 0.0) || !sb.is_finite() {
        return bad;
    }
    CandidateFit { gauge, drift: (sb / sa - 1.0).abs(), coefficient: sb }
}

/// Pick the candidate whose normalized tail is flattest.
///
/// Needs at least six samples with strictly increasing ρ and positive
/// values. Non-monotone data or a winning drift above the threshold give an
/// inconclusive reading.
pub fn identify_gauge(samples: &[(Snr, f64)], config: &GaugeConfig) -> Result<GaugeReading> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!("need at least {MIN_SAMPLES} samples, got {}", samples.len())));
    }
    if samples.windows(2).any(|w| !(w[1].0.log2() > w[0].0.log2())) {
        return Err(invalid("rho must be strictly increasing"));
    }
    if samples.iter().any(|&(_, v)| !(v > 0.0) || !v.is_finite()) {
        return Err(invalid("sweep values must be positive and finite"));
    }
    if config.candidates.is_empty() {
        return Err(invalid("empty candidate menu"));
    }
    let rho: Vec<Snr> = samples.iter().map(|s| s.0).collect();
    let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let fits: Vec<CandidateFit> =
        config.candidates.iter().map(|&c| fit_candidate(c, &rho, &values, config.method)).collect();
    let mut order: Vec<usize> = (0..fits.len()).collect();
    order.sort_by(|&a, &b| fits[a].drift.total_cmp(&fits[b].drift).then(a.cmp(&b)));
    let win = &fits[order[0]];
    let runner = order.get(1).map(|&i| &fits[i]);
    let monotone = values.windows(2).all(|w| w[1] >= w[0]);
    let reason = if !monotone {
        Some("sweep values are not monotone in rho".to_string())
    } else if !(win.drift <= config.drift_threshold) {
        Some(format!("best drift {:.4} exceeds threshold {}", win.drift, config.drift_threshold))
    } else {
        None
    };
    Ok(GaugeReading {
        status: if reason.is_none() { GaugeStatus::Identified } else { GaugeStatus::Inconclusive },
        best: win.gauge,
        coefficient: win.coefficient,
        drift: win.drift,
        margin: runner.map_or(f64::INFINITY, |r| r.drift - win.drift),
        runner_up: runner.map(|r| r.gauge),
        method: config.method,
        reason,
        fits,
        rho_log10: rho.iter().map(|s| s.decades()).collect(),
        values,
    })
}

/// Effort settings for sweeps that need constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub trials: usize,
    pub seed: u64,
    pub budget: u64,
    pub candidates: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { trials: 16, seed: 0, budget: 2_000_000, candidates: None }
    }
}

/// `spec` with its SNR replaced.
pub fn spec_at(spec: &ChannelSpec, snr: Snr) -> Result<ChannelSpec> {
    let rho = snr.linear();
    if !rho.is_finite() {
        return Err(invalid(format!("rho = 10^{} is not representable", snr.decades())));
    }
    Ok(ChannelSpec { rho, ..spec.clone() })
}

/// Divisor turning per-block quantities into per-use ones.
pub fn uses_per_block(spec: &ChannelSpec) -> f64 {
    match spec.kind {
        ChannelKind::FixedH | ChannelKind::CoherentMIMO | ChannelKind::BlockFading => spec.t as f64,
        _ => 1.0,
    }
}

/// Certified `K_pack(δ; ρ)` per channel use.
pub fn k_pack_per_use(spec: &ChannelSpec, delta: f64, snr: Snr, opts: &SweepOptions) -> Result<f64> {
    let spec = spec_at(spec, snr)?;
    let q = PackingQuery { seed: opts.seed, budget: opts.budget, trials: opts.trials, candidates: opts.candidates, ..PackingQuery::threshold(spec.clone(), delta) };
    let r = packing::pack(&q)?;
    Ok(r.k_pack.unwrap_or(0.0) / uses_per_block(&spec))
}

/// Certified lower value of `Δ*(K; ρ)` per channel use.
pub fn frontier_per_use(spec: &ChannelSpec, k: f64, snr: Snr, opts: &SweepOptions) -> Result<f64> {
    let spec = spec_at(spec, snr)?;
    let q = PackingQuery { seed: opts.seed, budget: opts.budget, trials: opts.trials, candidates: opts.candidates, ..PackingQuery::count(spec.clone(), k) };
    let r = packing::pack(&q)?;
    if r.certificate.is_none() && r.value_lower == 0.0 {
        return Err(Error::TooLarge(format!("no certified lower bound for K = {k} on {}", spec.kind)));
    }
    Ok(r.value_lower / uses_per_block(&spec))
}

/// `log2 K` for load `r`: `r` times the class's rate gauge in bits.
///
/// Fixed-H uses `ρ^r`, coherent MIMO `ρ^{rM}`, block fading
/// `ρ^{rM(T−M)}`, the scale family `(log2 ρ)^r`. FracLog supports `r = 0`.
pub fn load_count_log2(spec: &ChannelSpec, r: f64, snr: Snr) -> Result<f64> {
    let m = spec.m.min(spec.n) as f64;
    let (scale, r_max) = match spec.kind {
        ChannelKind::FixedH => {
            let rank = crate::linalg::numerical_rank(&spec.h_matrix()?) as f64;
            (snr.log2(), rank)
        }
        ChannelKind::CoherentMIMO => (spec.m as f64 * snr.log2(), m),
        ChannelKind::BlockFading => ((spec.m * spec.t.saturating_sub(spec.m)) as f64 * snr.log2(), 1.0),
        ChannelKind::FastFading | ChannelKind::Multipath => (snr.log2().max(1.0).log2(), 1.0),
        ChannelKind::FracLog => (0.0, 0.0),
    };
    if !(r >= 0.0 && r <= r_max) {
        return Err(invalid(format!("load r = {r} outside [0, {r_max}] for {}", spec.kind)));
    }
    Ok(r * scale)
}

/// `K = max(2, ⌈2^{r g(ρ)}⌉)`.
pub fn load_count(spec: &ChannelSpec, r: f64, snr: Snr) -> Result<f64> {
    let bits = load_count_log2(spec, r, snr)?;
    if bits >= 1023.0 {
        return Err(Error::TooLarge(format!("K = 2^{bits} overflows")));
    }
    Ok(bits.exp2().ceil().max(2.0))
}

fn sweep<F>(grid: &RhoGrid, f: F) -> Result<Vec<(Snr, f64)>>
where
    F: Fn(Snr) -> Result<f64> + Sync + Send,
{
    let pts = grid.points();
    par::map_indexed(pts.len(), |i| f(pts[i]).map(|v| (pts[i], v))).into_iter().collect()
}

/// Gauge-DOF: the growth of `K_pack(δ; ρ)` per use, read by the increment
/// drift. Leading grid points with an empty packing (`K_pack = 0`) are dropped.
pub fn gauge_dof(spec: &ChannelSpec, delta: f64, grid: &RhoGrid, config: &GaugeConfig, opts: &SweepOptions) -> Result<GaugeReading> {
    spec.validate()?;
    if grid.span_decades() < 10.0 {
        return Err(invalid(format!("gauge-DOF needs a grid spanning at least 10 decades, got {}", grid.span_decades())));
    }
    let samples = sweep(grid, |s| k_pack_per_use(spec, delta, s, opts))?;
    let samples: Vec<_> = samples.into_iter().skip_while(|&(_, v)| v <= 0.0).collect();
    let cfg = config.clone().with_method(DriftMethod::Increment);
    identify_gauge(&samples, &cfg)
}

/// B-diversity: identifies `ψ_r` from `Δ*(⌈2^{r g}⌉; ρ)` per use; the
/// coefficient is the DIV reading.
pub fn b_diversity(spec: &ChannelSpec, r: f64, grid: &RhoGrid, config: &GaugeConfig, opts: &SweepOptions) -> Result<GaugeReading> {
    spec.validate()?;
    if spec.kind == ChannelKind::FracLog && r != 0.0 {
        return Err(Error::Unsupported("FracLog B-diversity is only available at r = 0".into()));
    }
    let samples = sweep(grid, |s| {
        let k = load_count(spec, r, s)?;
        match spec.kind {
            ChannelKind::FastFading | ChannelKind::Multipath => {
                scale_frontier_value(k, spec_at(spec, s)?.effective_snr()?, spec.n)
            }
            _ => frontier_per_use(spec, k, s, opts),
        }
    })?;
    identify_gauge(&samples, config)
}

/// Same-gauge or cross-gauge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SameGauge,
    CrossGauge,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::SameGauge => "same-gauge",
            Verdict::CrossGauge => "cross-gauge",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub rho_log10: f64,
    pub delta_star: f64,
    pub capacity_proxy: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffReport {
    pub verdict: Verdict,
    pub ratio_trace: Vec<RatioPoint>,
    /// Ratio at the last grid point over the ratio at mid-grid.
    pub growth: Option<f64>,
    pub rationale: String,
    pub rate_gauge: Option<GaugeReading>,
    pub diversity_gauge: Option<GaugeReading>,
}

/// Capacity proxy in bits per use.
///
/// Fixed-H and coherent `min(M,N) log2(1+ρ)`; scale family `log2 log2 ρ`;
/// block fading `(M(T−M)/T) log2 ρ`; FracLog the Szegő integral.
pub fn capacity_proxy(spec: &ChannelSpec, snr: Snr) -> Result<f64> {
    let v = match spec.kind {
        ChannelKind::FixedH | ChannelKind::CoherentMIMO => {
            spec.m.min(spec.n) as f64 * ln_one_plus_exp(snr.ln()) / LN_2
        }
        ChannelKind::FastFading | ChannelKind::Multipath => snr.log2().log2(),
        ChannelKind::BlockFading => {
            (spec.m * spec.t.saturating_sub(spec.m)) as f64 / spec.t as f64 * snr.log2()
        }
        ChannelKind::FracLog => szego_integral(spec.beta.unwrap(), spec.c_beta.unwrap(), spec_power(spec), snr)?,
    };
    if !(v > 0.0) {
        return Err(invalid(format!("capacity proxy is not positive at rho = 10^{}", snr.decades())));
    }
    Ok(v)
}

/// Closed-form `Δ*(2; ρ)` per use.
pub fn pair_frontier_per_use(spec: &ChannelSpec, snr: Snr) -> Result<f64> {
    let t = spec.t as f64;
    match spec.kind {
        ChannelKind::FastFading | ChannelKind::Multipath => {
            scale_frontier_value(2.0, spec_at(spec, snr)?.effective_snr()?, spec.n)
        }
        ChannelKind::FixedH => Ok(fixed_h_pair_frontier(&spec.h_matrix()?, spec.t, snr)?.value_lower / t),
        ChannelKind::CoherentMIMO => Ok(coherent_pair_frontier(spec.m, spec.n, spec.t, snr)?.value_lower / t),
        ChannelKind::BlockFading => {
            let r = packing::grassmann_frontier_bounds(spec.m, spec.n, spec.t, snr, 2, RandomSearch::default())?;
            Ok(r.value_lower / t)
        }
        ChannelKind::FracLog => {
            let toeplitz = ToeplitzSpectrum::new(spec.beta.unwrap(), spec.c_beta.unwrap(), spec.t)?;
            Ok(toeplitz.pair_distance(spec_power(spec), snr, spec.n).value())
        }
    }
}

/// Verdict from a ratio trace: last over mid above the divergence factor is
/// cross-gauge, within the same-gauge band is same-gauge.
pub fn ratio_verdict(ratios: &[f64], config: &GaugeConfig) -> (Verdict, Option<f64>, String) {
    if ratios.len() < MIN_SAMPLES {
        return (Verdict::Inconclusive, None, format!("grid has {} points, need {MIN_SAMPLES}", ratios.len()));
    }
    let (mid, _, last) = tail_indices(ratios.len());
    let growth = ratios[last] / ratios[mid];
    if !growth.is_finite() || !(growth > 0.0) {
        return (Verdict::Inconclusive, None, "ratio trace is not finite and positive".into());
    }
    if growth > config.divergence_factor {
        let why = format!("ratio grew {growth:.4e}x from mid-grid to the end (> {}x)", config.divergence_factor);
        (Verdict::CrossGauge, Some(growth), why)
    } else if (growth - 1.0).abs() <= config.same_band {
        let why = format!("ratio changed by {:.2}% from mid-grid to the end (within {}%)", 100.0 * (growth - 1.0), 100.0 * config.same_band);
        (Verdict::SameGauge, Some(growth), why)
    } else {
        (Verdict::Inconclusive, Some(growth), format!("ratio growth {growth:.4}x is neither bounded nor divergent"))
    }
}

/// Classify the tradeoff from `Δ*(2;ρ) / C_proxy(ρ)` along the grid.
///
/// Wide spreads separate best on grids geometric in decades. Gauge readings
/// of both traces are attached when they can be formed.
pub fn classify_tradeoff(spec: &ChannelSpec, grid: &RhoGrid, config: &GaugeConfig) -> Result<TradeoffReport> {
    spec.validate()?;
    let pts = grid.points();
    let toeplitz = match spec.kind {
        ChannelKind::FracLog => Some(ToeplitzSpectrum::new(spec.beta.unwrap(), spec.c_beta.unwrap(), spec.t)?),
        _ => None,
    };
    let trace: Vec<RatioPoint> = par::map_indexed(pts.len(), |i| -> Result<RatioPoint> {
        let s = pts[i];
        let delta_star = match &toeplitz {
            Some(tz) => tz.pair_distance(spec_power(spec), s, spec.n).value(),
            None => pair_frontier_per_use(spec, s)?,
        };
        let c = capacity_proxy(spec, s)?;
        Ok(RatioPoint { rho_log10: s.decades(), delta_star, capacity_proxy: c, ratio: delta_star / c })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let ratios: Vec<f64> = trace.iter().map(|p| p.ratio).collect();
    let (verdict, growth, rationale) = ratio_verdict(&ratios, config);
    let reading = |f: &dyn Fn(&RatioPoint) -> f64| {
        let samples: Vec<(Snr, f64)> = pts.iter().zip(&trace).map(|(&s, p)| (s, f(p))).collect();
        identify_gauge(&samples, config).ok()
    };
    Ok(TradeoffReport {
        verdict,
        growth,
        rationale,
        rate_gauge: reading(&|p| p.capacity_proxy),
        diversity_gauge: reading(&|p| p.delta_star),
        ratio_trace: trace,
    })
}

/// One point of the DMT comparison, in exact arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DmtPoint {
    pub r: Rational64,
    /// Union–Bhattacharyya line `NM − r(N+M)`.
    pub d_bh: Rational64,
    /// Optimal tradeoff `(M−r)(N−r)`.
    pub d_star: Rational64,
    pub gap: Rational64,
    /// `d_bh < 0`, i.e. `r > MN/(M+N)`.
    pub vacuous: bool,
}

pub fn dmt_compare(m: u32, n: u32, r: Rational64) -> Result<DmtPoint> {
    if m == 0 || n == 0 {
        return Err(invalid("M and N must be at least 1"));
    }
    let (mr, nr) = (Rational64::from(m as i64), Rational64::from(n as i64));
    if r < Rational64::from(0) || r > mr.min(nr) {
        return Err(invalid(format!("r = {r} outside [0, {}]", m.min(n))));
    }
    let d_bh = mr * nr - r * (mr + nr);
    let d_star = (mr - r) * (nr - r);
    Ok(DmtPoint { r, d_bh, d_star, gap: d_star - d_bh, vacuous: r > mr * nr / (mr + nr) })
}

/// Parse `"3/2"`, `"2"` or a finite decimal such as `"1.25"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational64> {
    let t = text.trim();
    let bad = || invalid(format!("not a rational number: {text:?}"));
    if t.contains('/') {
        return t.parse::<Rational64>().map_err(|_| bad());
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
        || frac.len() > 15
    {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
    let denom = 10i64.pow(frac.len() as u32);
    let v = Rational64::new(numer, denom);
    Ok(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(Snr) -> f64, grid: &RhoGrid) -> Vec<(Snr, f64)> {
        grid.points().iter().map(|&s| (s, f(s))).collect()
    }

    #[test]
    fn recovers_log_with_coefficient() {
        let grid = RhoGrid::decades(2.0, 30.0, 29).unwrap();
        let r = identify_gauge(&synthetic(|s| 3.0 * s.log2(), &grid), &GaugeConfig::default()).unwrap();
        assert_eq!(r.best, GaugeFamily::Log);
        assert!((r.coefficient - 3.0).abs() < 0.01);
        assert_eq!(r.status, GaugeStatus::Identified);
    }

    #[test]
    fn recovers_loglog_and_rejects_powlog() {
        let grid = RhoGrid::decades(2.0, 100.0, 50).unwrap();
        let r = identify_gauge(&synthetic(|s| 2.0 * s.log2().log2(), &grid), &GaugeConfig::default()).unwrap();
        assert_eq!(r.best, GaugeFamily::LogLog);
        assert!((r.coefficient - 2.0).abs() < 0.05);
        assert!(r.margin > 0.0);
    }

    #[test]
    fn constant_and_nonmonotone() {
        let grid = RhoGrid::decades(1.0, 20.0, 10).unwrap();
        let r = identify_gauge(&synthetic(|_| 5.0, &grid), &GaugeConfig::default()).unwrap();
        assert_eq!(r.best, GaugeFamily::Const);
        let wobble = synthetic(|s| s.log2() * (1.0 + 0.3 * (s.decades()).sin()), &grid);
        let r = identify_gauge(&wobble, &GaugeConfig::default()).unwrap();
        assert_eq!(r.status, GaugeStatus::Inconclusive);
        assert!(identify_gauge(&wobble[..5], &GaugeConfig::default()).is_err());
    }

    #[test]
    fn increment_ignores_offsets() {
        let grid = RhoGrid::geometric_decades(1.0, 300.0, 12).unwrap();
        let cfg = GaugeConfig::default().with_method(DriftMethod::Increment);
        let r = identify_gauge(&synthetic(|s| 1.5 * s.log2().log2() + 4.0, &grid), &cfg).unwrap();
        assert_eq!(r.best, GaugeFamily::LogLog);
        assert!((r.coefficient - 1.5).abs() < 1e-9);
    }

    #[test]
    fn dmt_examples() {
        let z = Rational64::from(0);
        let p = dmt_compare(3, 2, z).unwrap();
        assert_eq!((p.d_bh, p.d_star, p.gap), (Rational64::from(6), Rational64::from(6), z));
        let p = dmt_compare(2, 2, Rational64::from(1)).unwrap();
        assert_eq!((p.d_bh, p.d_star, p.gap), (z, Rational64::from(1), Rational64::from(1)));
        assert!(!p.vacuous);
        let p = dmt_compare(2, 3, parse_rational("1.5").unwrap()).unwrap();
        assert_eq!(p.d_bh, Rational64::new(-3, 2));
        assert_eq!(p.d_star, Rational64::new(3, 4));
        assert_eq!(p.gap, Rational64::new(9, 4));
        assert!(p.vacuous);
        assert!(dmt_compare(2, 3, Rational64::new(5, 2)).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/2").unwrap(), Rational64::new(3, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), Rational64::new(-1, 4));
        assert_eq!(parse_rational("2").unwrap(), Rational64::from(2));
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn load_counts() {
        let spec = ChannelSpec::fast_fading(1, 1e6).unwrap();
        let s = Snr::from_decades(6.0);
        assert_eq!(load_count(&spec, 0.0, s).unwrap(), 2.0);
        assert_eq!(load_count(&spec, 1.0, s).unwrap(), s.log2().ceil());
        assert!(load_count(&spec, 1.5, s).is_err());
    }
}
