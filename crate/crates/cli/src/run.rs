//! Command execution. Each command returns a [`Report`] holding both the JSON
//! result and the CSV table.

use gauge_frontier::channel::{frac_log_pair_distance, szego_integral};
use gauge_frontier::divergence::{
    avg_bhatt_rayleigh, bhatt_same_covariance, bhatt_same_mean, bhatt_scale, chernoff_scale, hellinger_from_bhatt,
    kl_scale, quadrature_bhatt_oracle, quadrature_bhatt_oracle_radial, quadrature_kl_oracle_radial, OracleHint,
    ScalarGaussian,
};
use gauge_frontier::gauge::{
    classify_tradeoff, dmt_compare, identify_gauge, load_count, parse_rational, spec_at, DriftMethod, GaugeConfig,
    GaugeFamily, GaugeReading,
};
use gauge_frontier::linalg::CMatrix;
use gauge_frontier::mc::{codebook_distances, simulate_pe, verify_avg_bhatt, SimConfig};
use gauge_frontier::packing::{
    cutoff_rate_matrix, expurgated_pack_lower, pack, scale_frontier_value, PackingQuery, PackingResult,
};
use gauge_frontier::{ChannelKind, ChannelSpec, InputPoint, RhoGrid, Snr};
use num_complex::Complex64;
use num_rational::Rational64;
use serde_json::{json, Value};

use crate::config::{
    ClassifyCmd, Command, CutoffCmd, DistCmd, DistLaw, DmtCmd, FrontierCmd, PackCmd, PackMethod, RunConfig,
    SimulateCmd, SzegoCmd,
};
use crate::output::{fmt_g, Cell, Report, Table};
use crate::{parse, Failure};

/// Closed form and oracle must agree this closely.
const ORACLE_TOL: f64 = 1e-6;
/// Grid used by `classify` when none is given.
pub const CLASSIFY_GRID: &str = "1:300:16:geom";

pub fn run(cfg: &RunConfig) -> Result<Report, Failure> {
    let spec = || -> Result<&ChannelSpec, Failure> {
        cfg.spec.as_ref().ok_or_else(|| Failure::usage(format!("{} needs a channel spec", cfg.command.name())))
    };
    if cfg.command.needs_spec() {
        spec()?.validate()?;
    }
    let grid = cfg.rho_grid.as_deref().map(RhoGrid::parse).transpose()?;
    match &cfg.command {
        Command::Dist(c) => dist(c, cfg.seed),
        Command::Pack(c) => pack_cmd(c, spec()?, grid.as_ref(), cfg.seed),
        Command::Frontier(c) => frontier(c, spec()?, grid.as_ref(), cfg.seed),
        Command::Classify(c) => classify(c, spec()?, grid),
        Command::Simulate(c) => simulate(c, spec()?, cfg.seed),
        Command::Dmt(c) => dmt(c),
        Command::Szego(c) => szego(c, grid.as_ref()),
        Command::Cutoff(c) => cutoff(c, spec()?, cfg.seed),
    }
}

fn json_of<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("results serialize")
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::usage(format!("{flag} is required")))
}

fn need_str<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str, Failure> {
    v.as_deref().ok_or_else(|| Failure::usage(format!("{flag} is required")))
}

/// Grid points, or the spec's own SNR when there is no grid.
fn snr_points(spec: &ChannelSpec, grid: Option<&RhoGrid>) -> Result<Vec<Snr>, Failure> {
    Ok(match grid {
        Some(g) => g.points().to_vec(),
        None => vec![spec.snr()?],
    })
}

fn gauge_note(table: &mut Table, reading: &Result<GaugeReading, String>) {
    match reading {
        Ok(r) => table.note(
            "gauge",
            format!(
                "{} coefficient {} drift {} margin {} ({:?})",
                r.best,
                fmt_g(r.coefficient),
                fmt_g(r.drift),
                fmt_g(r.margin),
                r.status
            ),
        ),
        Err(e) => table.note("gauge", format!("not identified: {e}")),
    }
}

fn gauge_json(reading: &Result<GaugeReading, String>) -> Value {
    match reading {
        Ok(r) => json_of(r),
        Err(e) => json!({ "error": e }),
    }
}

/// Fit a gauge to the positive tail of a sweep.
fn fit_series(samples: &[(Snr, f64)], config: &GaugeConfig) -> Result<GaugeReading, String> {
    let start = samples.iter().position(|&(_, v)| v > 0.0).unwrap_or(samples.len());
    identify_gauge(&samples[start..], config).map_err(|e| e.to_string())
}

// ---- dist -----------------------------------------------------------------

fn scalar_variance(m: &CMatrix, flag: &str) -> Result<f64, Failure> {
    if m.shape() != (1, 1) {
        return Err(Failure::usage(format!("--oracle needs scalar laws; {flag} is {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m[(0, 0)].re)
}

fn radial_bhatt(v1: f64, v2: f64) -> Result<f64, Failure> {
    let (a, b) = (ScalarGaussian { mean: 0.0.into(), variance: v1 }, ScalarGaussian { mean: 0.0.into(), variance: v2 });
    Ok(quadrature_bhatt_oracle_radial(|r| a.ln_radial_density(r), |r| b.ln_radial_density(r), v1.max(v2).sqrt())?
        .value())
}

fn dist(c: &DistCmd, seed: u64) -> Result<Report, Failure> {
    let mut extra = serde_json::Map::new();
    let (value, coefficient, oracle) = match c.law {
        DistLaw::Scale | DistLaw::Kl | DistLaw::Hellinger | DistLaw::Chernoff => {
            let (v1, v2) = (need(c.v1, "--v1")?, need(c.v2, "--v2")?);
            match c.law {
                DistLaw::Scale => {
                    let d = bhatt_scale(v1, v2)?;
                    let o = if c.oracle { Some(radial_bhatt(v1, v2)?) } else { None };
                    (d.value(), Some(d.coefficient()), o)
                }
                DistLaw::Kl => {
                    let d = kl_scale(v1, v2)?;
                    let o = if c.oracle {
                        let a = ScalarGaussian { mean: 0.0.into(), variance: v1 };
                        let b = ScalarGaussian { mean: 0.0.into(), variance: v2 };
                        let s = v1.max(v2).sqrt();
                        Some(quadrature_kl_oracle_radial(|r| a.ln_radial_density(r), |r| b.ln_radial_density(r), s)?.value())
                    } else {
                        None
                    };
                    (d.value(), None, o)
                }
                DistLaw::Hellinger => {
                    let h = hellinger_from_bhatt(bhatt_scale(v1, v2)?.value())?;
                    let o = if c.oracle { Some(hellinger_from_bhatt(radial_bhatt(v1, v2)?)?) } else { None };
                    (h, None, o)
                }
                _ => {
                    if c.oracle {
                        return Err(Failure::usage("no quadrature oracle for the Chernoff distance; use `dist scale --oracle` for s = 1/2"));
                    }
                    let s = c.s.unwrap_or(0.5);
                    extra.insert("s".into(), json!(s));
                    let d = chernoff_scale(v1, v2, s)?;
                    (d.value(), Some(d.coefficient()), None)
                }
            }
        }
        DistLaw::SameCov => {
            let mu1 = parse::vector(need_str(&c.mu1, "--mu1")?).map_err(Failure::usage)?;
            let mu2 = parse::vector(need_str(&c.mu2, "--mu2")?).map_err(Failure::usage)?;
            let cov = match c.cov.as_deref().map(parse::matrix).transpose().map_err(Failure::usage)?.flatten() {
                Some(m) => m,
                None => CMatrix::identity(mu1.len(), mu1.len()),
            };
            let d = bhatt_same_covariance(&mu1, &mu2, &cov)?;
            let o = if c.oracle {
                let v = scalar_variance(&cov, "--cov")?;
                let (p, q) = (ScalarGaussian { mean: mu1[0], variance: v }, ScalarGaussian { mean: mu2[0], variance: v });
                let hint = OracleHint { center: 0.5 * (mu1[0] + mu2[0]), scale: v.sqrt() };
                Some(quadrature_bhatt_oracle(|y: Complex64| p.ln_density(y), |y: Complex64| q.ln_density(y), hint)?.value())
            } else {
                None
            };
            (d.value(), Some(d.coefficient()), o)
        }
        DistLaw::SameMean => {
            let (c1, c2) = parse::matrix_pair(need_str(&c.cov1, "--cov1")?, need_str(&c.cov2, "--cov2")?)
                .map_err(Failure::usage)?;
            let d = bhatt_same_mean(&c1, &c2)?;
            let o = if c.oracle {
                Some(radial_bhatt(scalar_variance(&c1, "--cov1")?, scalar_variance(&c2, "--cov2")?)?)
            } else {
                None
            };
            (d.value(), Some(d.coefficient()), o)
        }
        DistLaw::AvgRayleigh => {
            let (n, rho) = (need(c.n, "--n")?, need(c.rho, "--rho")?);
            if c.eigs.is_empty() {
                return Err(Failure::usage("--eigs is required"));
            }
            let avg = avg_bhatt_rayleigh(&c.eigs, n, rho)?;
            let mut failure = None;
            let o = if c.oracle {
                if c.eigs.iter().any(|&e| e < 0.0) {
                    return Err(Failure::usage("eigenvalues must be nonnegative"));
                }
                let m = c.eigs.len();
                let d = CMatrix::from_fn(m, m, |i, j| if i == j { Complex64::from(c.eigs[i].sqrt()) } else { 0.0.into() });
                let check = verify_avg_bhatt(&d, n, rho, c.trials, seed)?;
                if check.z_score > 3.0 {
                    failure = Some(format!("Monte Carlo coefficient is {} standard errors from the closed form", fmt_g(check.z_score)));
                }
                extra.insert("monte_carlo".into(), json_of(&check));
                Some(-check.mc_estimate.log2())
            } else {
                None
            };
            return Ok(dist_report(c, avg.distance.value(), Some(avg.coefficient), o, extra, failure, false));
        }
    };
    let failure = oracle.and_then(|o| {
        let err = (o - value).abs();
        (err > ORACLE_TOL).then(|| format!("closed form {} and oracle {} differ by {}", fmt_g(value), fmt_g(o), fmt_g(err)))
    });
    Ok(dist_report(c, value, coefficient, oracle, extra, failure, true))
}

fn dist_report(
    c: &DistCmd,
    value: f64,
    coefficient: Option<f64>,
    oracle: Option<f64>,
    mut extra: serde_json::Map<String, Value>,
    failure: Option<String>,
    exact_oracle: bool,
) -> Report {
    let law = json_of(&c.law);
    let abs_error = oracle.map(|o| (o - value).abs());
    extra.insert("law".into(), law.clone());
    extra.insert("value".into(), json!(value));
    if let Some(b) = coefficient {
        extra.insert("coefficient".into(), json!(b));
    }
    if let Some(o) = oracle {
        extra.insert("oracle".into(), json!(o));
        extra.insert("oracle_abs_error".into(), json!(abs_error));
        extra.insert("oracle_kind".into(), json!(if exact_oracle { "quadrature" } else { "monte-carlo" }));
    }
    let mut table = Table::new(&["law", "value", "coefficient", "oracle", "oracle_abs_error"]);
    let law_name = law.as_str().unwrap_or_default().to_string();
    table.push(vec![law_name.clone().into(), value.into(), coefficient.into(), oracle.into(), abs_error.into()]);
    let mut summary = format!("{law_name} = {}", fmt_g(value));
    if let Some(b) = coefficient {
        summary.push_str(&format!(" (coefficient {})", fmt_g(b)));
    }
    if let Some(o) = oracle {
        summary.push_str(&format!("; oracle {}", fmt_g(o)));
    }
    Report { json: Value::Object(extra), table, summary, failure }
}

// ---- pack -----------------------------------------------------------------

fn pack_cmd(c: &PackCmd, spec: &ChannelSpec, grid: Option<&RhoGrid>, seed: u64) -> Result<Report, Failure> {
    let points = snr_points(spec, grid)?;
    let mut results = Vec::with_capacity(points.len());
    for &snr in &points {
        let s = spec_at(spec, snr)?;
        let mut r = match c.method {
            PackMethod::Auto => pack(&PackingQuery { seed, budget: c.budget, ..PackingQuery::threshold(s, c.delta) })?,
            PackMethod::Expurgate => {
                expurgated_pack_lower(&s, c.delta, c.r0, c.budget, seed)?.into_result(c.delta, s.effective_snr()?)
            }
        };
        if c.no_certificate || grid.is_some() {
            r.certificate = None;
        }
        results.push((snr, r));
    }
    let mut table = Table::new(&[
        "rho",
        "log10_rho",
        "delta",
        "log2_k_lower",
        "log2_k_upper",
        "k_lower",
        "k_upper",
        "method_lower",
        "method_upper",
    ]);
    for (snr, r) in &results {
        table.push(vec![
            r.rho.into(),
            snr.decades().into(),
            c.delta.into(),
            r.k_pack.into(),
            r.k_pack_upper.into(),
            r.value_lower.into(),
            r.value_upper.into(),
            r.method_lower.as_str().into(),
            r.method_upper.as_str().into(),
        ]);
    }
    let last = &results.last().expect("at least one point").1;
    let summary = format!(
        "log2 K_pack in [{}, {}] at rho = {}",
        fmt_g(last.k_pack.unwrap_or(0.0)),
        fmt_g(last.k_pack_upper.unwrap_or(f64::INFINITY)),
        fmt_g(last.rho)
    );
    if grid.is_none() {
        return Ok(Report { json: json_of(last), table, summary, failure: None });
    }
    let samples: Vec<(Snr, f64)> = results.iter().map(|(s, r)| (*s, r.k_pack.unwrap_or(0.0))).collect();
    let reading = fit_series(&samples, &GaugeConfig::for_spec(spec).with_method(DriftMethod::Increment));
    gauge_note(&mut table, &reading);
    let rows: Vec<&PackingResult> = results.iter().map(|(_, r)| r).collect();
    Ok(Report { json: json!({ "rows": rows, "gauge": gauge_json(&reading) }), table, summary, failure: None })
}

// ---- frontier -------------------------------------------------------------

fn frontier(c: &FrontierCmd, spec: &ChannelSpec, grid: Option<&RhoGrid>, seed: u64) -> Result<Report, Failure> {
    let points = snr_points(spec, grid)?;
    let scale_kind = matches!(spec.kind, ChannelKind::FastFading | ChannelKind::Multipath);
    let mut table = Table::new(&[
        "rho",
        "log10_rho",
        "K",
        "delta_lower",
        "delta_upper",
        "method_lower",
        "method_upper",
        "closed_form",
        "ratio",
    ]);
    let mut rows = Vec::with_capacity(points.len());
    for &snr in &points {
        let s = spec_at(spec, snr)?;
        let k = match (c.k, c.r) {
            (Some(k), _) => k,
            (None, Some(r)) => load_count(&s, r, snr)?,
            (None, None) => return Err(Failure::usage("one of --k or --r is required")),
        };
        let q = PackingQuery { trials: c.trials, seed, candidates: c.candidates, ..PackingQuery::count(s.clone(), k) };
        let mut res = pack(&q)?;
        if c.no_certificate || grid.is_some() {
            res.certificate = None;
        }
        let closed = if scale_kind { Some(scale_frontier_value(k, s.effective_snr()?, s.n)?) } else { None };
        let ratio = match (closed, c.r) {
            (Some(v), Some(r)) => Some(v / (0.5 * s.n as f64 * snr.log2().powf(1.0 - r))),
            _ => None,
        };
        table.push(vec![
            res.rho.into(),
            snr.decades().into(),
            k.into(),
            res.value_lower.into(),
            res.value_upper.into(),
            res.method_lower.as_str().into(),
            res.method_upper.as_str().into(),
            closed.into(),
            ratio.into(),
        ]);
        rows.push(json!({
            "log10_rho": snr.decades(),
            "result": res,
            "closed_form": closed,
            "ratio": ratio,
        }));
    }
    let last = rows.last().expect("at least one point");
    let summary = format!(
        "Delta*(K = {}) in [{}, {}] at rho = 10^{}",
        fmt_g(last["result"]["k"].as_f64().unwrap_or(f64::NAN)),
        fmt_g(last["result"]["value_lower"].as_f64().unwrap_or(f64::NAN)),
        fmt_g(last["result"]["value_upper"].as_f64().unwrap_or(f64::NAN)),
        fmt_g(points.last().expect("at least one point").decades())
    );
    if grid.is_none() {
        return Ok(Report { json: last.clone(), table, summary, failure: None });
    }
    let samples: Vec<(Snr, f64)> = points
        .iter()
        .zip(&rows)
        .map(|(&s, row)| (s, row["result"]["value_lower"].as_f64().unwrap_or(0.0)))
        .collect();
    let reading = fit_series(&samples, &GaugeConfig::for_spec(spec));
    gauge_note(&mut table, &reading);
    Ok(Report { json: json!({ "rows": rows, "gauge": gauge_json(&reading) }), table, summary, failure: None })
}

// ---- classify -------------------------------------------------------------

fn classify(c: &ClassifyCmd, spec: &ChannelSpec, grid: Option<RhoGrid>) -> Result<Report, Failure> {
    let grid = match grid {
        Some(g) => g,
        None => RhoGrid::parse(CLASSIFY_GRID)?,
    };
    let config = GaugeConfig { divergence_factor: c.divergence_factor, same_band: c.same_band, ..GaugeConfig::for_spec(spec) };
    let report = classify_tradeoff(spec, &grid, &config)?;
    let mut table = Table::new(&["log10_rho", "delta_star", "capacity_proxy", "ratio"]);
    for p in &report.ratio_trace {
        table.push(vec![p.rho_log10.into(), p.delta_star.into(), p.capacity_proxy.into(), p.ratio.into()]);
    }
    table.note("verdict", report.verdict.to_string());
    if let Some(g) = report.growth {
        table.note("growth", fmt_g(g));
    }
    table.note("rationale", report.rationale.clone());
    for (key, reading) in [("rate_gauge", &report.rate_gauge), ("diversity_gauge", &report.diversity_gauge)] {
        if let Some(r) = reading {
            table.note(key, format!("{} coefficient {} drift {}", r.best, fmt_g(r.coefficient), fmt_g(r.drift)));
        }
    }
    let summary = format!("{} ({})", report.verdict, report.rationale);
    Ok(Report { json: json_of(&report), table, summary, failure: None })
}

// ---- simulate / cutoff ----------------------------------------------------

fn codebook_for(
    spec: &ChannelSpec,
    frontier: Option<usize>,
    points: &Option<Vec<InputPoint>>,
    seed: u64,
) -> Result<Vec<InputPoint>, Failure> {
    if let Some(p) = points {
        return Ok(p.clone());
    }
    let k = need(frontier, "--frontier or --codebook")?;
    let q = PackingQuery { seed, ..PackingQuery::count(spec.clone(), k as f64) };
    pack(&q)?
        .certificate
        .ok_or_else(|| Failure::usage(format!("no certified codebook of size {k} for {}", spec.kind)))
}

fn simulate(c: &SimulateCmd, spec: &ChannelSpec, seed: u64) -> Result<Report, Failure> {
    if spec.kind == ChannelKind::FracLog {
        return Err(Failure::usage(
            "FracLog codebooks are not simulated (a documented non-goal); use `frontier` or `szego` for this class",
        ));
    }
    let codebook = codebook_for(spec, c.frontier, &c.codebook_points, seed)?;
    let cfg = SimConfig {
        confidence: c.confidence,
        escalate: !c.no_escalate,
        max_trials: c.max_trials,
        ..SimConfig::new(spec.clone(), codebook, c.uses, c.trials, seed)
    };
    let r = simulate_pe(&cfg)?;
    let mut table = Table::new(&[
        "rho", "K", "n", "trials", "errors", "pe_hat", "stderr", "bound", "delta_min", "pass", "resolvable",
    ]);
    table.push(vec![
        r.rho.into(),
        r.k.into(),
        r.n.into(),
        r.trials.into(),
        r.errors.into(),
        r.pe_hat.into(),
        r.stderr.into(),
        r.bound.into(),
        r.delta_min.into(),
        r.pass.into(),
        r.resolvable.into(),
    ]);
    let summary = format!(
        "pe {} +/- {} vs bound {} over {} trials{}",
        fmt_g(r.pe_hat),
        fmt_g(r.stderr),
        fmt_g(r.bound),
        r.trials,
        if r.resolvable { "" } else { " (bound below Monte Carlo resolution)" }
    );
    let failure = (!r.pass).then(|| {
        format!("estimate {} exceeds the bound {} by more than {} standard errors", fmt_g(r.pe_hat), fmt_g(r.bound), c.confidence)
    });
    Ok(Report { json: json_of(&r), table, summary, failure })
}

fn cutoff(c: &CutoffCmd, spec: &ChannelSpec, seed: u64) -> Result<Report, Failure> {
    let codebook = codebook_for(spec, c.frontier, &c.codebook_points, seed)?;
    let k = codebook.len();
    let weights = if c.weights.is_empty() { vec![1.0 / k as f64; k] } else { c.weights.clone() };
    let dm = codebook_distances(spec, &codebook)?;
    let r0 = cutoff_rate_matrix(&dm, &weights)?;
    let mut table = Table::new(&["rho", "K", "cutoff_rate"]);
    table.push(vec![spec.rho.into(), k.into(), r0.into()]);
    let json = json!({ "rho": spec.rho, "K": k, "weights": weights, "cutoff_rate": r0 });
    Ok(Report { json, table, summary: format!("R0 = {} bits over K = {k}", fmt_g(r0)), failure: None })
}

// ---- dmt ------------------------------------------------------------------

fn rational_text(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn as_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn dmt(c: &DmtCmd) -> Result<Report, Failure> {
    let gains: Vec<Rational64> = if c.r.is_empty() {
        if c.steps == 0 {
            return Err(Failure::usage("--steps must be positive"));
        }
        let top = c.m.min(c.n) as i64 * c.steps as i64;
        (0..=top).map(|j| Rational64::new(j, c.steps as i64)).collect()
    } else {
        c.r.iter().map(|t| parse_rational(t)).collect::<Result<_, _>>()?
    };
    let mut table = Table::new(&["r", "d_bh", "d_star", "gap", "vacuous", "r_exact", "gap_exact"]);
    let mut rows = Vec::new();
    for r in gains {
        let p = dmt_compare(c.m, c.n, r)?;
        table.push(vec![
            as_f64(p.r).into(),
            as_f64(p.d_bh).into(),
            as_f64(p.d_star).into(),
            as_f64(p.gap).into(),
            p.vacuous.into(),
            rational_text(p.r).into(),
            rational_text(p.gap).into(),
        ]);
        rows.push(json!({
            "r": rational_text(p.r),
            "d_bh": rational_text(p.d_bh),
            "d_star": rational_text(p.d_star),
            "gap": rational_text(p.gap),
            "vacuous": p.vacuous,
        }));
    }
    let summary = format!("{} rows for M = {}, N = {}", rows.len(), c.m, c.n);
    Ok(Report { json: json!({ "M": c.m, "N": c.n, "rows": rows }), table, summary, failure: None })
}

// ---- szego ----------------------------------------------------------------

fn szego(c: &SzegoCmd, grid: Option<&RhoGrid>) -> Result<Report, Failure> {
    let points = match (grid, c.rho) {
        (Some(g), _) => g.points().to_vec(),
        (None, Some(rho)) => vec![Snr::from_linear(rho)?],
        (None, None) => return Err(Failure::usage("--rho or --rho-grid is required")),
    };
    let mut table = Table::new(&["rho", "log10_rho", "szego", "T", "pair_distance", "ratio"]);
    let mut rows = Vec::new();
    let mut samples = Vec::new();
    for &snr in &points {
        let s = szego_integral(c.beta, c.c_beta, c.power, snr)?;
        samples.push((snr, s));
        if c.t.is_empty() {
            table.push(vec![snr.linear().into(), snr.decades().into(), s.into(), Cell::Empty, Cell::Empty, Cell::Empty]);
            rows.push(json!({ "log10_rho": snr.decades(), "szego": s }));
        }
        for &t in &c.t {
            let d = frac_log_pair_distance(c.power, c.beta, c.c_beta, snr, c.n, t)?.value();
            let ratio = d / (0.5 * c.n as f64 * s);
            table.push(vec![snr.linear().into(), snr.decades().into(), s.into(), t.into(), d.into(), ratio.into()]);
            rows.push(json!({ "log10_rho": snr.decades(), "szego": s, "T": t, "pair_distance": d, "ratio": ratio }));
        }
    }
    let last = samples.last().expect("at least one point");
    let summary = format!("szego integral {} at rho = 10^{}", fmt_g(last.1), fmt_g(last.0.decades()));
    if grid.is_none() {
        return Ok(Report { json: json!({ "rows": rows }), table, summary, failure: None });
    }
    let config = GaugeConfig { candidates: GaugeFamily::default_menu(Some(c.beta)), ..GaugeConfig::default() };
    let reading = fit_series(&samples, &config);
    gauge_note(&mut table, &reading);
    Ok(Report { json: json!({ "rows": rows, "gauge": gauge_json(&reading) }), table, summary, failure: None })
}
