use gauge_frontier::gauge::{
    b_diversity, classify_tradeoff, gauge_dof, identify_gauge, GaugeConfig, GaugeFamily, GaugeStatus, SweepOptions,
    Verdict,
};
use gauge_frontier::linalg::CMatrix;
use gauge_frontier::{ChannelSpec, RhoGrid, Snr};
use num_complex::Complex64;

fn wide_grid() -> RhoGrid {
    RhoGrid::geometric_decades(1.0, 300.0, 16).unwrap()
}

fn rank_two_h() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.2), Complex64::new(0.0, -0.4), Complex64::new(0.8, 0.0)],
    )
}

fn all_specs() -> Vec<(ChannelSpec, Verdict)> {
    vec![
        (ChannelSpec::fixed_h(&rank_two_h(), 1, 10.0).unwrap(), Verdict::CrossGauge),
        (ChannelSpec::coherent_mimo(2, 2, 2, 10.0).unwrap(), Verdict::SameGauge),
        (ChannelSpec::block_fading(1, 2, 2, 10.0).unwrap(), Verdict::SameGauge),
        (ChannelSpec::fast_fading(2, 10.0).unwrap(), Verdict::CrossGauge),
        (ChannelSpec::multipath(vec![0.6, 0.3, 0.1], 1, 10.0).unwrap(), Verdict::CrossGauge),
        (ChannelSpec::frac_log(0.5, 1.0, 2, 64, 10.0).unwrap(), Verdict::SameGauge),
    ]
}

#[test]
fn classification_table() {
    for (spec, expected) in all_specs() {
        let report = classify_tradeoff(&spec, &wide_grid(), &GaugeConfig::for_spec(&spec)).unwrap();
        assert_eq!(report.verdict, expected, "{:?}: {}", spec.kind, report.rationale);
    }
}

#[test]
fn short_grid_is_inconclusive() {
    let spec = ChannelSpec::fast_fading(1, 10.0).unwrap();
    let grid = RhoGrid::decades(1.0, 5.0, 4).unwrap();
    let report = classify_tradeoff(&spec, &grid, &GaugeConfig::default()).unwrap();
    assert_eq!(report.verdict, Verdict::Inconclusive);
}

#[test]
fn fraclog_ratio_near_half_n() {
    let spec = ChannelSpec::frac_log(0.5, 1.0, 2, 64, 10.0).unwrap();
    let report = classify_tradeoff(&spec, &wide_grid(), &GaugeConfig::for_spec(&spec)).unwrap();
    let last = report.ratio_trace.last().unwrap().ratio;
    assert!((last / 1.0 - 1.0).abs() < 0.2, "ratio {last}");
}

#[test]
fn fast_fading_dof_is_one_on_loglog() {
    for n in [1, 2, 4] {
        let spec = ChannelSpec::fast_fading(n, 10.0).unwrap();
        let r = gauge_dof(&spec, 1.0, &wide_grid(), &GaugeConfig::default(), &SweepOptions::default()).unwrap();
        assert_eq!(r.best, GaugeFamily::LogLog, "N={n}: {:?}", r.fits);
        assert!((r.coefficient - 1.0).abs() < 0.1, "N={n}: {}", r.coefficient);
    }
}

#[test]
fn fixed_h_dof_is_rank() {
    let spec = ChannelSpec::fixed_h(&rank_two_h(), 1, 10.0).unwrap();
    let grid = RhoGrid::decades(2.0, 40.0, 20).unwrap();
    let r = gauge_dof(&spec, 1.0, &grid, &GaugeConfig::default(), &SweepOptions::default()).unwrap();
    assert_eq!(r.best, GaugeFamily::Log);
    assert!((r.coefficient - 2.0).abs() < 0.1, "{}", r.coefficient);
}

#[test]
fn block_fading_dof_per_symbol() {
    let spec = ChannelSpec::block_fading(1, 1, 2, 10.0).unwrap();
    let grid = RhoGrid::decades(2.0, 40.0, 20).unwrap();
    let r = gauge_dof(&spec, 1.0, &grid, &GaugeConfig::default(), &SweepOptions::default()).unwrap();
    assert_eq!(r.best, GaugeFamily::Log);
    assert!((r.coefficient - 0.5).abs() < 0.1, "{}", r.coefficient);
}

#[test]
fn fast_fading_b_diversity() {
    let spec = ChannelSpec::fast_fading(2, 10.0).unwrap();
    let grid = RhoGrid::decades(4.0, 300.0, 38).unwrap();
    let r = b_diversity(&spec, 0.5, &grid, &GaugeConfig::default(), &SweepOptions::default()).unwrap();
    assert_eq!(r.best, GaugeFamily::PowLog(0.5));
    assert!(r.coefficient > 0.9 && r.coefficient <= 1.0, "{}", r.coefficient);
    let r0 = b_diversity(&spec, 0.0, &wide_grid(), &GaugeConfig::default(), &SweepOptions::default()).unwrap();
    assert_eq!(r0.best, GaugeFamily::Log);
    assert!((r0.coefficient - 1.0).abs() < 0.02);
    let doubled = ChannelSpec::fast_fading(4, 10.0).unwrap();
    let r4 = b_diversity(&doubled, 0.5, &grid, &GaugeConfig::default(), &SweepOptions::default()).unwrap();
    assert!((r4.coefficient / r.coefficient - 2.0).abs() < 1e-12);
}

#[test]
fn fixed_h_pair_is_linear() {
    let spec = ChannelSpec::fixed_h(&rank_two_h(), 1, 10.0).unwrap();
    let grid = RhoGrid::decades(1.0, 30.0, 12).unwrap();
    let r = b_diversity(&spec, 0.0, &grid, &GaugeConfig::default(), &SweepOptions::default()).unwrap();
    assert_eq!(r.best, GaugeFamily::Pow(1.0));
    assert_eq!(r.status, GaugeStatus::Identified);
}

#[test]
fn synthetic_families_recovered() {
    let grid = RhoGrid::decades(2.0, 100.0, 40).unwrap();
    let cases: Vec<(GaugeFamily, Box<dyn Fn(Snr) -> f64>)> = vec![
        (GaugeFamily::Log, Box::new(|s: Snr| 1.7 * s.log2())),
        (GaugeFamily::LogLog, Box::new(|s: Snr| 0.8 * s.log2().log2())),
        (GaugeFamily::PowLog(0.3), Box::new(|s: Snr| 2.0 * s.log2().powf(0.3))),
        (GaugeFamily::PowLog(0.7), Box::new(|s: Snr| 0.5 * s.log2().powf(0.7))),
        (GaugeFamily::Pow(1.0), Box::new(|s: Snr| 4.0 * s.linear())),
    ];
    for (family, f) in cases {
        let samples: Vec<_> = grid.points().iter().map(|&s| (s, f(s))).collect();
        let r = identify_gauge(&samples, &GaugeConfig::default()).unwrap();
        assert_eq!(r.best, family);
    }
}
