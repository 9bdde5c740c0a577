use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gauge_frontier::mc::{simulate_pe, SimConfig};
use gauge_frontier::packing::{mimo_frontier_lower, RandomSearch};
use gauge_frontier::par::{single_threaded, workers};
use gauge_frontier::{ChannelSpec, InputPoint, Snr};
use gauge_frontier::linalg::CMatrix;
use num_complex::Complex64;

fn block_codebook() -> (ChannelSpec, Vec<InputPoint>) {
    let spec = ChannelSpec::block_fading(1, 2, 2, 100.0).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rows = [[1.0, 0.0], [0.0, 1.0], [s, s], [s, -s]];
    let points = rows
        .iter()
        .map(|r| InputPoint::Matrix(CMatrix::from_row_slice(1, 2, &[Complex64::from(r[0] * 2f64.sqrt()), Complex64::from(r[1] * 2f64.sqrt())])))
        .collect();
    (spec, points)
}

fn ml_decoding(c: &mut Criterion) {
    let (spec, points) = block_codebook();
    let run = || {
        let cfg = SimConfig { escalate: false, ..SimConfig::new(spec.clone(), points.clone(), 2, 20_000, 9) };
        simulate_pe(&cfg).unwrap()
    };
    let mut g = c.benchmark_group("ml_decoding_block_fading");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("parallel", workers()), |b| b.iter(run));
    g.bench_function(BenchmarkId::new("single_threaded", 1), |b| b.iter(|| single_threaded(run)));
    g.finish();
}

fn random_search(c: &mut Criterion) {
    let search = RandomSearch { trials: 64, seed: 3, candidates: None };
    let run = || mimo_frontier_lower(2, 2, 2, Snr::from_decades(2.0), 32, search.clone()).unwrap();
    let mut g = c.benchmark_group("mimo_random_search");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("parallel", workers()), |b| b.iter(run));
    g.bench_function(BenchmarkId::new("single_threaded", 1), |b| b.iter(|| single_threaded(run)));
    g.finish();
}

criterion_group!(benches, ml_decoding, random_search);
criterion_main!(benches);
