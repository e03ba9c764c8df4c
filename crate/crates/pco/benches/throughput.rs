//! Throughput benches for the data-parallel inner loops.
//!
//! Build with the default `parallel` feature to measure the rayon path at
//! different pool sizes, and with `--no-default-features` to measure the
//! sequential fallback; bench ids carry the active mode so the two runs can
//! be compared side by side:
//!
//! ```text
//! cargo bench -p pco
//! cargo bench -p pco --no-default-features
//! ```

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pco::gwn;
use pco::kernels::{Kernel, ProductKernel};
use pco::risklab::{self, Density, Method};
use pco::selection::{BandwidthGrid, PenaltySpec, SelectionEngine};
use pco::Sample;

fn mode() -> &'static str {
    if pco::exec::parallel_enabled() {
        "parallel"
    } else {
        "sequential"
    }
}

/// Pool sizes to measure; the sequential build ignores them.
fn thread_counts() -> Vec<usize> {
    if pco::exec::parallel_enabled() {
        vec![1, 2, 4]
    } else {
        vec![1]
    }
}

fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

fn fixture_sample(n: usize) -> Sample {
    let f = Density::StandardNormal;
    let mut rng = risklab::replication_rng(1, 0);
    f.sample(n, &mut rng).unwrap()
}

fn bench_comparison_terms(c: &mut Criterion) {
    let mut group = c.benchmark_group("comparison_terms");
    group.sample_size(10);
    let sample = fixture_sample(512);
    for kernel_id in ["gaussian", "epanechnikov"] {
        let pk = ProductKernel::univariate(Kernel::parse(kernel_id).unwrap());
        let grid = BandwidthGrid::geometric(0.01, 1.0, 20, &pk, sample.n()).unwrap();
        let engine = SelectionEngine::new(&pk, &grid).unwrap();
        for threads in thread_counts() {
            group.bench_with_input(
                BenchmarkId::new(format!("{}/{kernel_id}", mode()), threads),
                &threads,
                |b, &threads| {
                    b.iter(|| {
                        with_pool(threads, || engine.comparison_terms(&sample).unwrap())
                    })
                },
            );
        }
    }
    group.finish();
}

fn bench_lambda_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("lambda_sweep");
    group.sample_size(10);
    let sample = fixture_sample(512);
    let pk = ProductKernel::univariate(Kernel::gaussian());
    let grid = BandwidthGrid::geometric(0.01, 1.0, 20, &pk, sample.n()).unwrap();
    let lambdas = pco::calibration::default_lambda_grid();
    for threads in thread_counts() {
        group.bench_with_input(
            BenchmarkId::new(mode(), threads),
            &threads,
            |b, &threads| {
                b.iter(|| {
                    with_pool(threads, || {
                        pco::calibration::scan_lambda(&sample, &pk, &grid, &lambdas).unwrap()
                    })
                })
            },
        );
    }
    group.finish();
}

fn bench_oracle_experiment(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_experiment");
    group.sample_size(10);
    let pk = ProductKernel::univariate(Kernel::gaussian());
    let n = 200;
    let grid = BandwidthGrid::geometric_default(&pk, n).unwrap();
    let methods = vec![Method::Pco {
        penalty: PenaltySpec::Family { lambda: 1.0 },
    }];
    for threads in thread_counts() {
        group.bench_with_input(
            BenchmarkId::new(mode(), threads),
            &threads,
            |b, &threads| {
                b.iter(|| {
                    with_pool(threads, || {
                        risklab::oracle_experiment(
                            &Density::StandardNormal,
                            n,
                            &pk,
                            &grid,
                            &methods,
                            50,
                            3,
                        )
                        .unwrap()
                    })
                })
            },
        );
    }
    group.finish();
}

fn bench_gwn_phase_diagram(c: &mut Criterion) {
    let mut group = c.benchmark_group("gwn_phase_diagram");
    group.sample_size(10);
    let model = gwn::SequenceModel::zero(500, (1.0 / 500.0f64).sqrt()).unwrap();
    let lambdas: Vec<f64> = (0..21).map(|k| 0.1 + 0.1 * k as f64).collect();
    for threads in thread_counts() {
        group.bench_with_input(
            BenchmarkId::new(mode(), threads),
            &threads,
            |b, &threads| {
                b.iter(|| {
                    with_pool(threads, || {
                        gwn::phase_diagram(&model, &lambdas, 200, 4).unwrap()
                    })
                })
            },
        );
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_comparison_terms,
    bench_lambda_sweep,
    bench_oracle_experiment,
    bench_gwn_phase_diagram
);
criterion_main!(benches);
