//! Single-worker pool against the full pool on the data-parallel kernels.
//! Build with `--no-default-features` to time the plain sequential loops.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use balanced_risk::data::{sample_student_mixture, StudentMixtureParams};
use balanced_risk::erm::{balanced_risk_gradient, fit_balanced_erm, LinearScore, LossKind, LossSpec, OptimizerConfig};
use balanced_risk::experiments::{run_knn_heatmap, HeatmapConfig};
use balanced_risk::knn::KnnModel;
use balanced_risk::measures::Weighting;
use balanced_risk::par;

fn pools() -> Vec<(&'static str, usize)> {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![("sequential", 1), ("parallel", all)]
}

fn bench_sampling(c: &mut Criterion) {
    let params = StudentMixtureParams::reference(0.01).unwrap();
    let mut group = c.benchmark_group("sample_student_mixture");
    for (name, threads) in pools() {
        group.bench_function(BenchmarkId::new(name, threads), |b| {
            b.iter(|| par::with_threads(threads, || black_box(sample_student_mixture(&params, 100_000, 1))))
        });
    }
    group.finish();
}

fn bench_knn(c: &mut Criterion) {
    let params = StudentMixtureParams::reference(0.05).unwrap();
    let model = KnnModel::new(sample_student_mixture(&params, 20_000, 2), 25).unwrap();
    let queries = sample_student_mixture(&params, 5_000, 3).features().to_vec();
    let mut group = c.benchmark_group("knn_classify_batch");
    for (name, threads) in pools() {
        group.bench_function(BenchmarkId::new(name, threads), |b| {
            b.iter(|| par::with_threads(threads, || black_box(model.classify_batch(&queries))))
        });
    }
    group.finish();
}

fn bench_erm(c: &mut Criterion) {
    let params = StudentMixtureParams::reference(0.05).unwrap();
    let data = sample_student_mixture(&params, 50_000, 4);
    let loss = LossSpec::new(LossKind::Logistic, 100.0).unwrap();
    let score = LinearScore::new(vec![0.3, -0.2], 10.0).unwrap();
    let cfg = OptimizerConfig {
        max_iters: 50,
        ..OptimizerConfig::default()
    };
    let mut group = c.benchmark_group("erm");
    group.sample_size(10);
    for (name, threads) in pools() {
        group.bench_function(BenchmarkId::new(format!("gradient/{name}"), threads), |b| {
            b.iter(|| {
                par::with_threads(threads, || {
                    black_box(balanced_risk_gradient(&data, &score, &loss, Weighting::Balanced).unwrap())
                })
            })
        });
        group.bench_function(BenchmarkId::new(format!("fit/{name}"), threads), |b| {
            b.iter(|| {
                par::with_threads(threads, || {
                    black_box(fit_balanced_erm(&data, &loss, 10.0, Weighting::Balanced, &cfg).unwrap())
                })
            })
        });
    }
    group.finish();
}

fn bench_heatmap(c: &mut Criterion) {
    let cfg = HeatmapConfig {
        n: 2_000,
        a_grid: vec![0.25, 0.5],
        b_grid: vec![0.25, 0.5],
        reps: 4,
        test_queries: 500,
        ..HeatmapConfig::default()
    };
    let mut group = c.benchmark_group("knn_heatmap_small");
    group.sample_size(10);
    for (name, threads) in pools() {
        group.bench_function(BenchmarkId::new(name, threads), |b| {
            b.iter(|| par::with_threads(threads, || black_box(run_knn_heatmap(&cfg).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sampling, bench_knn, bench_erm, bench_heatmap);
criterion_main!(benches);
