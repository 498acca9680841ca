use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use secl::encoders::smooth_with;
use secl::eval::{kmeans, KMeansConfig};
use secl::graph::{normalized_adjacency, PlantedPartition};
use secl::harness::{train_with, Prepared, TrainConfig, TrainOptions};
use secl::linalg::DenseMatrix;
use secl::par;

const MODES: [(&str, bool); 2] = [("parallel", true), ("sequential", false)];

fn pseudo_random(rows: usize, cols: usize, salt: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |i, j| ((i * 31 + j * 17 + salt) % 97) as f64 / 97.0 - 0.5)
}

fn graph(nodes: usize, attributes: usize) -> secl::Graph {
    PlantedPartition {
        nodes,
        clusters: 7,
        p_in: 0.02,
        p_out: 0.001,
        attributes,
        noise: 0.5,
    }
    .generate(1)
    .expect("valid generator settings")
}

fn gemm(c: &mut Criterion) {
    let mut group = c.benchmark_group("gemm_512");
    let a = pseudo_random(512, 512, 1);
    let b = pseudo_random(512, 512, 2);
    for (mode, on) in MODES {
        par::set_enabled(on);
        group.bench_function(BenchmarkId::from_parameter(mode), |bench| {
            bench.iter(|| black_box(a.matmul(&b).unwrap()))
        });
    }
    par::set_enabled(true);
    group.finish();
}

fn smoothing(c: &mut Criterion) {
    let mut group = c.benchmark_group("smoothing_n3000_d256_r3");
    let g = graph(3000, 256);
    let a_hat = normalized_adjacency(&g);
    for (mode, on) in MODES {
        par::set_enabled(on);
        group.bench_function(BenchmarkId::from_parameter(mode), |bench| {
            bench.iter(|| black_box(smooth_with(&a_hat, g.attributes(), 3).unwrap()))
        });
    }
    par::set_enabled(true);
    group.finish();
}

fn clustering(c: &mut Criterion) {
    let mut group = c.benchmark_group("kmeans_n3000_d64_c7");
    group.sample_size(10);
    let points = pseudo_random(3000, 64, 3);
    let config = KMeansConfig::new(7, 0);
    for (mode, on) in MODES {
        par::set_enabled(on);
        group.bench_function(BenchmarkId::from_parameter(mode), |bench| {
            bench.iter(|| black_box(kmeans(&points, &config).unwrap()))
        });
    }
    par::set_enabled(true);
    group.finish();
}

fn training_epoch(c: &mut Criterion) {
    let mut group = c.benchmark_group("train_epoch_n600");
    group.sample_size(10);
    let config = TrainConfig::from_toml(
        r#"
[dataset]
name = "bench"
edges = "-"
attributes = "-"
clusters = 7
[model]
r = 3
structure_widths = [128]
attribute_widths = [128]
[loss]
tau = 0.1
lambda1 = 0.1
lambda2 = 1.0
[optim]
learning_rate = 0.001
epochs = 1
"#,
    )
    .expect("valid bench config");
    let prepared = Prepared::new(&config, graph(600, 300)).expect("bench graph prepares");
    let options = TrainOptions { cluster: false };
    for (mode, on) in MODES {
        par::set_enabled(on);
        group.bench_function(BenchmarkId::from_parameter(mode), |bench| {
            bench.iter(|| black_box(train_with(&config, &prepared, 0, options, |_| Ok(())).unwrap()))
        });
    }
    par::set_enabled(true);
    group.finish();
}

criterion_group!(benches, gemm, smoothing, clustering, training_epoch);
criterion_main!(benches);
