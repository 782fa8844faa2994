use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mdsfeat::distances::{imed, standardizing_transform, standardizing_transform_approx};
use mdsfeat::linalg::sym_eigen;
use mdsfeat::lm::lm_minimize;
use mdsfeat::mds::{ilma_fit, smacof_fit, AnchorProblem, Anchors};
use mdsfeat::spm::{dense_descriptors, pyramid_vector, spm_vocabulary};
use mdsfeat::{IlmaOptions, ImedParams, LmOptions, Rng, SmacofOptions, SpmParams};
use mdsfeat_bench::{noise_image, roll_distances, symmetric};

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("sym_eigen");
    for n in [50, 100, 200] {
        let a = symmetric(n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| sym_eigen(black_box(a)).unwrap()));
    }
    g.finish();
}

fn point_placement(c: &mut Criterion) {
    let d = roll_distances(300);
    let (emb, _) = ilma_fit(&d, 3, &IlmaOptions { max_sweeps: 2, ..IlmaOptions::default() }).unwrap();
    let lm = LmOptions::default();
    c.bench_function("lm/place_one_point_300", |b| {
        b.iter(|| {
            let prob = AnchorProblem::new(&emb.codes, Anchors::AllExcept(17), d.row(17));
            lm_minimize(&prob, emb.codes.row(17), &lm).unwrap()
        })
    });
}

fn solvers(c: &mut Criterion) {
    let d = roll_distances(200);
    let mut g = c.benchmark_group("mds_200");
    g.sample_size(10);
    g.bench_function("ilma_5_sweeps", |b| {
        let opts = IlmaOptions {
            max_sweeps: 5,
            tolerance: f64::MIN_POSITIVE,
            ..IlmaOptions::default()
        };
        b.iter(|| ilma_fit(&d, 3, &opts).unwrap())
    });
    g.bench_function("smacof_50_iterations", |b| {
        let opts = SmacofOptions {
            max_iter: 50,
            tolerance: f64::MIN_POSITIVE,
            ..SmacofOptions::default()
        };
        b.iter(|| smacof_fit(&d, 3, &opts).unwrap())
    });
    g.finish();
}

fn image_distance(c: &mut Criterion) {
    let params = ImedParams::default();
    let (a, b2) = (noise_image(40, 100, 1), noise_image(40, 100, 2));
    let mut g = c.benchmark_group("imed_40x100");
    g.sample_size(10);
    g.bench_function("direct", |b| b.iter(|| imed(&a, &b2, &params).unwrap()));
    g.bench_function("exact_transform", |b| b.iter(|| standardizing_transform(&a, &params).unwrap()));
    g.bench_function("approx_transform", |b| b.iter(|| standardizing_transform_approx(&a, &params).unwrap()));
    g.finish();
}

fn pyramids(c: &mut Criterion) {
    let images: Vec<_> = (0..8).map(|s| noise_image(40, 100, s)).collect();
    let params = SpmParams {
        vocab_size: 50,
        ..SpmParams::default()
    };
    let vocab = spm_vocabulary(&images, &params, &mut Rng::new(0)).unwrap();
    let mut g = c.benchmark_group("spm_40x100");
    g.bench_function("descriptors", |b| b.iter(|| dense_descriptors(&images[0], 8, 16).unwrap()));
    let descs = dense_descriptors(&images[0], 8, 16).unwrap();
    g.bench_function("pyramid_vector", |b| b.iter(|| pyramid_vector(&descs, (40, 100), &vocab, 2).unwrap()));
    g.finish();
}

criterion_group!(benches, eigen, point_placement, solvers, image_distance, pyramids);
criterion_main!(benches);
