use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use cytoloc_bench::{
    fcrn_maps, fcrn_params, geometry, ifcrn_maps, ifcrn_params, predictions, random_costs, scene,
};
use cytoloc_core::{
    distance_matrix, evaluate_image, extract_local_maxima, extract_threshold_cc, gaussian_blur,
    render_fcrn_gt, render_ifcrn_gt, solve_assignment, KernelNormalization, MaximaExtractParams,
    MetricParams, ThresholdExtractParams,
};

fn assignment(c: &mut Criterion) {
    let mut group = c.benchmark_group("assignment");
    for n in [10, 50, 200] {
        let costs = random_costs(n, n as u64);
        group.bench_with_input(BenchmarkId::new("random", n), &costs, |b, m| {
            b.iter(|| solve_assignment(black_box(m)).unwrap())
        });
    }
    // Point sets produce many near-ties, unlike uniform costs.
    for n in [20, 100] {
        let gt = scene(n, 1);
        let m = distance_matrix(&predictions(&gt, 2), &gt);
        group.bench_with_input(BenchmarkId::new("scene", n), &m, |b, m| {
            b.iter(|| solve_assignment(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn blur(c: &mut Criterion) {
    let mut group = c.benchmark_group("gaussian_blur");
    let map = &fcrn_maps(1, 20)[0];
    group.throughput(Throughput::Elements((map.width() * map.height()) as u64));
    for sigma in [1.0, 3.0, 8.0] {
        group.bench_with_input(BenchmarkId::from_parameter(sigma), &sigma, |b, &s| {
            b.iter(|| gaussian_blur(black_box(map), s, KernelNormalization::SumOne).unwrap())
        });
    }
    group.finish();
}

fn render(c: &mut Criterion) {
    let mut group = c.benchmark_group("render");
    let gt = scene(50, 3);
    group.bench_function("fcrn", |b| {
        b.iter(|| render_fcrn_gt(black_box(&gt), geometry(), &fcrn_params()).unwrap())
    });
    group.bench_function("ifcrn", |b| {
        b.iter(|| render_ifcrn_gt(black_box(&gt), geometry(), &ifcrn_params()).unwrap())
    });
    group.finish();
}

fn extraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("extraction");
    let nuclei = 20;
    group.throughput(Throughput::Elements(nuclei as u64));
    let fcrn = &fcrn_maps(1, nuclei)[0];
    let ifcrn = &ifcrn_maps(1, nuclei)[0];
    let threshold = ThresholdExtractParams::default();
    let maxima = MaximaExtractParams::new(MaximaExtractParams::TUNED_HEIGHT, 1);
    group.bench_function("threshold_cc", |b| {
        b.iter(|| extract_threshold_cc(black_box(fcrn), &threshold).unwrap())
    });
    group.bench_function("local_maxima", |b| {
        b.iter(|| extract_local_maxima(black_box(ifcrn), &maxima).unwrap())
    });
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate_image");
    let params = MetricParams::from_diameter(24.0, 0.3).unwrap();
    for n in [20, 100] {
        let gt = scene(n, 4);
        let preds = predictions(&gt, 5);
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| evaluate_image(black_box(&preds), &gt, geometry(), &params).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, assignment, blur, render, extraction, evaluation);
criterion_main!(benches);
