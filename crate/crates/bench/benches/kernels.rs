//! Hot-kernel benchmarks: pointwise curvature packs, a density evaluation
//! and one explicit flow step.

use criterion::{criterion_group, criterion_main, Criterion};
use lbmcf_bench::{bench_grid, bench_metric, bump_potential};
use lbmcf_core::density::{theta_at, CutoffKind};
use lbmcf_core::flow::{step, FlowState, Scheme};
use lbmcf_core::{curvature, frames};
use std::hint::black_box;

fn curvature_pack(c: &mut Criterion) {
    let grid1 = bench_grid(1, 512);
    let metric1 = bench_metric(1);
    let phi1 = bump_potential(&grid1);
    c.bench_function("curvature_pack_n1_512", |b| {
        b.iter(|| curvature::build_pack(black_box(&grid1), &metric1, &phi1).unwrap())
    });

    let grid2 = bench_grid(2, 64);
    let metric2 = bench_metric(2);
    let phi2 = bump_potential(&grid2);
    c.bench_function("curvature_pack_n2_64", |b| {
        b.iter(|| curvature::build_pack(black_box(&grid2), &metric2, &phi2).unwrap())
    });
}

fn density_eval(c: &mut Criterion) {
    let grid = bench_grid(1, 512);
    let metric = bench_metric(1);
    let phi = bump_potential(&grid);
    c.bench_function("density_theta_512", |b| {
        b.iter(|| {
            theta_at(
                black_box(&grid),
                &metric,
                &phi,
                &[0.0; 3],
                0.05,
                CutoffKind::BoxScaled,
            )
            .unwrap()
        })
    });
}

fn flow_step(c: &mut Criterion) {
    let grid = bench_grid(1, 512);
    let metric = bench_metric(1);
    let state = FlowState {
        phi: bump_potential(&grid),
        t: 0.0,
    };
    c.bench_function("flow_step_512", |b| {
        b.iter(|| step(black_box(&grid), &metric, &state, 1e-5, 0.0, Scheme::Euler).unwrap())
    });
}

fn frame_decompose(c: &mut Criterion) {
    let grid = bench_grid(2, 48);
    let metric = bench_metric(2);
    let phi = bump_potential(&grid);
    let pack = curvature::build_pack(&grid, &metric, &phi).unwrap();
    let fp = frames::build_frames(&grid, &metric, &pack.f).unwrap();
    let y = lbmcf_core::catalog::seeded_trig_section(&grid, 0.5, 3);
    c.bench_function("decompose_n2_48", |b| {
        b.iter(|| frames::decompose(black_box(&grid), &fp, &y))
    });
}

criterion_group!(
    benches,
    curvature_pack,
    density_eval,
    flow_step,
    frame_decompose
);
criterion_main!(benches);
