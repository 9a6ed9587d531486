//! Shared setup helpers for the criterion benches.

use lbmcf_core::{BoundaryMode, Grid, GridConfig, MetricField, SMat, ScalarField};

pub fn bench_grid(n: usize, nodes: usize) -> Grid {
    Grid::new(GridConfig {
        n,
        r: 1.0,
        r_prime: 1.0,
        nodes_per_axis: nodes,
        bc: BoundaryMode::OneSided,
    })
    .unwrap()
}

pub fn bench_metric(n: usize) -> MetricField {
    MetricField::constant(SMat::identity(n))
}

pub fn bump_potential(grid: &Grid) -> ScalarField {
    let w = grid.r / 6.0;
    ScalarField::from_fn(grid, move |x| {
        let mut s = 0.0;
        for a in 0..3 {
            s += x[a] * x[a];
        }
        s /= w * w;
        0.05 * s * s * (-s).exp()
    })
}
