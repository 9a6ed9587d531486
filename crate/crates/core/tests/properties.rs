//! Property tests for the structural invariants: angle/weight consistency,
//! frame decomposition, cutoff shape and snapshot round-trips.

use lbmcf_core::catalog;
use lbmcf_core::curvature::angle_zeta;
use lbmcf_core::cutoff::{cutoff_profile, cutoff_profile_family};
use lbmcf_core::frames;
use lbmcf_core::grid::GridConfig;
use lbmcf_core::quad::pairwise_sum;
use lbmcf_core::snapshot;
use lbmcf_core::{BoundaryMode, Grid, MetricField, ScalarField};
use proptest::prelude::*;

proptest! {
    #[test]
    fn angle_weight_consistency(lams in prop::collection::vec(-5.0f64..5.0, 1..=3)) {
        let (theta, zeta, abs) = angle_zeta(&lams);
        // modulus against the product form
        let want: f64 = lams.iter().map(|l| (1.0 + l * l).sqrt()).product();
        prop_assert!((abs - want).abs() <= 1e-12 * want);
        prop_assert!(abs >= 1.0 - 1e-12);
        prop_assert!((zeta.norm() - abs).abs() <= 1e-12 * want);
        // range of the lifted angle
        let n = lams.len() as f64;
        prop_assert!(theta.abs() < n * std::f64::consts::FRAC_PI_2 + 1e-12);
        // the argument agrees with the lift when no wrap can occur
        if theta.abs() < std::f64::consts::PI - 1e-6 {
            prop_assert!((zeta.arg() - theta).abs() <= 1e-12);
        }
    }

    #[test]
    fn decomposition_is_orthogonal_split(seed in 0u64..500) {
        let grid = Grid::new(GridConfig {
            n: 2, r: 1.0, r_prime: 1.0, nodes_per_axis: 10, bc: BoundaryMode::OneSided,
        }).unwrap();
        let metric = MetricField::constant(catalog::random_spd(2, seed));
        let phi = catalog::seeded_trig_potential(&grid, 0.3, seed.wrapping_add(1));
        let pack = lbmcf_core::curvature::build_pack(&grid, &metric, &phi).unwrap();
        let fp = frames::build_frames(&grid, &metric, &pack.f).unwrap();
        let y = catalog::seeded_trig_section(&grid, 1.0, seed.wrapping_add(2));
        let dec = frames::decompose(&grid, &fp, &y);
        let recon = dec.tangential.add(&dec.normal);
        prop_assert!(recon.sub(&y).max_component_abs() <= 1e-12);
        let ny = frames::norm_sq(&grid, &metric, &y).unwrap();
        let nt = frames::norm_sq(&grid, &metric, &dec.tangential).unwrap();
        let nn = frames::norm_sq(&grid, &metric, &dec.normal).unwrap();
        for i in 0..grid.num_nodes() {
            prop_assert!((ny.data[i] - nt.data[i] - nn.data[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn cutoff_profiles_shape(s in -3.0f64..8.0, j in 0u32..5) {
        let v = cutoff_profile(s);
        prop_assert!((0.0..=1.0).contains(&v));
        if s <= 1.0 { prop_assert_eq!(v, 1.0); }
        if s >= 2.0 { prop_assert_eq!(v, 0.0); }
        // monotone nonincreasing
        prop_assert!(cutoff_profile(s + 0.1) <= v + 1e-15);
        let fj = cutoff_profile_family(s, j);
        prop_assert!((0.0..=1.0).contains(&fj));
        if s <= j as f64 { prop_assert_eq!(fj, 1.0); }
        // family widens monotonically with j
        prop_assert!(cutoff_profile_family(s, j + 1) >= fj - 1e-15);
    }

    #[test]
    fn snapshot_roundtrip(seed in 0u64..1000, time in -10.0f64..10.0) {
        let grid = Grid::new(GridConfig {
            n: 1, r: 2.0, r_prime: 0.5, nodes_per_axis: 16, bc: BoundaryMode::Periodic,
        }).unwrap();
        let field = catalog::seeded_trig_potential(&grid, 3.0, seed);
        let text = snapshot::write_snapshot(&grid, &field, time).unwrap();
        let snap = snapshot::read_snapshot(&text).unwrap();
        prop_assert_eq!(snap.field.data, field.data);
        prop_assert_eq!(snap.time, time);
    }

    #[test]
    fn pairwise_sum_close_to_sequential(v in prop::collection::vec(-1e6f64..1e6, 0..200)) {
        let seq: f64 = v.iter().sum();
        let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((pairwise_sum(&v) - seq).abs() <= 1e-10 * scale);
    }

    #[test]
    fn eta_dominates_metric(seed in 0u64..200) {
        let grid = Grid::new(GridConfig {
            n: 2, r: 1.0, r_prime: 1.0, nodes_per_axis: 10, bc: BoundaryMode::OneSided,
        }).unwrap();
        let g = catalog::random_spd(2, seed);
        let metric = MetricField::constant(g);
        let phi = catalog::seeded_trig_potential(&grid, 0.4, seed.wrapping_add(9));
        let pack = lbmcf_core::curvature::build_pack(&grid, &metric, &phi).unwrap();
        for node in 0..grid.num_nodes() {
            let diff = pack.eta.at(node).sub(&g);
            prop_assert!(diff.min_eigenvalue() >= -1e-12);
        }
    }
}

#[test]
fn flat_field_snapshot_header() {
    let grid = Grid::new(GridConfig {
        n: 1,
        r: 1.0,
        r_prime: 1.0,
        nodes_per_axis: 9,
        bc: BoundaryMode::OneSided,
    })
    .unwrap();
    let text = snapshot::write_snapshot(&grid, &ScalarField::zeros(&grid), 0.0).unwrap();
    assert!(text.starts_with("LBMCF-SNAPSHOT v1\n"));
    assert!(text.contains("bc one-sided"));
}
