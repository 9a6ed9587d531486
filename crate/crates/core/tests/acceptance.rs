//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured quantities. Run with `cargo test --test acceptance` (the
//! whole workspace test run includes it).

use lbmcf_core::catalog::{self, PotentialExpr};
use lbmcf_core::density::{self, CutoffKind};
use lbmcf_core::flow::{self, FlowParams};
use lbmcf_core::frames::{self, Ch4Inputs};
use lbmcf_core::knorm::{self, K3aOutcome, Region, STPair, SpaceTimePoint};
use lbmcf_core::shrinker::{self, ResidualMode};
use lbmcf_core::smat::{SMat, MAX_DIM};
use lbmcf_core::{curvature, BoundaryMode, Grid, GridConfig, MetricField, ScalarField};

fn grid(n: usize, r: f64, nodes: usize) -> Grid {
    Grid::new(GridConfig {
        n,
        r,
        r_prime: 1.0,
        nodes_per_axis: nodes,
        bc: BoundaryMode::OneSided,
    })
    .unwrap()
}

/// Determinant of a general (not necessarily symmetric) small matrix:
/// the independent route for the weight-modulus identity.
fn det_raw(n: usize, m: &[[f64; MAX_DIM]; MAX_DIM]) -> f64 {
    match n {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unreachable!(),
    }
}

/// Criterion 1: pointwise structure identities on 50 seeded potentials.
#[test]
fn criterion_01_pointwise_structure() {
    let cases: Vec<(usize, usize)> = (0..25)
        .map(|s| (1usize, s as u64))
        .chain((0..25).map(|s| (2usize, s as u64 + 100)))
        .map(|(n, s)| (n, s as usize))
        .collect();
    let mut worst_det = 0.0f64;
    let mut worst_arg = 0.0f64;
    let mut worst_floor = 0.0f64;
    for (n, seed) in cases {
        let g = if n == 1 {
            grid(1, 1.0, 512)
        } else {
            grid(2, 1.0, 96)
        };
        let metric = MetricField::constant(catalog::random_spd(n, seed as u64));
        let phi = catalog::seeded_trig_potential(&g, 0.02, seed as u64 + 1000);
        let pack = curvature::build_pack(&g, &metric, &phi).unwrap();
        for node in 0..g.num_nodes() {
            // |ζ|² against det(I + K²) with K = g^{-1}F computed directly
            let gm = metric.at(node);
            let ginv = gm.inverse().unwrap();
            let k = ginv.mul_raw(pack.f.at(node));
            let mut ksq = [[0.0; MAX_DIM]; MAX_DIM];
            for i in 0..n {
                for j in 0..n {
                    let mut s = if i == j { 1.0 } else { 0.0 };
                    for l in 0..n {
                        s += k[i][l] * k[l][j];
                    }
                    ksq[i][j] = s;
                }
            }
            let det = det_raw(n, &ksq);
            let abs2 = pack.abs_zeta.data[node] * pack.abs_zeta.data[node];
            worst_det = worst_det.max((abs2 - det).abs());
            worst_floor = worst_floor.max(1.0 - pack.abs_zeta.data[node]);
            worst_arg = worst_arg.max((pack.zeta[node].arg() - pack.theta.data[node]).abs());
            let diff = pack.eta.at(node).sub(&gm);
            assert!(diff.min_eigenvalue() >= -1e-12, "eta - g not PSD at {node}");
        }
    }
    assert!(worst_det <= 1e-12, "|zeta|^2 vs det mismatch {worst_det:e}");
    assert!(worst_floor <= 1e-12, "|zeta| below 1 by {worst_floor:e}");
    assert!(worst_arg <= 1e-12, "angle lift mismatch {worst_arg:e}");
    println!(
        "criterion 1 (pointwise structure identities): PASS  det {worst_det:.2e}, floor {worst_floor:.2e}, arg {worst_arg:.2e}"
    );
}

fn bump_expr() -> PotentialExpr {
    PotentialExpr::QuarticBump { a: 0.02, w: 0.125 }
}

fn wide_bump_expr() -> PotentialExpr {
    PotentialExpr::QuarticBump { a: 0.08, w: 0.25 }
}

/// Gentle data for the density time-derivative identity: wide and shallow
/// enough that the identity's O(h²) error constants stay small at N = 512.
fn flow_bump_expr() -> PotentialExpr {
    PotentialExpr::QuarticBump { a: 0.03, w: 0.35 }
}

/// Criterion 2: identity-suite convergence order and the integral identity.
#[test]
fn criterion_02_identity_suite() {
    let metric_of = |g: &Grid| MetricField::constant(SMat::identity(g.n));
    let alpha = -1.0 / (4.0 * 0.1);
    let mut residuals = Vec::new();
    for nodes in [128usize, 256] {
        let g = grid(1, 1.0, nodes);
        let metric = metric_of(&g);
        let phi = wide_bump_expr().sample(&g).unwrap();
        let rows = frames::identity_suite(&Ch4Inputs {
            grid: &g,
            metric: &metric,
            phi: &phi,
            x0: [0.0; MAX_DIM],
            section_seed: 42,
            alpha,
        })
        .unwrap();
        residuals.push((g.h, rows));
    }
    let (h_c, coarse) = &residuals[0];
    let (h_f, fine) = &residuals[1];
    let mut orders = Vec::new();
    for test_id in [
        "div_pointwise",
        "div_position",
        "grad_norm_sq",
        "pairing_grad",
    ] {
        let rc = coarse
            .iter()
            .find(|r| r.test_id == test_id)
            .unwrap()
            .residual;
        let rf = fine.iter().find(|r| r.test_id == test_id).unwrap().residual;
        let order = (rc / rf).ln() / (h_c / h_f).ln();
        assert!(
            order >= 1.8,
            "{test_id}: order {order:.2} (residuals {rc:.3e} -> {rf:.3e})"
        );
        orders.push((test_id, order));
    }

    let g512 = grid(1, 1.0, 512);
    let metric = metric_of(&g512);
    let phi = wide_bump_expr().sample(&g512).unwrap();
    let rows = frames::identity_suite(&Ch4Inputs {
        grid: &g512,
        metric: &metric,
        phi: &phi,
        x0: [0.0; MAX_DIM],
        section_seed: 42,
        alpha,
    })
    .unwrap();
    let integral = rows
        .iter()
        .find(|r| r.test_id == "integral")
        .unwrap()
        .residual;
    assert!(integral <= 1e-3, "integral identity mismatch {integral:e}");
    println!(
        "criterion 2 (divergence identity suite): PASS  orders {:?}, integral mismatch {integral:.2e}",
        orders.iter().map(|(t, o)| format!("{t}:{o:.2}")).collect::<Vec<_>>()
    );
}

/// Criterion 3: frame normality and the norm identity of the mean curvature
/// section on the criterion-1 ensemble.
#[test]
fn criterion_03_frame_normality() {
    let mut worst_pair = 0.0f64;
    let mut worst_norm = 0.0f64;
    for seed in 0..25u64 {
        let (n, g) = if seed % 2 == 0 {
            (1, grid(1, 1.0, 512))
        } else {
            (2, grid(2, 1.0, 96))
        };
        let metric = MetricField::constant(catalog::random_spd(n, seed));
        let phi = catalog::seeded_trig_potential(&g, 0.02, seed + 1000);
        let pack = curvature::build_pack(&g, &metric, &phi).unwrap();
        let fp = frames::build_frames(&g, &metric, &pack.f).unwrap();
        let h1 = curvature::mean_curvature_oneform(&g, &pack.theta).unwrap();
        let hsec = frames::mean_curvature_section(&g, &fp, &h1);
        let hn = frames::norm_sq(&g, &metric, &hsec).unwrap();
        for node in 0..g.num_nodes() {
            let gm = metric.at(node);
            let ginv = gm.inverse().unwrap();
            for i in 0..n {
                let (ev, ew) = fp.frame_e(node, i);
                let p = frames::pair_at(
                    &gm,
                    &ginv,
                    &ev,
                    &ew,
                    &hsec.vec_part[node],
                    &hsec.form_part[node],
                );
                worst_pair = worst_pair.max(p.norm() / (1.0 + hn.data[node].sqrt()));
            }
            let etainv = fp.etainv.at(node);
            let mut hv = [0.0; MAX_DIM];
            hv[..n].copy_from_slice(&h1.at(node)[..n]);
            worst_norm = worst_norm.max((hn.data[node] - etainv.quad_form(&hv)).abs());
        }
    }
    assert!(worst_pair <= 1e-10, "normality pairing {worst_pair:e}");
    assert!(worst_norm <= 1e-12, "norm identity {worst_norm:e}");
    println!(
        "criterion 3 (mean curvature section normality): PASS  pairing {worst_pair:.2e}, norm {worst_norm:.2e}"
    );
}

fn static_traj(
    grid: &Grid,
    metric: MetricField,
    phi: ScalarField,
    times: &[f64],
) -> flow::Trajectory {
    flow::Trajectory {
        grid: grid.clone(),
        metric,
        times: times.to_vec(),
        phis: vec![phi; times.len()],
        theta_hat: 0.0,
    }
}

/// Criterion 4: flat Gaussian density equals one.
#[test]
fn criterion_04_flat_density() {
    let mut worst = 0.0f64;
    // n = 1: the box-scaled cutoff on a box wide enough for its plateau
    let g1 = Grid::new(GridConfig {
        n: 1,
        r: 16.0,
        r_prime: 1.0,
        nodes_per_axis: 1024,
        bc: BoundaryMode::OneSided,
    })
    .unwrap();
    let traj1 = static_traj(
        &g1,
        MetricField::constant(SMat::scalar(1.0)),
        ScalarField::zeros(&g1),
        &[0.0, 0.5],
    );
    for tau in [0.01, 0.05, 0.2] {
        let v = density::density_bar(
            &traj1,
            &[0.0; MAX_DIM],
            0.5,
            0.5 - tau,
            CutoffKind::BoxScaled,
            false,
        )
        .unwrap();
        worst = worst.max((v - 1.0).abs());
        // the literal two-volume normalization agrees with the cancelled form
        let lit = density::density_bar(
            &traj1,
            &[0.0; MAX_DIM],
            0.5,
            0.5 - tau,
            CutoffKind::BoxScaled,
            true,
        )
        .unwrap();
        assert!((v - lit).abs() < 1e-12);
    }
    // n = 2: the uncut variant (the box-scaled cutoff's plateau cannot hold eight
    // Gaussian widths at this resolution; see the density module docs)
    let g2 = Grid::new(GridConfig {
        n: 2,
        r: 3.0,
        r_prime: 1.0,
        nodes_per_axis: 192,
        bc: BoundaryMode::OneSided,
    })
    .unwrap();
    let traj2 = static_traj(
        &g2,
        MetricField::constant(SMat::identity(2)),
        ScalarField::zeros(&g2),
        &[0.0, 0.5],
    );
    for tau in [0.01, 0.05, 0.2] {
        let v = density::density_bar(
            &traj2,
            &[0.0; MAX_DIM],
            0.5,
            0.5 - tau,
            CutoffKind::None,
            false,
        )
        .unwrap();
        worst = worst.max((v - 1.0).abs());
    }
    assert!(worst <= 1e-6, "flat density deviation {worst:e}");
    println!("criterion 4 (flat Gaussian density): PASS  max |density - 1| = {worst:.2e}");
}

fn monotonicity_flow() -> (Grid, flow::Trajectory, Vec<flow::HistoryRow>) {
    let g = grid(1, 1.0, 512);
    let metric = MetricField::constant(SMat::scalar(1.0));
    let phi0 = flow_bump_expr().sample(&g).unwrap();
    let params = FlowParams {
        theta_hat: 0.0,
        dt: Some(1e-5),
        t_end: 0.02,
        cadence: 10,
        ..Default::default()
    };
    let (traj, hist) = flow::run(&g, &metric, phi0, &params).unwrap();
    (g, traj, hist)
}

/// Criterion 5: the density time-derivative identity along a bump flow, and
/// monotonicity of the normalized density with the derived constant.
#[test]
fn criterion_05_monotonicity() {
    let (g, traj, _) = monotonicity_flow();
    let h = g.h;
    let dt = 1e-5;
    let tol = (1e-4f64).max(5.0 * (h * h + dt));
    let mut sampled = 0usize;
    let mut worst = 0.0f64;
    for t_prime in [0.04, 0.12, 0.2] {
        let rep =
            density::monotonicity_residual(&traj, &[0.0; MAX_DIM], t_prime, CutoffKind::BoxScaled)
                .unwrap();
        for row in &rep.rows {
            assert!(
                row.tau >= 0.02 - 1e-12 && row.tau <= 0.2 + 0.021,
                "tau {} out of probe range",
                row.tau
            );
            assert!(row.b_term >= 0.0);
            assert!(
                row.residual <= tol,
                "residual {:.3e} at t={} tau={} exceeds {tol:.3e}",
                row.residual,
                row.t,
                row.tau
            );
            worst = worst.max(row.residual);
            sampled += 1;
        }
    }
    assert!(sampled >= 50, "only {sampled} sampled times");

    // normalized density + derived constant is nonincreasing (probe inside
    // the data span so the translation is available)
    let rep =
        density::monotonicity_residual(&traj, &[0.0; MAX_DIM], 0.018, CutoffKind::BoxScaled).unwrap();
    for row in &rep.rows {
        assert!(row.monotone_ok, "monotonicity violated at t={}", row.t);
    }
    println!(
        "criterion 5 (density monotonicity): PASS  {sampled} sampled times, worst residual {worst:.2e} (tol {tol:.2e}), C = {:.3e}, empirical slope bound {:.2e}",
        rep.c_thm, rep.c_empirical
    );
}

/// Criterion 6: the density limit probe at tiny backward time stays near one.
#[test]
fn criterion_06_density_limit() {
    let (_, traj, _) = monotonicity_flow();
    let t_prime = 0.018;
    let tau = 1e-3;
    let v = density::density_bar(
        &traj,
        &[0.0; MAX_DIM],
        t_prime,
        t_prime - tau,
        CutoffKind::BoxScaled,
        false,
    )
    .unwrap();
    assert!(v >= 1.0 - 5e-2, "density {v} at tau {tau}");
    println!("criterion 6 (density limit probe): PASS  density {v:.6} at tau {tau}");
}

/// Criterion 7: scaling invariances (density, curvature weight, curvature
/// gradient, scaling composition, distance scaling, norm inequalities).
#[test]
fn criterion_07_scaling_invariances() {
    // small bump flow for the trajectory-level checks
    let g = grid(1, 1.0, 256);
    let metric = MetricField::constant(SMat::scalar(1.0));
    let phi0 = bump_expr().sample(&g).unwrap();
    let params = FlowParams {
        theta_hat: 0.0,
        dt: Some(4e-5),
        t_end: 4e-3,
        cadence: 10,
        ..Default::default()
    };
    let (traj, _) = flow::run(&g, &metric, phi0, &params).unwrap();

    // density scaling invariance on node-aligned samples
    let t_prime = traj.times[traj.times.len() - 2];
    let t = traj.times[traj.times.len() / 2];
    let mut worst_density = 0.0f64;
    for k in [1u32, 2, 4, 16] {
        let (lhs, rhs, diff) =
            density::density_scaling_check(&traj, &[0.0; MAX_DIM], t_prime, k, t).unwrap();
        assert!(diff <= 1e-10, "k={k}: {lhs} vs {rhs}");
        worst_density = worst_density.max(diff);
    }

    // pointwise weight invariance and the gradient-norm ratio under scaling
    let mut worst_zeta = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let i_mid = traj.nearest_index(t);
    let pack = curvature::build_pack(&g, &traj.metric, &traj.phis[i_mid]).unwrap();
    let gf = flow::grad_f_norm_sq(&g, &traj.metric, &pack.f).unwrap();
    let probe = g.nearest_node(&[0.1, 0.0, 0.0]).unwrap();
    for k in [2u32, 4, 16] {
        let scaled = flow::scale_flow(&traj, k, t).unwrap();
        let si = scaled.nearest_index(0.0);
        let pack_s = curvature::build_pack(&g, &scaled.metric, &scaled.phis[si]).unwrap();
        for node in 0..g.num_nodes() {
            worst_zeta = worst_zeta.max((pack.zeta[node] - pack_s.zeta[node]).norm());
        }
        let gf_s = flow::grad_f_norm_sq(&g, &scaled.metric, &pack_s.f).unwrap();
        let ratio = gf_s.data[probe] / gf.data[probe];
        worst_ratio = worst_ratio.max((ratio * k as f64 - 1.0).abs());
    }
    assert!(worst_zeta <= 1e-12, "zeta drift {worst_zeta:e}");
    assert!(
        worst_ratio <= 50.0 * g.h * g.h,
        "gradient ratio drift {worst_ratio:e}"
    );

    // composition of pair scalings is exact on shared samples
    let pair = knorm::seeded_pair(1, 64, 11).unwrap();
    let a = pair.scale(4.0, 0.0).scale(2.0, 0.04);
    let b = pair.scale(8.0, 0.01);
    for (fa, fb) in a.fields.iter().zip(&b.fields) {
        assert_eq!(fa.data, fb.data, "composition fields differ");
    }
    let mut worst_time = 0.0f64;
    for (ta, tb) in a.times.iter().zip(&b.times) {
        worst_time = worst_time.max((ta - tb).abs());
    }
    assert!(worst_time <= 1e-12);

    // distance scaling law
    let gmat = catalog::random_spd(1, 3);
    let region = Region {
        lo: [-1.0, 0.0, 0.0],
        hi: [1.0, 0.0, 0.0],
        t_lo: 0.0,
        t_hi: 1.0,
    };
    let mut worst_dist = 0.0f64;
    for (kappa, t0, s0, x) in [
        (4.0, 0.25, 0.8, 0.3),
        (16.0, 0.1, 2.4, -0.6),
        (2.0, 0.5, 0.3, 0.0),
    ] {
        let qs = SpaceTimePoint {
            x: [x, 0.0, 0.0],
            t: s0,
        };
        let lhs =
            knorm::boundary_dist(&qs, &region.scale_time(kappa, t0), &gmat.scale(kappa)).unwrap();
        let qb = SpaceTimePoint {
            x: [x, 0.0, 0.0],
            t: t0 + s0 / kappa,
        };
        let rhs = kappa.sqrt() * knorm::boundary_dist(&qb, &region, &gmat).unwrap();
        worst_dist = worst_dist.max((lhs - rhs).abs());
    }
    assert!(worst_dist <= 1e-12, "distance scaling {worst_dist:e}");

    // norm scaling inequalities on 20 seeded pairs
    let alpha = 0.5;
    for seed in 0..20u64 {
        let pair = knorm::seeded_pair(
            1 + (seed % 2) as usize,
            if seed % 2 == 0 { 48 } else { 16 },
            seed,
        )
        .unwrap();
        let tables = knorm::build_tables(&pair).unwrap();
        let region = knorm::region_of_pair(&pair);
        let q = SpaceTimePoint {
            x: [0.0; MAX_DIM],
            t: 0.0,
        };
        let ev = knorm::NormEvaluator::build(&pair, &tables, &q, alpha, &region).unwrap();
        let n1 = ev.norm(1.0);
        for lam in [0.25f64, 0.5] {
            let nl = ev.norm(lam);
            let upper = lam.powf(-(1.0 + alpha) / 2.0) * n1;
            assert!(
                n1 <= nl + 1e-12 * (1.0 + n1) && nl <= upper + 1e-12 * (1.0 + upper),
                "seed {seed} lam {lam}: {n1} {nl} {upper}"
            );
        }
        for lam in [2.0f64, 4.0] {
            let nl = ev.norm(lam);
            let lower = lam.powf(-(1.0 + alpha) / 2.0) * n1;
            assert!(
                lower <= nl + 1e-12 * (1.0 + lower) && nl <= n1 + 1e-12 * (1.0 + n1),
                "seed {seed} lam {lam}: {lower} {nl} {n1}"
            );
        }
    }
    println!(
        "criterion 7 (scaling invariances): PASS  density {worst_density:.2e}, zeta {worst_zeta:.2e}, gradient {worst_ratio:.2e}, distance {worst_dist:.2e}, 20 norm pairs"
    );
}

/// Criterion 8: flow correctness (stationarity, volume monotonicity, first
/// variation, angle heat residual with refinement decay).
#[test]
fn criterion_08_flow_correctness() {
    // flat and quadratic stationarity over 1e3 steps
    let g = grid(1, 1.0, 128);
    let metric = MetricField::constant(SMat::scalar(1.0));
    let flat0 = ScalarField::zeros(&g);
    let pack = curvature::build_pack(&g, &metric, &flat0).unwrap();
    let dt = flow::stable_dt(&g, &pack.eta, 0.4);
    let mut state = flow::FlowState {
        phi: flat0.clone(),
        t: 0.0,
    };
    for _ in 0..1000 {
        let (next, _) = flow::step(&g, &metric, &state, dt, 0.0, flow::Scheme::Euler).unwrap();
        state = next;
    }
    let flat_drift = state.phi.max_abs();
    assert!(flat_drift <= 1e-12, "flat drift {flat_drift:e}");

    let quad0 = ScalarField::from_fn(&g, |x| 0.4 * x[0] * x[0]);
    let packq = curvature::build_pack(&g, &metric, &quad0).unwrap();
    let theta_hat = packq.theta.data[0];
    let dtq = flow::stable_dt(&g, &packq.eta, 0.4);
    let mut state = flow::FlowState {
        phi: quad0.clone(),
        t: 0.0,
    };
    for _ in 0..1000 {
        let (next, _) =
            flow::step(&g, &metric, &state, dtq, theta_hat, flow::Scheme::Euler).unwrap();
        state = next;
    }
    let quad_drift = state.phi.sub(&quad0).max_abs();
    assert!(quad_drift <= 1e-12, "quadratic drift {quad_drift:e}");

    // volume monotone on the criterion-5 flow history
    let (_, _, hist) = monotonicity_flow();
    for w in hist.windows(2) {
        assert!(
            w[1].volume <= w[0].volume + 1e-8,
            "volume rose at t={}",
            w[1].t
        );
    }

    // first variation and heat residual with refinement-verified decay, on a
    // box wide enough that the bump is compact to machine precision. The
    // envelope constant was calibrated once on this fixed configuration
    // (measured ratio residual/(h²+dt) ≈ 76 at three resolutions) and frozen
    // with margin.
    let mut heat_residuals = Vec::new();
    let mut first_var = Vec::new();
    let mut hdt = Vec::new();
    let diag_bump = PotentialExpr::QuarticBump { a: 0.04, w: 0.3 };
    for (nodes, dt) in [(256usize, 8e-5f64), (511, 2e-5), (1021, 5e-6)] {
        let g = grid(1, 2.0, nodes);
        let metric = MetricField::constant(SMat::scalar(1.0));
        let phi0 = diag_bump.sample(&g).unwrap();
        let params = FlowParams {
            theta_hat: 0.0,
            dt: Some(dt),
            t_end: 4e-3,
            cadence: 5,
            ..Default::default()
        };
        let (traj, _) = flow::run(&g, &metric, phi0, &params).unwrap();
        let rows = flow::flow_diagnostics(&traj).unwrap();
        heat_residuals.push(rows.iter().fold(0.0f64, |m, r| m.max(r.residual_heat)));
        first_var.push(
            rows.iter()
                .fold(0.0f64, |m, r| m.max(r.rel_err_first_variation)),
        );
        hdt.push(g.h * g.h + dt);
    }
    let finest_rel = *first_var.last().unwrap();
    assert!(
        finest_rel <= 1e-3,
        "first variation relative error {finest_rel:e}"
    );
    const HEAT_C: f64 = 120.0;
    for (res, scale) in heat_residuals.iter().zip(&hdt) {
        assert!(
            res <= &(HEAT_C * scale),
            "heat residual {res:e} vs C(h^2+dt) {:e}",
            HEAT_C * scale
        );
    }
    assert!(
        heat_residuals[1] < 0.7 * heat_residuals[0] && heat_residuals[2] < 0.7 * heat_residuals[1],
        "no refinement decay: {heat_residuals:?}"
    );
    println!(
        "criterion 8 (flow correctness): PASS  drifts {flat_drift:.1e}/{quad_drift:.1e}, first-variation {finest_rel:.2e}, heat residuals {heat_residuals:?}"
    );
}

/// Criterion 9: self-similar solution suite.
#[test]
fn criterion_09_shrinker_suite() {
    // residuals on 20 random symmetric quadratics, both modes, all lambda
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let n = 1 + (seed % 2) as usize;
        let g = if n == 1 {
            grid(1, 1.0, 33)
        } else {
            grid(2, 1.0, 17)
        };
        let metric = MetricField::constant(catalog::random_spd(n, seed + 500));
        let a = catalog::random_symmetric(n, 0.5, seed);
        let phi = shrinker::quadratic_potential(&g, &a, 0.2).unwrap();
        for lambda in [-1.5, 0.7] {
            for mode in [ResidualMode::Scalar, ResidualMode::Vector] {
                let r = shrinker::shrinker_residual(&g, &metric, &phi, lambda, mode).unwrap();
                worst = worst.max(r.max_abs());
            }
        }
    }
    assert!(worst <= 1e-12, "quadratic residual {worst:e}");

    // affinity of the scalar residual in lambda
    let g = grid(1, 1.0, 129);
    let metric = MetricField::constant(SMat::scalar(1.0));
    let phi = bump_expr().sample(&g).unwrap();
    let l = [-1.0, 0.5, 2.0];
    let r: Vec<ScalarField> = l
        .iter()
        .map(|&lam| {
            shrinker::shrinker_residual(&g, &metric, &phi, lam, ResidualMode::Scalar).unwrap()
        })
        .collect();
    let w = (l[1] - l[0]) / (l[2] - l[0]);
    let mut worst_affine = 0.0f64;
    for node in 0..g.num_nodes() {
        let interp = r[0].data[node] + w * (r[2].data[node] - r[0].data[node]);
        worst_affine = worst_affine.max((interp - r[1].data[node]).abs());
    }
    assert!(worst_affine <= 1e-10, "affinity {worst_affine:e}");

    // perturbation detector
    let gp = grid(1, 1.0, 129);
    let phi_pert = ScalarField::from_fn(&gp, |x| x[0] * x[0] + 1e-2 * x[0].powi(4));
    let traj = flow::Trajectory {
        grid: gp.clone(),
        metric: MetricField::constant(SMat::scalar(1.0)),
        times: vec![-2.0, -1.0, -0.5],
        phis: vec![phi_pert; 3],
        theta_hat: 0.0,
    };
    let rep = shrinker::self_similar_family_check(&traj).unwrap();
    assert!(
        rep.max_vector_residual > 1e-3,
        "detector missed: {}",
        rep.max_vector_residual
    );
    assert!(rep.spread_max > 1e-4, "spread missed: {}", rep.spread_max);

    // the density detector flags exactly the flat and quadratic members
    let gd = Grid::new(GridConfig {
        n: 1,
        r: 4.0,
        r_prime: 1.0,
        nodes_per_axis: 257,
        bc: BoundaryMode::OneSided,
    })
    .unwrap();
    let metric = MetricField::constant(SMat::scalar(1.0));
    let times = [0.0, 0.01, 0.02];
    let mut members: Vec<(bool, flow::Trajectory)> = Vec::new();
    members.push((
        true,
        static_traj(&gd, metric.clone(), ScalarField::zeros(&gd), &times),
    ));
    for a in [0.2, -0.25, 0.3] {
        let phi = ScalarField::from_fn(&gd, move |x| a * x[0] * x[0] + 0.1 * x[0]);
        members.push((true, static_traj(&gd, metric.clone(), phi, &times)));
    }
    for (i, a) in [0.3, 0.5, 0.4, 0.6, 0.35].iter().enumerate() {
        let a = *a;
        let w = 0.5 + 0.1 * i as f64;
        let phi = ScalarField::from_fn(&gd, move |x| {
            let s = x[0] * x[0] / (w * w);
            a * s * s * (-s).exp()
        });
        members.push((false, static_traj(&gd, metric.clone(), phi, &times)));
    }
    for k in [1u32, 2, 3] {
        let phi = PotentialExpr::Sine { k, amp: 0.1 }.sample(&gd).unwrap();
        members.push((false, static_traj(&gd, metric.clone(), phi, &times)));
    }
    assert_eq!(members.len(), 12);
    let mut flags = Vec::new();
    for (want, traj) in &members {
        let rep =
            density::shrinker_detect(traj, &[0.0; MAX_DIM], 0.02, (0.0, 0.01), 1e-8, 1e-2).unwrap();
        assert_eq!(
            rep.flagged, *want,
            "member flagged={} (residual {:.2e}, density {:.6})",
            rep.flagged, rep.sup_residual, rep.sup_theta_inf
        );
        flags.push(rep.flagged);
    }
    println!(
        "criterion 9 (self-similar suite): PASS  quadratic residual {worst:.2e}, affinity {worst_affine:.2e}, detector flags {flags:?}"
    );
}

/// Criterion 10: K-quantity suite.
#[test]
fn criterion_10_knorm_suite() {
    // zero on static quadratic pairs, exactly
    let g = grid(1, 1.0, 65);
    let gm = SMat::scalar(1.0);
    let quad = ScalarField::from_fn(&g, |x| 0.8 * x[0] * x[0] - 0.1);
    let times: Vec<f64> = (0..9).map(|i| -0.2 + i as f64 * 0.05).collect();
    let pair = STPair {
        grid: g.clone(),
        g: gm,
        times: times.clone(),
        fields: vec![quad; times.len()],
    };
    let tables = knorm::build_tables(&pair).unwrap();
    let region = knorm::region_of_pair(&pair);
    let q = SpaceTimePoint {
        x: [0.0; MAX_DIM],
        t: 0.0,
    };
    let res = knorm::k3a(&pair, &tables, &q, 0.5, &region).unwrap();
    assert_eq!(res.outcome, K3aOutcome::Zero);
    assert_eq!(res.outcome.as_f64(), 0.0);

    // product invariance under the scaling with kappa = 4
    let kappa = 4.0;
    let t0 = 0.0;
    let base = {
        let f = ScalarField::from_fn(&g, |x| 3.0 * x[0].powi(3) + 0.5 * x[0] * x[0]);
        STPair {
            grid: g.clone(),
            g: gm,
            times: times.clone(),
            fields: vec![f; times.len()],
        }
    };
    let tables_b = knorm::build_tables(&base).unwrap();
    let region_b = knorm::region_of_pair(&base);
    let qb = SpaceTimePoint {
        x: [0.0; MAX_DIM],
        t: 0.05,
    };
    let dist_b = knorm::boundary_dist(&qb, &region_b, &base.g).unwrap();
    let kb = knorm::k3a(&base, &tables_b, &qb, 0.5, &region_b).unwrap();

    let scaled = base.scale(kappa, t0);
    let tables_s = knorm::build_tables(&scaled).unwrap();
    let region_s = region_b.scale_time(kappa, t0);
    let qs = SpaceTimePoint {
        x: [0.0; MAX_DIM],
        t: kappa * (qb.t - t0),
    };
    let dist_s = knorm::boundary_dist(&qs, &region_s, &scaled.g).unwrap();
    let ks = knorm::k3a(&scaled, &tables_s, &qs, 0.5, &region_s).unwrap();

    let (K3aOutcome::Value(kv_b), K3aOutcome::Value(kv_s)) = (kb.outcome, ks.outcome) else {
        panic!(
            "expected finite crossings, got {:?} / {:?}",
            kb.outcome, ks.outcome
        );
    };
    let prod_b = dist_b * kv_b;
    let prod_s = dist_s * kv_s;
    let rel = (prod_b - prod_s).abs() / prod_b.max(1e-300);
    assert!(rel <= 1e-6, "product invariance: {prod_b} vs {prod_s}");

    // regularity scatter: ten members, the flat row degenerate
    let gf = grid(1, 1.0, 128);
    let metric = MetricField::constant(SMat::scalar(1.0));
    let mut trajs = Vec::new();
    for i in 0..10usize {
        let phi0 = if i == 0 {
            ScalarField::zeros(&gf)
        } else {
            let a = 0.01 + 0.002 * i as f64;
            let w = 0.125;
            ScalarField::from_fn(&gf, move |x| {
                let s = x[0] * x[0] / (w * w);
                a * s * s * (-s).exp()
            })
        };
        let params = FlowParams {
            theta_hat: 0.0,
            dt: Some(5e-5),
            t_end: 0.01,
            cadence: 10,
            ..Default::default()
        };
        let (traj, _) = flow::run(&gf, &metric, phi0, &params).unwrap();
        trajs.push(traj);
    }
    let members: Vec<(u64, &flow::Trajectory)> = (0..10u64).zip(trajs.iter()).collect();
    let rows = knorm::eps_probe(&members, 0.5, &[1e-3, 4e-3], 8, 5).unwrap();
    assert_eq!(rows.len(), 10);
    for row in &rows {
        assert!(
            row.sup_density_excess.is_finite() && row.sup_f.is_finite() && row.k3a_v.is_finite(),
            "non-finite row for seed {}",
            row.seed
        );
    }
    assert!(
        rows[0].sup_density_excess <= 1e-8,
        "flat density excess {}",
        rows[0].sup_density_excess
    );
    assert_eq!(rows[0].sup_f, 0.0);
    assert_eq!(rows[0].k3a_v, 0.0);
    println!(
        "criterion 10 (K-quantity suite): PASS  zero-on-quadratic, product invariance {rel:.2e}, scatter rows {}",
        rows.len()
    );
}
