//! Self-similar solutions: quadratic-potential generators, pointwise
//! residual operators in scalar and vector form, verification of self-similar
//! families along a negative-time trajectory, and a quadratic-fit consistency
//! probe.

use crate::curvature;
use crate::density::interp_at;
use crate::diff;
use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::flow::Trajectory;
use crate::grid::Grid;
use crate::metric::MetricField;
use crate::smat::{SMat, MAX_DIM};

/// Self-similar coefficient data: negative coefficients shrink, positive
/// ones expand.
#[derive(Debug, Clone, Copy)]
pub struct ShrinkerSpec {
    pub lambda_coef: f64,
    pub theta0: f64,
    pub phi0: f64,
}

impl ShrinkerSpec {
    pub fn is_shrinker(&self) -> bool {
        self.lambda_coef < 0.0
    }
}

/// `φ = b + xᵀ A x` for symmetric `A`: constant curvature `A/2`, constant
/// angle, vanishing mean curvature.
pub fn quadratic_potential(grid: &Grid, a: &SMat, b: f64) -> Result<ScalarField> {
    let mut asym: f64 = 0.0;
    for i in 0..grid.n {
        for j in 0..grid.n {
            asym = asym.max((a.a[i][j] - a.a[j][i]).abs());
        }
    }
    if asym > 0.0 {
        return Err(CoreError::NotSymmetric(asym));
    }
    let a = *a;
    let n = grid.n;
    Ok(ScalarField::from_fn(grid, move |x| {
        let mut s = b;
        for i in 0..n {
            for j in 0..n {
                s += a.a[i][j] * x[i] * x[j];
            }
        }
        s
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualMode {
    /// `θ − 2λ(φ − φ(0) − x·∇φ/2) − θ(0)`.
    Scalar,
    /// Componentwise `H_i − λ(−2 x^k F_ik + ∇φ_i/2)`, reported as the
    /// η^{-1}-norm.
    Vector,
}

/// Values of `φ` and `θ` at the origin by quadratic interpolation (the origin
/// need not be a node).
fn origin_values(grid: &Grid, metric: &MetricField, phi: &ScalarField) -> Result<(f64, f64)> {
    let origin = [0.0; MAX_DIM];
    if !grid.contains(&origin) {
        return Err(CoreError::CenterOutsideBox);
    }
    let pack = curvature::build_pack(grid, metric, phi)?;
    let phi0 = interp_at(grid, phi, &origin)?;
    let theta0 = interp_at(grid, &pack.theta, &origin)?;
    Ok((phi0, theta0))
}

/// Pointwise residual of the self-similar equation with coefficient
/// `lambda`; identically zero (to stencil accuracy) exactly on self-similar
/// potentials, and zero for every `lambda` on centered quadratics.
pub fn shrinker_residual(
    grid: &Grid,
    metric: &MetricField,
    phi: &ScalarField,
    lambda: f64,
    mode: ResidualMode,
) -> Result<ScalarField> {
    let (phi0, theta0) = origin_values(grid, metric, phi)?;
    let pack = curvature::build_pack(grid, metric, phi)?;
    let grads = diff::gradient(grid, phi)?;
    match mode {
        ResidualMode::Scalar => {
            let data = (0..grid.num_nodes())
                .map(|node| {
                    let x = grid.coords(node);
                    let mut xg = 0.0;
                    for a in 0..grid.n {
                        xg += x[a] * grads[node][a];
                    }
                    pack.theta.data[node]
                        - 2.0 * lambda * (phi.data[node] - phi0 - 0.5 * xg)
                        - theta0
                })
                .collect();
            Ok(ScalarField { data })
        }
        ResidualMode::Vector => {
            let h = curvature::mean_curvature_oneform(grid, &pack.theta)?;
            let data = (0..grid.num_nodes())
                .map(|node| {
                    let x = grid.coords(node);
                    let f = pack.f.at(node);
                    let mut r = [0.0; MAX_DIM];
                    for i in 0..grid.n {
                        let mut xf = 0.0;
                        for k in 0..grid.n {
                            xf += x[k] * f.a[i][k];
                        }
                        r[i] = h.at(node)[i] - lambda * (-2.0 * xf + 0.5 * grads[node][i]);
                    }
                    let etainv = pack.eta.at(node).inverse().expect("eta SPD");
                    etainv.quad_form(&r).max(0.0).sqrt()
                })
                .collect();
            Ok(ScalarField { data })
        }
    }
}

/// Report rows of the family verification: per-time vector residual and the
/// per-point spread of the scaled second derivatives.
#[derive(Debug, Clone)]
pub struct FamilyRow {
    pub t: f64,
    pub vector_residual_l2: f64,
    pub scalar_residual_max: f64,
}

#[derive(Debug, Clone)]
pub struct FamilyReport {
    pub rows: Vec<FamilyRow>,
    /// Max over sampled points of `max_t ψ(√(-t)x, t) − min_t ψ(√(-t)x, t)`
    /// with `ψ` the second x-derivatives.
    pub spread_max: f64,
    pub max_vector_residual: f64,
}

/// Verifies that a negative-time trajectory is self-similar with coefficient
/// `1/(2t)`: residuals of the vector equation per time, plus the constancy of
/// the second derivatives along parabolic rays.
pub fn self_similar_family_check(traj: &Trajectory) -> Result<FamilyReport> {
    if traj.times.iter().any(|&t| t >= 0.0) {
        return Err(CoreError::Invalid(
            "family check needs strictly negative times".into(),
        ));
    }
    let grid = &traj.grid;
    let metric = &traj.metric;
    let mut rows = Vec::new();
    let mut max_vec = 0.0f64;
    for (i, &t) in traj.times.iter().enumerate() {
        let lambda = 1.0 / (2.0 * t);
        let vres = shrinker_residual(grid, metric, &traj.phis[i], lambda, ResidualMode::Vector)?;
        let sres = shrinker_residual(grid, metric, &traj.phis[i], lambda, ResidualMode::Scalar)?;
        // L2 over interior nodes
        let mut s = 0.0;
        let mut cnt = 0usize;
        for node in 0..grid.num_nodes() {
            if grid.is_interior(node, 2) {
                s += vres.data[node] * vres.data[node];
                cnt += 1;
            }
        }
        let l2 = (s / cnt.max(1) as f64).sqrt();
        max_vec = max_vec.max(l2);
        rows.push(FamilyRow {
            t,
            vector_residual_l2: l2,
            scalar_residual_max: sres.max_abs(),
        });
    }

    // spread of f_x(t) = ψ(√(-t) x, t) over sampled x
    let mut spread_max = 0.0f64;
    let probes: Vec<[f64; MAX_DIM]> = {
        let mut v = Vec::new();
        let m = 5;
        for k in 0..=m {
            let mut x = [0.0; MAX_DIM];
            for a in 0..grid.n {
                x[a] = -0.5 * grid.r + k as f64 * grid.r / m as f64;
            }
            v.push(x);
        }
        v
    };
    for i in 0..grid.n {
        for j in i..grid.n {
            for x in &probes {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (k, &t) in traj.times.iter().enumerate() {
                    let scale = (-t).sqrt();
                    let mut xs = [0.0; MAX_DIM];
                    let mut inside = true;
                    for a in 0..grid.n {
                        xs[a] = scale * x[a];
                        if xs[a].abs() > grid.r {
                            inside = false;
                        }
                    }
                    if !inside {
                        continue;
                    }
                    let dij = diff::d2(grid, &traj.phis[k], i, j)?;
                    let v = interp_at(grid, &dij, &xs)?;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if hi > lo {
                    spread_max = spread_max.max(hi - lo);
                }
            }
        }
    }
    Ok(FamilyReport {
        rows,
        spread_max,
        max_vector_residual: max_vec,
    })
}

pub fn family_to_csv(rep: &FamilyReport, fit_residual: Option<f64>) -> String {
    let mut s = String::from("t,vector_residual_L2,scalar_residual_max,fit_residual\n");
    for r in &rep.rows {
        let fit = fit_residual.map_or(String::new(), |v| format!("{v}"));
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.t, r.vector_residual_l2, r.scalar_residual_max, fit
        ));
    }
    s
}

#[derive(Debug, Clone)]
pub struct LiouvilleReport {
    pub fit_residual: f64,
    pub consistent: bool,
}

/// Least-squares fit of `φ(·, t_b)` by a quadratic `b + Σ c_i x_i + Σ a_ij
/// x_i x_j`, reported as `‖φ − fit‖∞ / ‖φ‖∞`. Consistency means the fit
/// residual stays within a factor of the family-check residual.
pub fn liouville_probe(
    grid: &Grid,
    phi: &ScalarField,
    family_residual: f64,
) -> Result<LiouvilleReport> {
    let n = grid.n;
    // monomials: 1, x_i, x_i x_j (i<=j)
    let mut monos: Vec<Box<dyn Fn(&[f64; MAX_DIM]) -> f64>> = Vec::new();
    monos.push(Box::new(|_| 1.0));
    for i in 0..n {
        monos.push(Box::new(move |x| x[i]));
    }
    for i in 0..n {
        for j in i..n {
            monos.push(Box::new(move |x| x[i] * x[j]));
        }
    }
    let m = monos.len();
    let mut ata = vec![vec![0.0f64; m]; m];
    let mut atb = vec![0.0f64; m];
    for node in 0..grid.num_nodes() {
        let x = grid.coords(node);
        let row: Vec<f64> = monos.iter().map(|f| f(&x)).collect();
        for i in 0..m {
            for j in 0..m {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * phi.data[node];
        }
    }
    // gaussian elimination with partial pivoting
    let mut aug = ata.clone();
    for i in 0..m {
        aug[i].push(atb[i]);
    }
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if aug[r][col].abs() > aug[piv][col].abs() {
                piv = r;
            }
        }
        if aug[piv][col].abs() < 1e-12 {
            return Err(CoreError::IllConditionedFit(format!(
                "pivot {:.3e} at column {col}",
                aug[piv][col]
            )));
        }
        aug.swap(col, piv);
        let p = aug[col][col];
        for r in 0..m {
            if r != col {
                let factor = aug[r][col] / p;
                for c in col..=m {
                    let v = aug[col][c];
                    aug[r][c] -= factor * v;
                }
            }
        }
    }
    let coef: Vec<f64> = (0..m).map(|i| aug[i][m] / aug[i][i]).collect();
    let mut max_err = 0.0f64;
    for node in 0..grid.num_nodes() {
        let x = grid.coords(node);
        let fit: f64 = monos.iter().zip(&coef).map(|(f, c)| c * f(&x)).sum();
        max_err = max_err.max((phi.data[node] - fit).abs());
    }
    let denom = phi.max_abs().max(1e-300);
    let fit_residual = max_err / denom;
    Ok(LiouvilleReport {
        fit_residual,
        consistent: fit_residual <= 10.0 * family_residual.max(1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::grid::{BoundaryMode, GridConfig};

    fn grid1(nn: usize) -> Grid {
        Grid::new(GridConfig {
            n: 1,
            r: 1.0,
            r_prime: 1.0,
            nodes_per_axis: nn,
            bc: BoundaryMode::OneSided,
        })
        .unwrap()
    }

    fn unit_metric() -> MetricField {
        MetricField::constant(SMat::scalar(1.0))
    }

    #[test]
    fn quadratic_residuals_vanish_for_all_lambda() {
        let grid = grid1(33);
        let metric = unit_metric();
        let a = SMat::scalar(1.0);
        let phi = quadratic_potential(&grid, &a, 0.3).unwrap();
        for lambda in [-2.0, -0.5, 0.0, 1.7] {
            for mode in [ResidualMode::Scalar, ResidualMode::Vector] {
                let r = shrinker_residual(&grid, &metric, &phi, lambda, mode).unwrap();
                assert!(r.max_abs() < 1e-12, "lambda={lambda}: {}", r.max_abs());
            }
        }
    }

    #[test]
    fn quartic_scalar_residual_closed_form() {
        // φ = x⁴, λ = −1 at x = 1: arctan(3) − 2 ≈ −0.7510
        let grid = Grid::new(GridConfig {
            n: 1,
            r: 1.1,
            r_prime: 1.0,
            nodes_per_axis: 221,
            bc: BoundaryMode::OneSided,
        })
        .unwrap();
        let metric = unit_metric();
        let phi = ScalarField::from_fn(&grid, |x| x[0].powi(4));
        let r = shrinker_residual(&grid, &metric, &phi, -1.0, ResidualMode::Scalar).unwrap();
        let node = grid.nearest_node(&[1.0, 0.0, 0.0]).unwrap();
        let want = 3.0f64.atan() - 2.0;
        assert!((r.data[node] - want).abs() < 5e-3, "got {}", r.data[node]);
    }

    #[test]
    fn lambda_affinity_of_scalar_residual() {
        let grid = grid1(129);
        let metric = unit_metric();
        let phi = ScalarField::from_fn(&grid, |x| {
            let s = x[0] * x[0] / 0.1;
            0.3 * s * s * (-s).exp()
        });
        let l = [-1.0, 0.5, 2.0];
        let r: Vec<ScalarField> = l
            .iter()
            .map(|&lam| shrinker_residual(&grid, &metric, &phi, lam, ResidualMode::Scalar).unwrap())
            .collect();
        // collinearity: r(λ₂) interpolated from r(λ₁), r(λ₃)
        let w = (l[1] - l[0]) / (l[2] - l[0]);
        for node in 0..grid.num_nodes() {
            let interp = r[0].data[node] + w * (r[2].data[node] - r[0].data[node]);
            assert!((interp - r[1].data[node]).abs() < 1e-10);
        }
    }

    #[test]
    fn scalar_and_vector_residuals_vanish_together() {
        // 20 seeded cases: the two residual modes classify identically
        let tol = 1e-6;
        for seed in 0..20u64 {
            let grid = grid1(65);
            let metric = unit_metric();
            let quadratic = seed % 2 == 0;
            let phi = if quadratic {
                let a = catalog::random_symmetric(1, 0.6, seed);
                quadratic_potential(&grid, &a, 0.1).unwrap()
            } else {
                ScalarField::from_fn(&grid, move |x| {
                    let s = x[0] * x[0] / 0.09;
                    (0.05 + 0.01 * seed as f64) * s * s * (-s).exp()
                })
            };
            let lambda = -0.5 - (seed as f64) * 0.1;
            let s_res = shrinker_residual(&grid, &metric, &phi, lambda, ResidualMode::Scalar)
                .unwrap()
                .max_abs();
            let v_res = shrinker_residual(&grid, &metric, &phi, lambda, ResidualMode::Vector)
                .unwrap()
                .max_abs();
            assert_eq!(
                s_res <= tol,
                v_res <= tol,
                "seed {seed}: scalar {s_res:e} vs vector {v_res:e}"
            );
            assert_eq!(s_res <= tol, quadratic);
        }
    }

    #[test]
    fn family_check_static_quadratic() {
        let grid = grid1(65);
        let metric = unit_metric();
        let phi = quadratic_potential(&grid, &SMat::scalar(1.0), 0.0).unwrap();
        let traj = Trajectory {
            grid: grid.clone(),
            metric,
            times: vec![-2.0, -1.5, -1.0, -0.5],
            phis: vec![phi; 4],
            theta_hat: 0.0,
        };
        let rep = self_similar_family_check(&traj).unwrap();
        assert!(rep.max_vector_residual < 1e-12);
        assert!(rep.spread_max < 1e-10, "spread {}", rep.spread_max);
        let fit = liouville_probe(&grid, &traj.phis[3], rep.max_vector_residual).unwrap();
        assert!(fit.fit_residual < 1e-12);
        assert!(fit.consistent);
    }

    #[test]
    fn family_check_detects_perturbation() {
        let grid = grid1(129);
        let metric = unit_metric();
        let phi = ScalarField::from_fn(&grid, |x| x[0] * x[0] + 1e-2 * x[0].powi(4));
        let traj = Trajectory {
            grid: grid.clone(),
            metric,
            times: vec![-2.0, -1.0, -0.5],
            phis: vec![phi; 3],
            theta_hat: 0.0,
        };
        let rep = self_similar_family_check(&traj).unwrap();
        assert!(
            rep.max_vector_residual > 1e-3,
            "res {}",
            rep.max_vector_residual
        );
        assert!(rep.spread_max > 1e-4, "spread {}", rep.spread_max);
    }

    #[test]
    fn family_check_rejects_positive_times() {
        let grid = grid1(16);
        let metric = unit_metric();
        let phi = ScalarField::zeros(&grid);
        let traj = Trajectory {
            grid: grid.clone(),
            metric,
            times: vec![-1.0, 0.5],
            phis: vec![phi; 2],
            theta_hat: 0.0,
        };
        assert!(self_similar_family_check(&traj).is_err());
    }

    #[test]
    fn liouville_fit_random_quadratic_2d() {
        let grid = Grid::new(GridConfig {
            n: 2,
            r: 1.0,
            r_prime: 1.0,
            nodes_per_axis: 24,
            bc: BoundaryMode::OneSided,
        })
        .unwrap();
        let a = catalog::random_symmetric(2, 1.0, 5);
        let phi = quadratic_potential(&grid, &a, -0.7).unwrap();
        let rep = liouville_probe(&grid, &phi, 0.0).unwrap();
        assert!(rep.fit_residual < 1e-12);
    }
}
