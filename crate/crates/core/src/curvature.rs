//! Pointwise curvature data of a y-invariant Hermitian potential.
//!
//! Conventions (see [`crate::conventions`] for the single authoritative
//! statement): on y-invariant data the holomorphic derivative is half an
//! x-derivative, so the curvature matrix is a quarter of the x-Hessian of the
//! potential, mean-curvature components are half x-derivatives of the angle,
//! and the weighted Laplacian carries a global quarter.

use crate::diff;
use crate::error::{CoreError, Result};
use crate::field::{CovectorField, MatField, ScalarField};
use crate::grid::Grid;
use crate::metric::MetricField;
use crate::quad;
use crate::smat::{generalized_eigenvalues, SMat, MAX_DIM};
use num_complex::Complex64;
use rayon::prelude::*;

/// Everything pointwise derived from `(g, φ)`: curvature, eigenvalues, angle,
/// the complex weight `ζ`, its modulus, and the induced metric.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub f: MatField,
    pub lambdas: Vec<[f64; MAX_DIM]>,
    pub theta: ScalarField,
    pub zeta: Vec<Complex64>,
    pub abs_zeta: ScalarField,
    pub eta: MatField,
}

/// Curvature matrix `F = (1/4) Hess_x(φ)`, symmetric by construction.
pub fn curvature_f(grid: &Grid, phi: &ScalarField) -> Result<MatField> {
    let hess = diff::hessian(grid, phi)?;
    Ok(MatField {
        data: hess.into_iter().map(|m| m.scale(0.25)).collect(),
    })
}

/// Angle, complex weight and modulus from the eigenvalues of `g^{-1} F`.
///
/// The angle is always the arctangent sum (the real-valued lift), never an
/// argument of a determinant, so no branch tracking is required.
pub fn angle_zeta(lambdas: &[f64]) -> (f64, Complex64, f64) {
    let mut theta = 0.0;
    let mut zeta = Complex64::new(1.0, 0.0);
    let mut abs = 1.0;
    for &l in lambdas {
        theta += l.atan();
        zeta *= Complex64::new(1.0, l);
        abs *= (1.0 + l * l).sqrt();
    }
    (theta, zeta, abs)
}

/// Generalized eigenvalues of the pencil `(F, g)` per node, sorted ascending.
pub fn spectrum(grid: &Grid, metric: &MetricField, f: &MatField) -> Result<Vec<[f64; MAX_DIM]>> {
    let res: Vec<Result<[f64; MAX_DIM]>> = (0..grid.num_nodes())
        .into_par_iter()
        .map(|node| {
            generalized_eigenvalues(f.at(node), &metric.at(node))
                .map_err(|_| CoreError::NotSpd { node })
        })
        .collect();
    res.into_iter().collect()
}

/// Induced metric `η = g + F g^{-1} F`; fails if the result loses positive
/// definiteness (numerical breakdown, reported with the node).
pub fn induced_eta(grid: &Grid, metric: &MetricField, f: &MatField) -> Result<MatField> {
    let res: Vec<Result<SMat>> = (0..grid.num_nodes())
        .into_par_iter()
        .map(|node| {
            let g = metric.at(node);
            let ginv = g.inverse().map_err(|_| CoreError::NotSpd { node })?;
            let eta = g.add(&f.at(node).sandwich(&ginv));
            if !eta.is_spd() {
                return Err(CoreError::EtaBreakdown { node });
            }
            Ok(eta)
        })
        .collect();
    Ok(MatField {
        data: res.into_iter().collect::<Result<Vec<_>>>()?,
    })
}

pub fn build_pack(grid: &Grid, metric: &MetricField, phi: &ScalarField) -> Result<CurvaturePack> {
    phi.check_shape(grid, "potential")?;
    phi.check_finite("potential")?;
    let f = curvature_f(grid, phi)?;
    let lambdas = spectrum(grid, metric, &f)?;
    let n = grid.n;
    let mut theta = Vec::with_capacity(grid.num_nodes());
    let mut zeta = Vec::with_capacity(grid.num_nodes());
    let mut abs_zeta = Vec::with_capacity(grid.num_nodes());
    for l in &lambdas {
        let (t, z, a) = angle_zeta(&l[..n]);
        theta.push(t);
        zeta.push(z);
        abs_zeta.push(a);
    }
    let eta = induced_eta(grid, metric, &f)?;
    Ok(CurvaturePack {
        f,
        lambdas,
        theta: ScalarField { data: theta },
        zeta,
        abs_zeta: ScalarField { data: abs_zeta },
        eta,
    })
}

/// Mean curvature one-form: `H_j = (1/2) ∂θ/∂x^j`. Vanishes identically iff
/// the angle is constant.
pub fn mean_curvature_oneform(grid: &Grid, theta: &ScalarField) -> Result<CovectorField> {
    let grads = diff::gradient(grid, theta)?;
    Ok(CovectorField {
        data: grads
            .into_iter()
            .map(|g| {
                let mut h = [0.0; MAX_DIM];
                for a in 0..grid.n {
                    h[a] = 0.5 * g[a];
                }
                h
            })
            .collect(),
    })
}

/// Weighted Laplacian `Δ_η f = (1/4) Σ η^{jk} ∂²f/∂x^j∂x^k`.
pub fn laplacian_eta(grid: &Grid, f: &ScalarField, eta: &MatField) -> Result<ScalarField> {
    let hess = diff::hessian(grid, f)?;
    let data = (0..grid.num_nodes())
        .into_par_iter()
        .map(|node| {
            let etainv = eta.at(node).inverse().expect("eta SPD");
            let mut s = 0.0;
            for j in 0..grid.n {
                for k in 0..grid.n {
                    s += etainv.a[j][k] * hess[node].a[j][k];
                }
            }
            0.25 * s
        })
        .collect();
    Ok(ScalarField { data })
}

/// Residual of the critical-metric equation: `Δ_η θ − ⟨K*(∂̄θ), ∂θ⟩_η`, with
/// the pairing realized as `H^T (η^{-1} F g^{-1}) H` on real data (that matrix
/// is symmetric since `F g^{-1} η = η g^{-1} F`).
pub fn dhym_residual(
    grid: &Grid,
    metric: &MetricField,
    pack: &CurvaturePack,
) -> Result<ScalarField> {
    let lap = laplacian_eta(grid, &pack.theta, &pack.eta)?;
    let h = mean_curvature_oneform(grid, &pack.theta)?;
    let data = (0..grid.num_nodes())
        .map(|node| {
            let etainv = pack.eta.at(node).inverse().expect("eta SPD");
            let ginv = metric.at(node).inverse().expect("g SPD");
            let fm = pack.f.at(node);
            // m = η^{-1} F g^{-1}
            let t = etainv.mul_raw(fm);
            let mut q = 0.0;
            let hv = h.at(node);
            for i in 0..grid.n {
                for j in 0..grid.n {
                    let mut mij = 0.0;
                    for k in 0..grid.n {
                        mij += t[i][k] * ginv.a[k][j];
                    }
                    q += hv[i] * mij * hv[j];
                }
            }
            lap.data[node] - q
        })
        .collect();
    Ok(ScalarField { data })
}

/// Total volume `Vol_euclid(B(r')) · ∫ |ζ| det(g) dx` of the weighted measure
/// over the chart.
pub fn volume_functional(grid: &Grid, metric: &MetricField, abs_zeta: &ScalarField) -> Result<f64> {
    let detg = ScalarField {
        data: (0..grid.num_nodes()).map(|i| metric.at(i).det()).collect(),
    };
    let base = quad::integrate_x(grid, abs_zeta, Some(&detg))?;
    Ok(quad::ball_volume(grid.n, grid.r_prime) * base)
}

/// Snapshot-formatted dump of every pack field, one file per field:
/// curvature and induced-metric components, eigenvalues, angle and weight
/// modulus.
pub fn dump_pack(grid: &Grid, pack: &CurvaturePack, time: f64) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut push = |name: String, field: &ScalarField| -> Result<()> {
        out.push((name, crate::snapshot::write_snapshot(grid, field, time)?));
        Ok(())
    };
    push("theta.snap".into(), &pack.theta)?;
    push("abs_zeta.snap".into(), &pack.abs_zeta)?;
    for i in 0..grid.n {
        for j in i..grid.n {
            push(format!("curvature_{i}{j}.snap"), &pack.f.component(i, j))?;
            push(format!("eta_{i}{j}.snap"), &pack.eta.component(i, j))?;
        }
        let lam = ScalarField {
            data: pack.lambdas.iter().map(|l| l[i]).collect(),
        };
        push(format!("lambda_{i}.snap"), &lam)?;
    }
    Ok(out)
}

/// Measure-weighted mean of the angle, the natural default for the phase
/// target of a flow.
pub fn average_angle(grid: &Grid, metric: &MetricField, pack: &CurvaturePack) -> Result<f64> {
    let weight = ScalarField {
        data: (0..grid.num_nodes())
            .map(|i| pack.abs_zeta.data[i] * metric.at(i).det())
            .collect(),
    };
    let num = quad::integrate_x(grid, &pack.theta, Some(&weight))?;
    let den = quad::integrate_x(grid, &weight, None)?;
    Ok(num / den)
}
