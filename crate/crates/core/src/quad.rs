//! Deterministic quadrature: trapezoid (one-sided) or rectangle (periodic)
//! over the base box, with fixed-order pairwise reduction so sums do not
//! depend on thread count, plus closed-form fiber-ball volumes.

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::{BoundaryMode, Grid};
use crate::smat::SMat;

/// Fixed-order pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        let mut s = 0.0;
        for x in v {
            s += x;
        }
        s
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

/// Quadrature weight of a node (product of per-axis weights times `h^n`).
pub fn node_weight(grid: &Grid, idx: usize) -> f64 {
    let mut w = grid.h.powi(grid.n as i32);
    if grid.bc == BoundaryMode::OneSided {
        let mi = grid.multi(idx);
        for a in 0..grid.n {
            if mi[a] == 0 || mi[a] + 1 == grid.nodes_per_axis {
                w *= 0.5;
            }
        }
    }
    w
}

/// `∫ field · weight_field dx` over the base box. Pass `None` to use unit
/// weights.
pub fn integrate_x(grid: &Grid, field: &ScalarField, weight: Option<&ScalarField>) -> Result<f64> {
    field.check_shape(grid, "integrate_x")?;
    if let Some(w) = weight {
        w.check_shape(grid, "integrate_x weight")?;
    }
    let terms: Vec<f64> = (0..grid.num_nodes())
        .map(|i| {
            let w = weight.map_or(1.0, |w| w.data[i]);
            field.data[i] * w * node_weight(grid, i)
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Euclidean volume of the n-ball of radius `r`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    match n {
        1 => 2.0 * r,
        2 => std::f64::consts::PI * r * r,
        3 => 4.0 / 3.0 * std::f64::consts::PI * r * r * r,
        _ => unreachable!(),
    }
}

/// Riemannian volume of the fiber ball over the point where the metric is
/// `g`: `sqrt(2^n det g) * Vol_euclid(B(r'))`, since the fiber directions
/// carry twice the base coefficients.
pub fn fiber_volume(g_at_x0: &SMat, r_prime: f64) -> Result<f64> {
    if !g_at_x0.is_spd() {
        return Err(CoreError::NotSpd { node: usize::MAX });
    }
    let n = g_at_x0.dim;
    Ok((2.0f64.powi(n as i32) * g_at_x0.det()).sqrt() * ball_volume(n, r_prime))
}
