//! Finite-difference kernels on the grid: second-order central stencils in
//! the interior, second-order one-sided stencils at non-periodic faces.
//!
//! Central first and second differences are exact on quadratics; the
//! one-sided variants are exact on cubics, so quadratic potentials produce
//! bit-clean constant curvature everywhere.

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::{BoundaryMode, Grid};
use crate::smat::{SMat, MAX_DIM};
use rayon::prelude::*;

#[inline]
fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Value of the field at multi-index `mi` shifted by `off` along `axis`,
/// with periodic wrapping. Caller guarantees the shift stays in range for
/// one-sided grids.
#[inline]
fn shifted(grid: &Grid, f: &[f64], mi: &[usize; MAX_DIM], axis: usize, off: isize) -> f64 {
    let n = grid.nodes_per_axis;
    let mut m = *mi;
    m[axis] = match grid.bc {
        BoundaryMode::Periodic => wrap(mi[axis] as isize + off, n),
        BoundaryMode::OneSided => (mi[axis] as isize + off) as usize,
    };
    f[grid.idx(&m)]
}

fn check_axis(grid: &Grid, axis: usize) -> Result<()> {
    if axis >= grid.n {
        return Err(CoreError::AxisOutOfRange { axis, n: grid.n });
    }
    Ok(())
}

/// First derivative along `axis`.
pub fn d1(grid: &Grid, f: &ScalarField, axis: usize) -> Result<ScalarField> {
    check_axis(grid, axis)?;
    f.check_shape(grid, "d1")?;
    let n = grid.nodes_per_axis;
    let h = grid.h;
    let data = (0..grid.num_nodes())
        .into_par_iter()
        .map(|idx| {
            let mi = grid.multi(idx);
            let i = mi[axis];
            let s = |off: isize| shifted(grid, &f.data, &mi, axis, off);
            if grid.bc == BoundaryMode::Periodic || (i >= 1 && i + 1 < n) {
                (s(1) - s(-1)) / (2.0 * h)
            } else if i == 0 {
                (-3.0 * s(0) + 4.0 * s(1) - s(2)) / (2.0 * h)
            } else {
                (3.0 * s(0) - 4.0 * s(-1) + s(-2)) / (2.0 * h)
            }
        })
        .collect();
    Ok(ScalarField { data })
}

/// Second derivative along a single axis.
pub fn d2_axis(grid: &Grid, f: &ScalarField, axis: usize) -> Result<ScalarField> {
    check_axis(grid, axis)?;
    f.check_shape(grid, "d2")?;
    let n = grid.nodes_per_axis;
    let h2 = grid.h * grid.h;
    let data = (0..grid.num_nodes())
        .into_par_iter()
        .map(|idx| {
            let mi = grid.multi(idx);
            let i = mi[axis];
            let s = |off: isize| shifted(grid, &f.data, &mi, axis, off);
            if grid.bc == BoundaryMode::Periodic || (i >= 1 && i + 1 < n) {
                (s(1) - 2.0 * s(0) + s(-1)) / h2
            } else if i == 0 {
                (2.0 * s(0) - 5.0 * s(1) + 4.0 * s(2) - s(3)) / h2
            } else {
                (2.0 * s(0) - 5.0 * s(-1) + 4.0 * s(-2) - s(-3)) / h2
            }
        })
        .collect();
    Ok(ScalarField { data })
}

/// Mixed or repeated second derivative.
pub fn d2(grid: &Grid, f: &ScalarField, a: usize, b: usize) -> Result<ScalarField> {
    if a == b {
        d2_axis(grid, f, a)
    } else {
        let da = d1(grid, f, a)?;
        d1(grid, &da, b)
    }
}

/// Fourth-order-accurate first derivative along `axis` in the deep interior,
/// falling back to the second-order stencils within two cells of a face.
/// Used where an integral evaluation needs extra accuracy on smooth data.
pub fn d1_fourth(grid: &Grid, f: &ScalarField, axis: usize) -> Result<ScalarField> {
    check_axis(grid, axis)?;
    f.check_shape(grid, "d1_fourth")?;
    let n = grid.nodes_per_axis;
    let h = grid.h;
    let fallback = d1(grid, f, axis)?;
    let data = (0..grid.num_nodes())
        .into_par_iter()
        .map(|idx| {
            let mi = grid.multi(idx);
            let i = mi[axis];
            let s = |off: isize| shifted(grid, &f.data, &mi, axis, off);
            if grid.bc == BoundaryMode::Periodic || (i >= 2 && i + 2 < n) {
                (s(-2) - 8.0 * s(-1) + 8.0 * s(1) - s(2)) / (12.0 * h)
            } else {
                fallback.data[idx]
            }
        })
        .collect();
    Ok(ScalarField { data })
}

/// Fourth-order-accurate second derivative (see [`d1_fourth`] for the
/// fallback policy); mixed derivatives compose two fourth-order first
/// differences.
pub fn d2_fourth(grid: &Grid, f: &ScalarField, a: usize, b: usize) -> Result<ScalarField> {
    if a != b {
        let da = d1_fourth(grid, f, a)?;
        return d1_fourth(grid, &da, b);
    }
    check_axis(grid, a)?;
    f.check_shape(grid, "d2_fourth")?;
    let n = grid.nodes_per_axis;
    let h2 = grid.h * grid.h;
    let fallback = d2_axis(grid, f, a)?;
    let data = (0..grid.num_nodes())
        .into_par_iter()
        .map(|idx| {
            let mi = grid.multi(idx);
            let i = mi[a];
            let s = |off: isize| shifted(grid, &f.data, &mi, a, off);
            if grid.bc == BoundaryMode::Periodic || (i >= 2 && i + 2 < n) {
                (-s(-2) + 16.0 * s(-1) - 30.0 * s(0) + 16.0 * s(1) - s(2)) / (12.0 * h2)
            } else {
                fallback.data[idx]
            }
        })
        .collect();
    Ok(ScalarField { data })
}

/// Third derivative along a single axis (five-point stencils, second order).
pub fn d3_axis(grid: &Grid, f: &ScalarField, axis: usize) -> Result<ScalarField> {
    check_axis(grid, axis)?;
    f.check_shape(grid, "d3")?;
    let n = grid.nodes_per_axis;
    let h3 = grid.h * grid.h * grid.h;
    let data = (0..grid.num_nodes())
        .into_par_iter()
        .map(|idx| {
            let mi = grid.multi(idx);
            let i = mi[axis];
            let s = |off: isize| shifted(grid, &f.data, &mi, axis, off);
            if grid.bc == BoundaryMode::Periodic || (i >= 2 && i + 2 < n) {
                (s(2) - 2.0 * s(1) + 2.0 * s(-1) - s(-2)) / (2.0 * h3)
            } else if i == 0 {
                (-5.0 * s(0) + 18.0 * s(1) - 24.0 * s(2) + 14.0 * s(3) - 3.0 * s(4)) / (2.0 * h3)
            } else if i == 1 {
                (-3.0 * s(-1) + 10.0 * s(0) - 12.0 * s(1) + 6.0 * s(2) - s(3)) / (2.0 * h3)
            } else if i == n - 1 {
                (5.0 * s(0) - 18.0 * s(-1) + 24.0 * s(-2) - 14.0 * s(-3) + 3.0 * s(-4)) / (2.0 * h3)
            } else {
                (3.0 * s(1) - 10.0 * s(0) + 12.0 * s(-1) - 6.0 * s(-2) + s(-3)) / (2.0 * h3)
            }
        })
        .collect();
    Ok(ScalarField { data })
}

/// Third derivative for an arbitrary multi-index of axes.
pub fn d3(grid: &Grid, f: &ScalarField, axes: [usize; 3]) -> Result<ScalarField> {
    let mut ax = axes;
    ax.sort_unstable();
    if ax[0] == ax[1] && ax[1] == ax[2] {
        d3_axis(grid, f, ax[0])
    } else if ax[0] == ax[1] {
        let dd = d2_axis(grid, f, ax[0])?;
        d1(grid, &dd, ax[2])
    } else if ax[1] == ax[2] {
        let dd = d2_axis(grid, f, ax[1])?;
        d1(grid, &dd, ax[0])
    } else {
        let da = d1(grid, f, ax[0])?;
        let dab = d1(grid, &da, ax[1])?;
        d1(grid, &dab, ax[2])
    }
}

/// Spec-facing entry point: derivative of `order` 1..=3 along `axes`
/// (of which the first `order` entries are used).
pub fn diff(grid: &Grid, f: &ScalarField, order: u32, axes: &[usize]) -> Result<ScalarField> {
    match order {
        1 => d1(grid, f, axes[0]),
        2 => d2(grid, f, axes[0], axes[1]),
        3 => d3(grid, f, [axes[0], axes[1], axes[2]]),
        o => Err(CoreError::UnsupportedOrder(o)),
    }
}

/// Full x-Hessian of a scalar field, one symmetric matrix per node.
pub fn hessian(grid: &Grid, f: &ScalarField) -> Result<Vec<SMat>> {
    let n = grid.n;
    let mut comps: Vec<Vec<f64>> = Vec::new();
    let mut pos = [[0usize; MAX_DIM]; MAX_DIM];
    for a in 0..n {
        for b in a..n {
            pos[a][b] = comps.len();
            comps.push(d2(grid, f, a, b)?.data);
        }
    }
    let out = (0..grid.num_nodes())
        .into_par_iter()
        .map(|idx| {
            let mut m = SMat::zeros(n);
            for a in 0..n {
                for b in a..n {
                    m.set_sym(a, b, comps[pos[a][b]][idx]);
                }
            }
            m
        })
        .collect();
    Ok(out)
}

/// Gradient of a scalar field as per-node arrays of plain x-derivatives.
pub fn gradient(grid: &Grid, f: &ScalarField) -> Result<Vec<[f64; MAX_DIM]>> {
    let mut comps: Vec<Vec<f64>> = Vec::new();
    for a in 0..grid.n {
        comps.push(d1(grid, f, a)?.data);
    }
    let out = (0..grid.num_nodes())
        .map(|idx| {
            let mut g = [0.0; MAX_DIM];
            for a in 0..grid.n {
                g[a] = comps[a][idx];
            }
            g
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridConfig;

    fn grid1(n_nodes: usize, bc: BoundaryMode) -> Grid {
        Grid::new(GridConfig {
            n: 1,
            r: 1.0,
            r_prime: 1.0,
            nodes_per_axis: n_nodes,
            bc,
        })
        .unwrap()
    }

    #[test]
    fn d2_exact_on_quadratics() {
        let g = grid1(33, BoundaryMode::OneSided);
        let f = ScalarField::from_fn(&g, |x| x[0] * x[0]);
        let d = d2_axis(&g, &f, 0).unwrap();
        for v in &d.data {
            assert!((v - 2.0).abs() < 1e-12, "got {v}");
        }
    }

    #[test]
    fn d2_quartic_interior_accuracy() {
        // second derivative of x^4 at x = 1 is 12; h = 0.01
        let g = Grid::new(GridConfig {
            n: 1,
            r: 1.1,
            r_prime: 1.0,
            nodes_per_axis: 221,
            bc: BoundaryMode::OneSided,
        })
        .unwrap();
        assert!((g.h - 0.01).abs() < 1e-12);
        let f = ScalarField::from_fn(&g, |x| x[0].powi(4));
        let d = d2_axis(&g, &f, 0).unwrap();
        let node = g.nearest_node(&[1.0, 0.0, 0.0]).unwrap();
        assert!((g.coords(node)[0] - 1.0).abs() < 1e-12);
        assert!((d.data[node] - 12.0).abs() < 1e-3);
    }

    #[test]
    fn d3_quartic() {
        // third derivative of x^4 at x = 1 is 24 (five-point stencil is exact
        // on quartics)
        let g = Grid::new(GridConfig {
            n: 1,
            r: 1.1,
            r_prime: 1.0,
            nodes_per_axis: 221,
            bc: BoundaryMode::OneSided,
        })
        .unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].powi(4));
        let d = d3_axis(&g, &f, 0).unwrap();
        let node = g.nearest_node(&[1.0, 0.0, 0.0]).unwrap();
        assert!((d.data[node] - 24.0).abs() < 1e-2);
        // also an interior point
        let node = g.nearest_node(&[0.5, 0.0, 0.0]).unwrap();
        assert!((d.data[node] - 12.0).abs() < 1e-2);
    }

    #[test]
    fn mixed_d2_exact_on_bilinear() {
        let g = Grid::new(GridConfig {
            n: 2,
            r: 1.0,
            r_prime: 1.0,
            nodes_per_axis: 17,
            bc: BoundaryMode::OneSided,
        })
        .unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0] * x[1]);
        let d = d2(&g, &f, 0, 1).unwrap();
        for v in &d.data {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_d1_on_sine() {
        let g = grid1(128, BoundaryMode::Periodic);
        let k = std::f64::consts::PI; // period 2 = 2r
        let f = ScalarField::from_fn(&g, |x| (k * x[0]).sin());
        let d = d1(&g, &f, 0).unwrap();
        let mut max_err = 0.0f64;
        for idx in 0..g.num_nodes() {
            let x = g.coords(idx)[0];
            max_err = max_err.max((d.data[idx] - k * (k * x).cos()).abs());
        }
        assert!(max_err < 2e-3, "max_err {max_err}");
    }

    #[test]
    fn axis_out_of_range() {
        let g = grid1(16, BoundaryMode::OneSided);
        let f = ScalarField::zeros(&g);
        assert!(d1(&g, &f, 1).is_err());
        assert!(diff(&g, &f, 4, &[0, 0, 0, 0]).is_err());
    }
}
