//! Dense symmetric matrices of dimension 1..=3, stored inline.
//!
//! Everything the pointwise geometry needs (inverses, determinants, Cholesky
//! factors, symmetric and generalized eigenvalues) is closed-form at these
//! sizes, which keeps the per-node kernels allocation-free and bit-for-bit
//! deterministic across thread counts.

use crate::error::{CoreError, Result};

pub const MAX_DIM: usize = 3;

/// Symmetric `dim x dim` matrix with `dim <= 3`. Entries outside the active
/// block are kept at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMat {
    pub dim: usize,
    pub a: [[f64; MAX_DIM]; MAX_DIM],
}

impl SMat {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        SMat {
            dim,
            a: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SMat::zeros(dim);
        for i in 0..dim {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn diag(dim: usize, d: &[f64]) -> Self {
        let mut m = SMat::zeros(dim);
        for i in 0..dim {
            m.a[i][i] = d[i];
        }
        m
    }

    pub fn scalar(v: f64) -> Self {
        let mut m = SMat::zeros(1);
        m.a[0][0] = v;
        m
    }

    /// Builds from a row-major slice of length `dim*dim`, rejecting asymmetry
    /// beyond `tol`.
    pub fn from_rows(dim: usize, rows: &[f64], tol: f64) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(CoreError::ShapeMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                rows.len()
            )));
        }
        let mut m = SMat::zeros(dim);
        let mut asym: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let v = rows[i * dim + j];
                let w = rows[j * dim + i];
                asym = asym.max((v - w).abs());
                m.a[i][j] = 0.5 * (v + w);
            }
        }
        if asym > tol {
            return Err(CoreError::NotSymmetric(asym));
        }
        Ok(m)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
        self.a[j][i] = v;
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] *= s;
            }
        }
        m
    }

    pub fn add(&self, o: &SMat) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] += o.a[i][j];
            }
        }
        m
    }

    pub fn sub(&self, o: &SMat) -> Self {
        self.add(&o.scale(-1.0))
    }

    /// General (not necessarily symmetric) product, returned as raw rows.
    pub fn mul_raw(&self, o: &SMat) -> [[f64; MAX_DIM]; MAX_DIM] {
        let n = self.dim;
        let mut out = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.a[i][k] * o.a[k][j];
                }
                out[i][j] = s;
            }
        }
        out
    }

    /// `self * o * self` for symmetric `o`; the result is symmetric.
    pub fn sandwich(&self, o: &SMat) -> SMat {
        let n = self.dim;
        let so = self.mul_raw(o);
        let mut out = SMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += so[i][k] * self.a[k][j];
                }
                out.a[i][j] = s;
            }
        }
        // symmetrize away the last-bit noise
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (out.a[i][j] + out.a[j][i]);
                out.a[i][j] = v;
                out.a[j][i] = v;
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64; MAX_DIM]) -> [f64; MAX_DIM] {
        let n = self.dim;
        let mut out = [0.0; MAX_DIM];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.a[i][j] * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn quad_form(&self, v: &[f64; MAX_DIM]) -> f64 {
        let mv = self.matvec(v);
        let mut s = 0.0;
        for i in 0..self.dim {
            s += v[i] * mv[i];
        }
        s
    }

    pub fn det(&self) -> f64 {
        let a = &self.a;
        match self.dim {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            3 => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
            _ => unreachable!(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    /// Inverse by adjugate. Errors on (near-)singular input.
    pub fn inverse(&self) -> Result<SMat> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(CoreError::NotSpd { node: usize::MAX });
        }
        let a = &self.a;
        let mut out = SMat::zeros(self.dim);
        match self.dim {
            1 => out.a[0][0] = 1.0 / d,
            2 => {
                out.a[0][0] = a[1][1] / d;
                out.a[1][1] = a[0][0] / d;
                out.a[0][1] = -a[0][1] / d;
                out.a[1][0] = -a[1][0] / d;
            }
            3 => {
                out.a[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / d;
                out.a[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / d;
                out.a[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / d;
                let v01 = -(a[0][1] * a[2][2] - a[0][2] * a[2][1]) / d;
                let v02 = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / d;
                let v12 = -(a[0][0] * a[1][2] - a[0][2] * a[1][0]) / d;
                out.set_sym(0, 1, v01);
                out.set_sym(0, 2, v02);
                out.set_sym(1, 2, v12);
            }
            _ => unreachable!(),
        }
        Ok(out)
    }

    /// Lower Cholesky factor; fails unless the matrix is SPD.
    pub fn cholesky(&self) -> Result<[[f64; MAX_DIM]; MAX_DIM]> {
        let n = self.dim;
        let mut l = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(CoreError::NotSpd { node: usize::MAX });
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        Ok(l)
    }

    pub fn is_spd(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// Eigenvalues sorted ascending. Closed form for dim 1 and 2, the
    /// trigonometric method for dim 3.
    pub fn eigenvalues(&self) -> [f64; MAX_DIM] {
        let a = &self.a;
        match self.dim {
            1 => [a[0][0], 0.0, 0.0],
            2 => {
                let tr = a[0][0] + a[1][1];
                let d = ((a[0][0] - a[1][1]).powi(2) + 4.0 * a[0][1] * a[0][1]).sqrt();
                [0.5 * (tr - d), 0.5 * (tr + d), 0.0]
            }
            3 => {
                let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
                if p1 == 0.0 {
                    let mut d = [a[0][0], a[1][1], a[2][2]];
                    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    return d;
                }
                let q = self.trace() / 3.0;
                let p2 = (a[0][0] - q).powi(2)
                    + (a[1][1] - q).powi(2)
                    + (a[2][2] - q).powi(2)
                    + 2.0 * p1;
                let p = (p2 / 6.0).sqrt();
                let mut b = *self;
                for i in 0..3 {
                    b.a[i][i] -= q;
                }
                let r = (b.det() / (p * p * p) / 2.0).clamp(-1.0, 1.0);
                let phi = r.acos() / 3.0;
                let e1 = q + 2.0 * p * phi.cos();
                let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3 * 2.0).cos();
                let e2 = 3.0 * q - e1 - e3;
                let mut d = [e1, e2, e3];
                d.sort_by(|x, y| x.partial_cmp(y).unwrap());
                d
            }
            _ => unreachable!(),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        let ev = self.eigenvalues();
        (0..self.dim).map(|i| ev[i].abs()).fold(0.0, f64::max)
    }
}

/// Generalized symmetric eigenvalues of the pencil `(f, g)` with `g` SPD,
/// sorted ascending: reduce by a Cholesky factor of `g` so the problem
/// becomes a plain symmetric one.
pub fn generalized_eigenvalues(f: &SMat, g: &SMat) -> Result<[f64; MAX_DIM]> {
    debug_assert_eq!(f.dim, g.dim);
    let n = f.dim;
    if n == 1 {
        if g.a[0][0] <= 0.0 {
            return Err(CoreError::NotSpd { node: usize::MAX });
        }
        return Ok([f.a[0][0] / g.a[0][0], 0.0, 0.0]);
    }
    let l = g.cholesky()?;
    // linv = L^{-1} by forward substitution into the identity
    let mut linv = [[0.0; MAX_DIM]; MAX_DIM];
    for c in 0..n {
        for i in 0..n {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i][k] * linv[k][c];
            }
            linv[i][c] = s / l[i][i];
        }
    }
    // m = linv * f * linv^T, symmetric
    let mut m = SMat::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for p in 0..n {
                for q in 0..n {
                    s += linv[i][p] * f.a[p][q] * linv[j][q];
                }
            }
            m.set_sym(i, j, s);
        }
    }
    Ok(m.eigenvalues())
}
