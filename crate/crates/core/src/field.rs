//! Per-node data containers: scalars, small matrices, real covectors and
//! complex sections, all stored row-major in node order.

use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::smat::{SMat, MAX_DIM};
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            data: vec![0.0; grid.num_nodes()],
        }
    }

    pub fn from_fn<F: Fn(&[f64; MAX_DIM]) -> f64 + Sync + Send>(grid: &Grid, f: F) -> Self {
        let data = (0..grid.num_nodes())
            .into_par_iter()
            .map(|i| f(&grid.coords(i)))
            .collect();
        ScalarField { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn check_shape(&self, grid: &Grid, what: &str) -> Result<()> {
        if self.data.len() != grid.num_nodes() {
            return Err(CoreError::ShapeMismatch(format!(
                "{what}: field has {} nodes, grid has {}",
                self.data.len(),
                grid.num_nodes()
            )));
        }
        Ok(())
    }

    pub fn check_finite(&self, context: &'static str) -> Result<()> {
        for (node, v) in self.data.iter().enumerate() {
            if !v.is_finite() {
                return Err(CoreError::NonFinite { context, node });
            }
        }
        Ok(())
    }

    pub fn map<F: Fn(f64) -> f64 + Sync + Send>(&self, f: F) -> Self {
        ScalarField {
            data: self.data.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn add(&self, o: &ScalarField) -> Self {
        ScalarField {
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &ScalarField) -> Self {
        ScalarField {
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Seam check for periodic grids: the sampled closure must agree at
    /// `x = -r` and `x = +r` within `tol`. `f` is the sampling closure.
    pub fn check_periodic_seam<F: Fn(&[f64; MAX_DIM]) -> f64>(
        grid: &Grid,
        f: &F,
        tol: f64,
    ) -> Result<()> {
        for a in 0..grid.n {
            let mut lo = [0.0; MAX_DIM];
            let mut hi = [0.0; MAX_DIM];
            lo[a] = -grid.r;
            hi[a] = grid.r;
            let d = (f(&lo) - f(&hi)).abs();
            if d > tol {
                return Err(CoreError::Invalid(format!(
                    "field not 2r-periodic along axis {a}: seam mismatch {d:.3e}"
                )));
            }
        }
        Ok(())
    }
}

/// One symmetric matrix per node.
#[derive(Debug, Clone)]
pub struct MatField {
    pub data: Vec<SMat>,
}

impl MatField {
    pub fn constant(grid: &Grid, m: SMat) -> Self {
        MatField {
            data: vec![m; grid.num_nodes()],
        }
    }

    pub fn from_fn<F: Fn(usize) -> SMat + Sync + Send>(grid: &Grid, f: F) -> Self {
        MatField {
            data: (0..grid.num_nodes()).into_par_iter().map(f).collect(),
        }
    }

    #[inline]
    pub fn at(&self, node: usize) -> &SMat {
        &self.data[node]
    }

    pub fn component(&self, i: usize, j: usize) -> ScalarField {
        ScalarField {
            data: self.data.iter().map(|m| m.a[i][j]).collect(),
        }
    }
}

/// Real covector per node (mean curvature components, gradients).
#[derive(Debug, Clone)]
pub struct CovectorField {
    pub data: Vec<[f64; MAX_DIM]>,
}

impl CovectorField {
    pub fn zeros(grid: &Grid) -> Self {
        CovectorField {
            data: vec![[0.0; MAX_DIM]; grid.num_nodes()],
        }
    }

    #[inline]
    pub fn at(&self, node: usize) -> &[f64; MAX_DIM] {
        &self.data[node]
    }
}

pub type CVec = [Complex64; MAX_DIM];

/// Section of `T^{1,0} ⊕ Λ^{0,1}` sampled per node: a holomorphic vector part
/// and an anti-holomorphic form part.
#[derive(Debug, Clone)]
pub struct SectionField {
    pub vec_part: Vec<CVec>,
    pub form_part: Vec<CVec>,
}

impl SectionField {
    pub fn zeros(grid: &Grid) -> Self {
        let z = [Complex64::new(0.0, 0.0); MAX_DIM];
        SectionField {
            vec_part: vec![z; grid.num_nodes()],
            form_part: vec![z; grid.num_nodes()],
        }
    }

    pub fn len(&self) -> usize {
        self.vec_part.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vec_part.is_empty()
    }

    pub fn add(&self, o: &SectionField) -> SectionField {
        let mut out = self.clone();
        for i in 0..out.vec_part.len() {
            for a in 0..MAX_DIM {
                out.vec_part[i][a] += o.vec_part[i][a];
                out.form_part[i][a] += o.form_part[i][a];
            }
        }
        out
    }

    pub fn sub(&self, o: &SectionField) -> SectionField {
        let mut out = self.clone();
        for i in 0..out.vec_part.len() {
            for a in 0..MAX_DIM {
                out.vec_part[i][a] -= o.vec_part[i][a];
                out.form_part[i][a] -= o.form_part[i][a];
            }
        }
        out
    }

    pub fn scale_re(&self, s: f64) -> SectionField {
        let mut out = self.clone();
        for i in 0..out.vec_part.len() {
            for a in 0..MAX_DIM {
                out.vec_part[i][a] *= s;
                out.form_part[i][a] *= s;
            }
        }
        out
    }

    pub fn max_component_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.vec_part.len() {
            for a in 0..MAX_DIM {
                m = m.max(self.vec_part[i][a].norm());
                m = m.max(self.form_part[i][a].norm());
            }
        }
        m
    }
}
