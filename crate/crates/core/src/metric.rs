//! The base metric: a y-invariant real symmetric positive-definite matrix per
//! x-node, and its Christoffel symbols.

use crate::diff;
use crate::error::{CoreError, Result};
use crate::field::{MatField, ScalarField};
use crate::grid::Grid;
use crate::smat::{SMat, MAX_DIM};

#[derive(Debug, Clone)]
pub enum MetricData {
    Constant(SMat),
    Varying(Vec<SMat>),
}

#[derive(Debug, Clone)]
pub struct MetricField {
    pub data: MetricData,
    /// True when the metric is x-independent.
    pub constant: bool,
}

impl MetricField {
    pub fn constant(m: SMat) -> Self {
        MetricField {
            data: MetricData::Constant(m),
            constant: true,
        }
    }

    pub fn varying(mats: Vec<SMat>) -> Self {
        MetricField {
            data: MetricData::Varying(mats),
            constant: false,
        }
    }

    #[inline]
    pub fn at(&self, node: usize) -> SMat {
        match &self.data {
            MetricData::Constant(m) => *m,
            MetricData::Varying(v) => v[node],
        }
    }

    pub fn dim(&self) -> usize {
        match &self.data {
            MetricData::Constant(m) => m.dim,
            MetricData::Varying(v) => v[0].dim,
        }
    }

    /// Symmetry and positive definiteness at every node.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        match &self.data {
            MetricData::Constant(m) => {
                if m.dim != grid.n {
                    return Err(CoreError::ShapeMismatch("metric dim != grid dim".into()));
                }
                if !m.is_spd() {
                    return Err(CoreError::NotSpd { node: 0 });
                }
            }
            MetricData::Varying(v) => {
                if v.len() != grid.num_nodes() {
                    return Err(CoreError::ShapeMismatch("metric field size".into()));
                }
                for (node, m) in v.iter().enumerate() {
                    if m.dim != grid.n {
                        return Err(CoreError::ShapeMismatch("metric dim != grid dim".into()));
                    }
                    if !m.is_spd() {
                        return Err(CoreError::NotSpd { node });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn scale(&self, k: f64) -> MetricField {
        match &self.data {
            MetricData::Constant(m) => MetricField {
                data: MetricData::Constant(m.scale(k)),
                constant: self.constant,
            },
            MetricData::Varying(v) => MetricField {
                data: MetricData::Varying(v.iter().map(|m| m.scale(k)).collect()),
                constant: self.constant,
            },
        }
    }

    pub fn inverse_field(&self, grid: &Grid) -> Result<MatField> {
        match &self.data {
            MetricData::Constant(m) => Ok(MatField::constant(grid, m.inverse()?)),
            MetricData::Varying(v) => {
                let mut out = Vec::with_capacity(v.len());
                for (node, m) in v.iter().enumerate() {
                    out.push(m.inverse().map_err(|_| CoreError::NotSpd { node })?);
                }
                Ok(MatField { data: out })
            }
        }
    }

    /// Square root of the minimum over the box of the lowest eigenvalue.
    pub fn lambda_min_sqrt(&self, grid: &Grid) -> f64 {
        match &self.data {
            MetricData::Constant(m) => m.min_eigenvalue().sqrt(),
            MetricData::Varying(v) => {
                let _ = grid;
                v.iter()
                    .map(|m| m.min_eigenvalue())
                    .fold(f64::INFINITY, f64::min)
                    .sqrt()
            }
        }
    }
}

/// Christoffel symbols `Γ^k_{ij} = g^{kl} (1/2 ∂g_{jl}/∂x^i)`, one symmetric
/// (in `i,j`) matrix per upper index `k` per node. `None` means identically
/// zero (constant metric).
#[derive(Debug, Clone)]
pub struct Christoffels {
    pub data: Option<Vec<[SMat; MAX_DIM]>>,
    dim: usize,
}

impl Christoffels {
    pub fn zero(dim: usize) -> Self {
        Christoffels { data: None, dim }
    }

    #[inline]
    pub fn at(&self, node: usize, k: usize) -> SMat {
        match &self.data {
            None => SMat::zeros(self.dim),
            Some(v) => v[node][k],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.is_none()
    }
}

pub fn christoffel(grid: &Grid, metric: &MetricField) -> Result<Christoffels> {
    metric.validate(grid)?;
    let n = grid.n;
    if metric.constant {
        return Ok(Christoffels::zero(n));
    }
    // half x-derivatives of every metric component
    let mut dg_comp: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n); // [i][jl-pair] -> field
    let mut pair_pos = [[0usize; MAX_DIM]; MAX_DIM];
    {
        let mut cnt = 0;
        for j in 0..n {
            for l in j..n {
                pair_pos[j][l] = cnt;
                pair_pos[l][j] = cnt;
                cnt += 1;
            }
        }
    }
    for i in 0..n {
        let mut per_pair = Vec::new();
        for j in 0..n {
            for l in j..n {
                let comp = ScalarField {
                    data: (0..grid.num_nodes())
                        .map(|p| metric.at(p).a[j][l])
                        .collect(),
                };
                let d = diff::d1(grid, &comp, i)?;
                per_pair.push(d.data.iter().map(|v| 0.5 * v).collect::<Vec<f64>>());
            }
        }
        dg_comp.push(per_pair);
    }
    let mut out = Vec::with_capacity(grid.num_nodes());
    for node in 0..grid.num_nodes() {
        let ginv = metric
            .at(node)
            .inverse()
            .map_err(|_| CoreError::NotSpd { node })?;
        let mut gam = [SMat::zeros(n); MAX_DIM];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    // Γ^k_{ij} = Σ_l g^{kl} ∂_i g_{jl}; symmetric in (i,j)
                    // because the metric derives from a potential.
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv.a[k][l] * dg_comp[i][pair_pos[j][l]][node];
                    }
                    gam[k].set_sym(i, j, s);
                }
            }
        }
        out.push(gam);
    }
    Ok(Christoffels {
        data: Some(out),
        dim: n,
    })
}
