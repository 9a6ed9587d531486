//! The discretized base chart: a box `[-r, r]^n` of x-coordinates.
//!
//! Every field in this crate is invariant along the fiber directions, so only
//! the base is ever discretized; fiber integrals enter as the closed-form
//! volume of the fiber ball (see [`crate::quad`]).

use crate::error::{CoreError, Result};
use crate::smat::MAX_DIM;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Wrapping stencils and rectangle quadrature; fields must be 2r-periodic.
    Periodic,
    /// One-sided second-order stencils at the box faces; trapezoid quadrature.
    OneSided,
}

impl BoundaryMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(BoundaryMode::Periodic),
            "one-sided" => Ok(BoundaryMode::OneSided),
            other => Err(CoreError::Config(format!(
                "unknown boundary mode {other:?} (expected \"periodic\" or \"one-sided\")"
            ))),
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryMode::Periodic => write!(f, "periodic"),
            BoundaryMode::OneSided => write!(f, "one-sided"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GridConfig {
    /// Complex dimension of the chart (1..=3).
    pub n: usize,
    /// Base box radius.
    pub r: f64,
    /// Fiber ball radius.
    pub r_prime: f64,
    /// Nodes per axis.
    pub nodes_per_axis: usize,
    pub bc: BoundaryMode,
}

/// Immutable description of the discretized chart. Node coordinates are a
/// pure function of the config, so snapshots reproduce bit-exactly.
#[derive(Debug, Clone)]
pub struct Grid {
    pub n: usize,
    pub r: f64,
    pub r_prime: f64,
    pub nodes_per_axis: usize,
    pub bc: BoundaryMode,
    pub h: f64,
    num_nodes: usize,
}

impl Grid {
    pub fn new(cfg: GridConfig) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&cfg.n) {
            return Err(CoreError::InvalidGrid(format!(
                "complex dimension {} unsupported (1..=3)",
                cfg.n
            )));
        }
        if cfg.nodes_per_axis < 8 {
            return Err(CoreError::ResolutionTooSmall(cfg.nodes_per_axis));
        }
        if !(cfg.r.is_finite() && cfg.r > 0.0 && cfg.r_prime.is_finite() && cfg.r_prime > 0.0) {
            return Err(CoreError::InvalidGrid(
                "box radii must be finite and positive".into(),
            ));
        }
        let h = match cfg.bc {
            BoundaryMode::Periodic => 2.0 * cfg.r / cfg.nodes_per_axis as f64,
            BoundaryMode::OneSided => 2.0 * cfg.r / (cfg.nodes_per_axis - 1) as f64,
        };
        let num_nodes = cfg.nodes_per_axis.pow(cfg.n as u32);
        Ok(Grid {
            n: cfg.n,
            r: cfg.r,
            r_prime: cfg.r_prime,
            nodes_per_axis: cfg.nodes_per_axis,
            bc: cfg.bc,
            h,
            num_nodes,
        })
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Coordinate of node index `i` along one axis.
    #[inline]
    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.r + i as f64 * self.h
    }

    /// Row-major linear index (axis 0 slowest).
    #[inline]
    pub fn idx(&self, mi: &[usize; MAX_DIM]) -> usize {
        let mut out = 0usize;
        for a in 0..self.n {
            out = out * self.nodes_per_axis + mi[a];
        }
        out
    }

    #[inline]
    pub fn multi(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut mi = [0usize; MAX_DIM];
        for a in (0..self.n).rev() {
            mi[a] = idx % self.nodes_per_axis;
            idx /= self.nodes_per_axis;
        }
        mi
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; MAX_DIM] {
        let mi = self.multi(idx);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.n {
            x[a] = self.axis_coord(mi[a]);
        }
        x
    }

    /// True when the node sits at least `margin` cells away from every
    /// non-periodic face.
    pub fn is_interior(&self, idx: usize, margin: usize) -> bool {
        if self.bc == BoundaryMode::Periodic {
            return true;
        }
        let mi = self.multi(idx);
        (0..self.n).all(|a| mi[a] >= margin && mi[a] + margin < self.nodes_per_axis)
    }

    /// Nearest node to a coordinate point (componentwise rounding).
    pub fn nearest_node(&self, x: &[f64; MAX_DIM]) -> Result<usize> {
        let mut mi = [0usize; MAX_DIM];
        for a in 0..self.n {
            if x[a] < -self.r - 1e-12 || x[a] > self.r + 1e-12 {
                return Err(CoreError::CenterOutsideBox);
            }
            let fi = (x[a] + self.r) / self.h;
            let i = fi.round() as isize;
            mi[a] = i.clamp(0, self.nodes_per_axis as isize - 1) as usize;
        }
        Ok(self.idx(&mi))
    }

    pub fn contains(&self, x: &[f64; MAX_DIM]) -> bool {
        (0..self.n).all(|a| x[a] >= -self.r - 1e-12 && x[a] <= self.r + 1e-12)
    }
}
