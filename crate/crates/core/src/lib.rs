//! Structured-grid laboratory for the line bundle mean curvature flow on
//! semi-flat charts: pointwise curvature data, frame calculus, time
//! integration, Gaussian densities with their monotonicity ledger,
//! self-similar-solution detectors and scale-normalized parabolic norms.

pub mod catalog;
pub mod conventions;
pub mod curvature;
pub mod cutoff;
pub mod density;
pub mod diff;
pub mod error;
pub mod field;
pub mod flow;
pub mod frames;
pub mod grid;
pub mod knorm;
pub mod metric;
pub mod quad;
pub mod shrinker;
pub mod smat;
pub mod snapshot;

pub use error::{CoreError, Result};
pub use field::{CovectorField, MatField, ScalarField, SectionField};
pub use grid::{BoundaryMode, Grid, GridConfig};
pub use metric::MetricField;
pub use smat::SMat;
