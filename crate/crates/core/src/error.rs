use thiserror::Error;

/// Errors shared by every subsystem of the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("resolution too small: N = {0} (stencils need N >= 8)")]
    ResolutionTooSmall(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("axis {axis} out of range for complex dimension {n}")]
    AxisOutOfRange { axis: usize, n: usize },
    #[error("derivative order {0} unsupported (max 3)")]
    UnsupportedOrder(u32),
    #[error("matrix not positive definite at node {node}")]
    NotSpd { node: usize },
    #[error("matrix not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("induced metric breakdown at node {node}")]
    EtaBreakdown { node: usize },
    #[error("non-finite value in {context} at node {node}")]
    NonFinite { context: &'static str, node: usize },
    #[error("time {t} outside data span [{lo}, {hi}]")]
    TimeOutsideSpan { t: f64, lo: f64, hi: f64 },
    #[error("probe center outside the grid box")]
    CenterOutsideBox,
    #[error("nonpositive backward time tau = {0}")]
    NonpositiveTau(f64),
    #[error("flow aborted at t = {t}: {reason}; last good state at t = {t_last}")]
    Unstable { t: f64, t_last: f64, reason: String },
    #[error("need at least {need} snapshots, have {have}")]
    TooFewSnapshots { need: usize, have: usize },
    #[error("nonuniform time sampling (dt {dt0:.6e} vs {dt1:.6e})")]
    NonuniformSampling { dt0: f64, dt1: f64 },
    #[error("cutoff support violation: {0}")]
    SupportViolation(String),
    #[error("empty probe set: {0}")]
    EmptyProbeSet(String),
    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),
    #[error("snapshot parse: {0}")]
    SnapshotParse(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
