use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid of {requested} samples exceeds the cap of {cap}")]
    CapExceeded { requested: u128, cap: u128 },

    #[error("field returned a non-finite value at ({x}, {y}, {z})")]
    NonFinite { x: f64, y: f64, z: f64 },

    #[error("sheet thickness must be positive, got {0}")]
    InvalidThickness(f64),

    #[error("grids differ in dims, origin or spacing")]
    GridMismatch,

    #[error("capped mesh is not edge-manifold: {0}")]
    CapFailure(String),

    #[error("target {target} outside reachable range [{lo}, {hi}]")]
    TargetUnreachable { target: f64, lo: f64, hi: f64 },

    #[error("target wall {target_mm} mm needs at least two voxels; pitch is {pitch_mm} mm")]
    ResolutionTooCoarse { target_mm: f64, pitch_mm: f64 },

    #[error("objective is not monotone in the iso-level: {0}")]
    NonMonotone(String),

    #[error("domain {size:?} mm exceeds the {limit:?} mm build envelope")]
    EnvelopeExceeded { size: [f64; 3], limit: [f64; 3] },

    #[error("generated mesh is not watertight: {0}")]
    NotWatertight(String),

    #[error("invalid brick spec: {0}")]
    InvalidSpec(String),

    #[error("malformed mesh data: {0}")]
    Malformed(String),

    #[error("write failed: {0}")]
    Sink(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code, used as the prefix of CLI diagnostics
    /// and in job records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidField(_) => "INVALID_FIELD",
            Error::InvalidDomain(_) => "INVALID_DOMAIN",
            Error::CapExceeded { .. } => "CAP_EXCEEDED",
            Error::NonFinite { .. } => "NON_FINITE",
            Error::InvalidThickness(_) => "INVALID_THICKNESS",
            Error::GridMismatch => "GRID_MISMATCH",
            Error::CapFailure(_) => "CAP_FAILURE",
            Error::TargetUnreachable { .. } => "TARGET_UNREACHABLE",
            Error::ResolutionTooCoarse { .. } => "RESOLUTION_TOO_COARSE",
            Error::NonMonotone(_) => "NON_MONOTONE",
            Error::EnvelopeExceeded { .. } => "ENVELOPE_EXCEEDED",
            Error::NotWatertight(_) => "NOT_WATERTIGHT",
            Error::InvalidSpec(_) => "INVALID_SPEC",
            Error::Malformed(_) => "MALFORMED",
            Error::Sink(_) => "SINK_ERROR",
        }
    }

    /// True for errors raised by the density and wall solvers.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::TargetUnreachable { .. }
                | Error::ResolutionTooCoarse { .. }
                | Error::NonMonotone(_)
        )
    }
}
