use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = RegulusError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RegulusError {
    /// An argument lies outside the domain of a closed-form function.
    #[error("{func}: argument {value} outside domain {domain}")]
    Domain {
        func: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("gradient vanishes at ({x}, {y}, {z}) (|grad f| = {norm:e})")]
    SingularGradient { x: f64, y: f64, z: f64, norm: f64 },

    #[error("point ({x}, {y}, {z}) is off the surface: |f| = {value:e} exceeds {tolerance:e}")]
    OffSurface {
        x: f64,
        y: f64,
        z: f64,
        value: f64,
        tolerance: f64,
    },

    #[error("boundary has no samples")]
    EmptyBoundary,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("projection of ({x}, {y}, {z}) is ambiguous (competing foot within {gap:e})")]
    AmbiguousProjection { x: f64, y: f64, z: f64, gap: f64 },

    #[error("probe point leaves the tubular neighbourhood: distance {distance} >= {limit}")]
    TubeExit { distance: f64, limit: f64 },

    #[error("no admissible boundary midpoint for segment of length {chord} (depth {depth}): {reason}")]
    NoMidpoint { chord: f64, depth: usize, reason: String },

    #[error("inconsistent shape: {0}")]
    InconsistentShape(String),

    #[error("level set has no contour inside the box")]
    NoContour,

    #[error("no positive radius could be certified (tried down to {0})")]
    AllRefuted(f64),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for boundary with {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RegulusError {
    pub(crate) fn domain(func: &'static str, value: f64, domain: impl Into<String>) -> Self {
        RegulusError::Domain {
            func,
            value,
            domain: domain.into(),
        }
    }
}
