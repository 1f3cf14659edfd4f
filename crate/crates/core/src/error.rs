use thiserror::Error;

/// Errors raised by the numerical routines and the scenario loader.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("matrix `{field}` is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { field: String, deviation: f64 },

    #[error("invalid Kraus set: {0}")]
    InvalidKraus(String),

    #[error("non-finite entry in `{0}`")]
    NonFinite(String),

    #[error("exponential argument too large: norm {0:.3e} exceeds 1e4")]
    ExpOverflow(f64),

    #[error("eigensolver did not converge")]
    EigenSolver,

    #[error("eigenvalue {eigenvalue} lies within {distance:.3e} of the contour")]
    EigenvalueOnContour { eigenvalue: num_complex::Complex64, distance: f64 },

    #[error("contour quadrature did not converge at {nodes} nodes (last change {change:.3e})")]
    QuadratureNonConvergence { nodes: usize, change: f64 },

    #[error("cluster and remaining spectrum separated by only {0:.3e}")]
    IllConditionedSylvester(f64),

    #[error("power iteration did not converge after {0} squarings")]
    PowerNonConvergence(usize),

    #[error("spectral gap condition fails: {0}")]
    GapFailure(String),

    #[error("not a generator: {0}")]
    NotGenerator(String),

    #[error("admissible window violated: {0}")]
    WindowViolation(String),

    #[error("n = {n} is below the admissible threshold {threshold}")]
    BelowThreshold { n: usize, threshold: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("map is not a contraction (norm upper bound {0:.6})")]
    NotContraction(f64),

    #[error("reparameterization is not monotone: {0}")]
    NotMonotone(String),

    #[error("invalid generator path: {0}")]
    InvalidPath(String),

    #[error("propagator did not converge after {steps} steps (last change {change:.3e})")]
    PropagatorNonConvergence { steps: usize, change: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid `{field}`: {message}")]
    Invariant { field: String, message: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invariant(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invariant { field: field.into(), message: message.into() }
    }

    /// True for failures of an iterative numerical method, as opposed to
    /// invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenSolver
                | Error::QuadratureNonConvergence { .. }
                | Error::PowerNonConvergence(_)
                | Error::PropagatorNonConvergence { .. }
                | Error::IllConditionedSylvester(_)
                | Error::EigenvalueOnContour { .. }
                | Error::ExpOverflow(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
