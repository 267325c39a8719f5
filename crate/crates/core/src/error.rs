use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Error, Debug)]
pub enum Error {
    /// A kernel or run specification violates a validity condition.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A special-function evaluation would overflow the f64 range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: achieved error estimate {achieved:.3e} > requested {requested:.3e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    /// Stepwise Cholesky hit a numerically non-positive pivot.
    #[error("pivot failure at node index {index}: diagonal residual {residual:.3e} below threshold {threshold:.3e}; kernel matrix numerically singular")]
    PivotFailure {
        index: usize,
        residual: f64,
        threshold: f64,
    },

    /// The symmetric eigensolver failed to produce a decomposition.
    #[error("eigensolver failure: {0}")]
    EigenFailure(String),

    /// A derivative functional is unbounded on the native space.
    #[error("inadmissible derivative order: 2|order| = {requested} must be below {bound} for this kernel")]
    InadmissibleDerivative { requested: f64, bound: f64 },

    /// Richardson extrapolation levels disagree beyond tolerance.
    #[error("finite-difference extrapolation unstable: relative disagreement {disagreement:.3e} > {tolerance:.3e}")]
    UnstableExtrapolation { disagreement: f64, tolerance: f64 },

    /// Operation is not defined for the given kernel family.
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    /// An index is outside the valid range of a basis or sequence.
    #[error("index out of range: {index} not in 1..={size}")]
    IndexOutOfRange { index: usize, size: usize },

    /// A fit or statistic was requested on too little data.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A persisted artifact is malformed or fails its integrity check.
    #[error("format error: {0}")]
    Format(String),
}
