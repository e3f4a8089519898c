//! Error type shared across the toolkit.

use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the toolkit, from input validation to
/// numerical breakdown. Variants carry enough context to name the offending
/// field, index, or eigenvalue in diagnostics.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("non-finite entries in {context}")]
    NonFinite { context: String },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("timestep must be positive, got {dt}")]
    NonPositiveTimestep { dt: f64 },

    #[error("matrix exponential overflowed the representable range")]
    ExpOverflow,

    #[error("matrix logarithm undefined: eigenvalue {eigenvalue} is numerically zero")]
    SingularInput { eigenvalue: Complex64 },

    #[error(
        "matrix logarithm undefined on the principal branch: eigenvalue {eigenvalue} \
         lies on the closed negative real axis"
    )]
    BranchViolation { eigenvalue: Complex64 },

    #[error(
        "recovered eigenvalue {eigenvalue} has |Im λ|·dt = {product} at the aliasing \
         boundary π; recovery is ambiguous"
    )]
    AliasingRisk { eigenvalue: Complex64, product: f64 },

    #[error("discretization integral is numerically singular (1-norm condition estimate {cond:.3e})")]
    IllConditionedIntegral { cond: f64 },

    #[error("operation requires a SISO system, got {inputs} input(s) and {outputs} output(s)")]
    NotSiso { inputs: usize, outputs: usize },

    #[error("invalid transfer function: {context}")]
    InvalidTransferFunction { context: String },

    #[error("frequency response has a pole at ω = {omega}")]
    PoleOnAxis { omega: f64 },

    #[error("invalid jitter bounds [{lo}, {hi}]: need -1 < lo <= hi")]
    InvalidBounds { lo: f64, hi: f64 },

    #[error("horizon must be at least 1 sample, got {n}")]
    EmptyHorizon { n: usize },

    #[error("gaussian jitter needs sigma > 0, got {sigma}")]
    InvalidSigma { sigma: f64 },

    #[error("jitter fractions must stay above -1; offending indices: {indices:?}")]
    AssumptionViolation { indices: Vec<usize> },

    #[error("scheduling parameter {eps} outside the declared range ({lo}, {hi})")]
    RangeViolation { eps: f64, lo: f64, hi: f64 },

    #[error("invalid scheduling range ({lo}, {hi}): need -1 <= lo < hi")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("rejection sampling exceeded {attempts} attempts for sample {index}; bounds too tight for sigma")]
    RejectionLimit { attempts: usize, index: usize },

    #[error("linear solve failed in {context}")]
    SolveFailed { context: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}
