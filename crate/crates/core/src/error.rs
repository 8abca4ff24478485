//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by the numerical operations.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A point left the open cone (or sat too close to its boundary).
    #[error("point outside the cone: {0}")]
    DomainError(String),

    /// A weight evaluated to a non-positive or non-finite value inside the cone.
    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    /// An operation requiring degree tau > 0 was called with tau = 0.
    #[error("weight has degree zero; use the constancy check instead")]
    DegreeZero,

    /// No closed form is available for the requested weight/cone combination.
    #[error("no closed form available: {0}")]
    UnsupportedClosedForm(String),

    /// A radial integrand was supplied without a usable tail certificate.
    #[error("integrand has no tail certificate and does not vanish beyond the box")]
    TailUnbounded,

    /// A function or weight evaluated to NaN/inf at a quadrature node.
    #[error("non-finite sample at node {0:?}")]
    NonFiniteSample(Vec<f64>),

    /// The test function is not normalized to unit weighted mass.
    #[error("function not normalized: integral of |u|^p w = {0}")]
    NotNormalized(f64),

    /// No analytic gradient and finite differences are disabled.
    #[error("gradient unavailable and finite-difference fallback disabled")]
    GradientUnavailable,

    /// A shift x0 broke the sampled invariance w(x + x0) = w(x).
    #[error("weight is not invariant under the shift {0:?}")]
    TranslationNotInvariant(Vec<f64>),

    /// The fast lower-envelope transform was requested for a cost it cannot handle.
    #[error("fast_p2 requires the quadratic cost (p' = 2), got p' = {0}")]
    MethodCostMismatch(f64),

    /// The grid contains no cone-interior nodes.
    #[error("grid has no nodes inside the cone")]
    EmptyDomain,

    /// A residual computation needs at least three time slices.
    #[error("need at least {needed} time slices, got {got}")]
    InsufficientSlices { needed: usize, got: usize },

    /// A scalar argument fell outside its admissible range.
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    /// The hypercontractivity exponents must satisfy alpha < beta.
    #[error("need alpha < beta, got alpha = {alpha}, beta = {beta}")]
    AlphaBetaOrder { alpha: f64, beta: f64 },

    /// The norm of e^g diverges on the truncated domain.
    #[error("norm of e^g not integrable on the truncated domain: {0}")]
    NonIntegrable(String),

    /// The admissibility probe could not decide membership in F_t0.
    #[error("membership in the admissible class is indeterminate")]
    MembershipIndeterminate,

    /// Finite-difference noise exceeds the inequality gap being measured.
    #[error("time step too coarse: FD noise {noise} exceeds gap {gap}")]
    StepTooCoarse { noise: f64, gap: f64 },

    /// A weighted CDF is flat over the requested interpolation bracket.
    #[error("degenerate CDF over bracket [{0}, {1}]")]
    DegenerateCDF(f64, f64),

    /// An integrability hypothesis of the by-parts inequality failed numerically.
    #[error("integrability check failed: {0}")]
    IntegrabilityFailure(String),

    /// The scaling normalization was not applied to the chain input.
    #[error("scaling normalization off by {0}; apply the closed-form rescale first")]
    ScalingNotApplied(f64),

    /// Generic invalid-input error for constructor validation.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
