use thiserror::Error;

/// Errors raised by the engine. Numeric payloads are reported in `f64`
/// whatever the working scalar type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coefficient {name} is negative ({value})")]
    NegativeCoefficient { name: String, value: f64 },

    #[error("normalization violated for {group}: sum differs from 1 by {residual}")]
    NormalizationViolation { group: String, residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("non-finite coordinate produced (overflow)")]
    Overflow,

    #[error("state is not a fixed point (residual {residual})")]
    NotAFixedPoint { residual: f64 },

    #[error("8 - 4p1 + 2p2 + p3 = {value} is not zero; input is not a nonzero fixed point")]
    IdentityViolated { value: f64 },

    #[error("initial state is not on a supported coordinate subspace")]
    NotOnSupportedSubspace,

    #[error("parameter condition violated: {0}")]
    ParameterConditionViolated(String),

    #[error("state has a negative coordinate; nonnegative data required")]
    NegativeCoordinate,

    #[error("Jacobian of the fixed-point residual is singular at the seed")]
    SingularJacobianAtSeed,

    #[error("Newton iteration did not converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
