//! Error types shared across the crate.

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// The hypothesis `eps <= mu^2/4` is violated.
    #[error("inadmissible parameters: eps = {eps} exceeds mu^2/4 = {limit}")]
    Admissibility { eps: f64, limit: f64 },

    /// Kummer denominator parameter is a nonpositive integer and the series
    /// does not terminate first.
    #[error("Kummer function pole: denominator parameter {mu} is a nonpositive integer")]
    Pole { mu: f64 },

    /// A value could not be computed to the promised accuracy.
    #[error("precision loss in {context}: {detail}")]
    Precision {
        context: &'static str,
        detail: String,
    },

    /// Quadrature refinements were exhausted without agreement, or an
    /// integrand tail never decayed below the cut threshold.
    #[error("quadrature did not converge after {refinements} refinements ({detail})")]
    NonConvergence { refinements: u32, detail: String },

    /// An evaluation produced a non-finite value.
    #[error("non-finite value at x = {x:e} ({context})")]
    Domain { x: f64, context: &'static str },

    /// A constituent integral shows divergence evidence; the function is
    /// likely outside the working space.
    #[error("divergence suspected: {0}")]
    DivergenceSuspected(String),

    /// A quotient denominator is too small to divide by.
    #[error("degenerate denominator {name} = {value:e}")]
    DegenerateDenominator { name: &'static str, value: f64 },

    /// Extremiser branch does not match the sign of mu (or mu = 0).
    #[error("branch error: no extremiser branch for mu = {mu}")]
    Branch { mu: f64 },

    /// Invalid parameter or configuration value.
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
