//! Problem parameters and the sharp constant.
//!
//! The quotient under study is
//! `(∫(f″)²x^{μ+1}) · (∫(x²(f′)² − ε f²)x^{μ−1}) / (∫(f′)²x^μ)²`
//! over functions on (0, ∞), with `ε ≤ μ²/4`. Its infimum is
//! `¼(√(μ²−4ε)+1)²`, and everything downstream is parameterised by the
//! discriminant root `s = √(μ²−4ε)` and the two roots `b∓ = (μ∓s)/2` of
//! `b(μ−b) = ε`.

use crate::error::{Error, Result};

/// Relative slack used to snap `eps` onto the boundary `mu^2/4` (where s = 0).
const BOUNDARY_REL_TOL: f64 = 1e-12;

/// The two free parameters: weight exponent `mu` and zeroth-order
/// coefficient `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub mu: f64,
    pub eps: f64,
}

impl ProblemParams {
    /// Builds parameters, enforcing `eps <= mu^2/4` (up to boundary slack).
    pub fn new(mu: f64, eps: f64) -> Result<Self> {
        if !mu.is_finite() || !eps.is_finite() {
            return Err(Error::Parameter(format!(
                "mu and eps must be finite, got mu = {mu}, eps = {eps}"
            )));
        }
        let limit = mu * mu / 4.0;
        if eps > limit + BOUNDARY_REL_TOL * f64::max(1.0, mu * mu) {
            return Err(Error::Admissibility { eps, limit });
        }
        Ok(Self { mu, eps })
    }

    /// True when `eps` sits on the boundary `mu^2/4` up to rounding slack,
    /// i.e. the discriminant root s is treated as exactly zero.
    pub fn at_boundary(&self) -> bool {
        (self.eps - self.mu * self.mu / 4.0).abs()
            <= BOUNDARY_REL_TOL * f64::max(1.0, self.mu * self.mu)
    }
}

/// Quantities derived from `(mu, eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// `s = sqrt(mu^2 - 4 eps) >= 0`.
    pub s: f64,
    /// Smaller root `(mu - s)/2` of `b(mu - b) = eps`. The canonical choice.
    pub b_minus: f64,
    /// Larger root `(mu + s)/2`. Yields the weaker bound.
    pub b_plus: f64,
    /// The sharp constant `¼(s + 1)²`.
    pub sharp_const: f64,
}

/// Computes `s`, both roots, and the sharp constant.
///
/// The boundary `eps = mu^2/4` is snapped to `s = 0` exactly rather than
/// letting rounding produce a tiny spurious discriminant.
pub fn derive(params: &ProblemParams) -> Result<DerivedParams> {
    let ProblemParams { mu, eps } = *params;
    let limit = mu * mu / 4.0;
    if eps > limit + BOUNDARY_REL_TOL * f64::max(1.0, mu * mu) {
        return Err(Error::Admissibility { eps, limit });
    }
    let s = if params.at_boundary() {
        0.0
    } else {
        (mu * mu - 4.0 * eps).max(0.0).sqrt()
    };
    let half_s = 0.5 * (s + 1.0);
    Ok(DerivedParams {
        s,
        b_minus: 0.5 * (mu - s),
        b_plus: 0.5 * (mu + s),
        sharp_const: half_s * half_s,
    })
}
