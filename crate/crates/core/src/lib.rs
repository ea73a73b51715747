//! Numerical verification toolkit for a sharp weighted interpolation
//! inequality on the half-line.
//!
//! The library evaluates the three weighted energies of a function triple
//! (f, f′, f″), checks the exact expanded-square identity behind the
//! inequality, constructs the closed-form extremisers from Kummer's
//! confluent hypergeometric function, and independently re-derives the sharp
//! constant `¼(√(μ²−4ε)+1)²` by direct minimisation of the quotient over a
//! trial basis.
//!
//! Modules:
//! * [`problem`] — parameters (μ, ε), derived roots, the sharp constant;
//! * [`quadrature`] — tanh-sinh + exp-sinh rules for (0, ∞);
//! * [`kummer`] — ₁F₁ series, derivatives, ODE self-check, damped products;
//! * [`forms`] — energies, norms, residuals, identities, decay probes;
//! * [`extremiser`] — equality-case functions on both sign branches of μ;
//! * [`minimiser`] — trial-space Gram assembly and quotient minimisation.

pub mod error;
pub mod extremiser;
pub mod forms;
pub mod kummer;
pub mod minimiser;
mod polyexp;
pub mod problem;
pub mod quadrature;

pub use error::{Error, Result};
pub use extremiser::{build, lambda_of, Branch, BuiltExtremiser, ExtremiserSpec};
pub use forms::{form_values, quotient, FormValues, FunctionTriple};
pub use kummer::KummerParams;
pub use minimiser::{build_basis, minimise_quotient, BasisModel, MinimiseOpts};
pub use problem::{derive, DerivedParams, ProblemParams};
pub use quadrature::{integrate_halfline, IntegralResult, QuadratureSpec};
