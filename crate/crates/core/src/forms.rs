//! Quadratic forms, norms, residuals and identities for a given function
//! triple (f, f′, f″) on the half-line.
//!
//! The central objects, for weight exponent μ and coefficient ε:
//!
//! * bending   `A = ∫ (f″)² x^{μ+1}`
//! * hardy     `B = ∫ (x²(f′)² − ε f²) x^{μ−1}`  (one combined integrand)
//! * dirichlet `D = ∫ (f′)² x^{μ}`
//! * quotient  `A·B / D²`, bounded below by the sharp constant
//!
//! plus the expanded-square residual
//! `∫ (x f″ + α x f′ + β f′ + γ f)² x^{μ−1}` and the quadratic
//! `g(α) = α²·B − α(μ+1−2b)·D + A` it reduces to for β = μ, γ = (μ−b)α.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{derive, ProblemParams};
use crate::quadrature::{integrate_halfline, IntegralResult, QuadratureSpec};

/// An evaluator supplying (f, f′, f″) at any x > 0.
#[derive(Clone)]
pub struct FunctionTriple {
    eval: Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>,
    pub label: String,
}

impl std::fmt::Debug for FunctionTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionTriple")
            .field("label", &self.label)
            .finish()
    }
}

impl FunctionTriple {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            label: label.into(),
        }
    }

    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        (self.eval)(x)
    }

    /// Largest relative deviation of centred finite differences from the
    /// supplied derivatives over the probe points, as
    /// (worst f′ mismatch, worst f″ mismatch). Step is 1e-5·max(1, x).
    pub fn consistency_errors(&self, probes: &[f64]) -> (f64, f64) {
        let mut worst1 = 0.0f64;
        let mut worst2 = 0.0f64;
        for &x in probes {
            let h = 1e-5 * f64::max(1.0, x);
            if x - h <= 0.0 {
                continue;
            }
            let (fm, f1m, _) = self.eval(x - h);
            let (_, f10, f20) = self.eval(x);
            let (fp, f1p, _) = self.eval(x + h);
            let fd1 = (fp - fm) / (2.0 * h);
            let fd2 = (f1p - f1m) / (2.0 * h);
            let s1 = f64::max(f10.abs(), f64::max(fd1.abs(), 1e-10));
            let s2 = f64::max(f20.abs(), f64::max(fd2.abs(), 1e-10));
            worst1 = worst1.max((fd1 - f10).abs() / s1);
            worst2 = worst2.max((fd2 - f20).abs() / s2);
        }
        (worst1, worst2)
    }
}

/// Builds `(Σ cₖ xᵏ)·e^{−rate·x}` as a triple; the workhorse test family.
pub fn poly_exp_triple(coeffs: &[f64], rate: f64) -> FunctionTriple {
    let c: Vec<f64> = coeffs.to_vec();
    let label = format!("poly(deg {})*exp(-{rate}x)", c.len().saturating_sub(1));
    FunctionTriple::new(label, move |x| {
        let mut p = 0.0;
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        // Horner for P, P′, P″.
        for &ck in c.iter().rev() {
            p2 = p2 * x + 2.0 * p1;
            p1 = p1 * x + p;
            p = p * x + ck;
        }
        let e = (-rate * x).exp();
        let f = p * e;
        let f1 = (p1 - rate * p) * e;
        let f2 = (p2 - 2.0 * rate * p1 + rate * rate * p) * e;
        (f, f1, f2)
    })
}

/// The four quadratic quantities of one function, with the summed quadrature
/// error estimate.
#[derive(Debug, Clone, Copy)]
pub struct FormValues {
    /// ∫ (f″)² x^{μ+1}
    pub bending: f64,
    /// ∫ (x²(f′)² − ε f²) x^{μ−1}
    pub hardy: f64,
    /// ∫ (f′)² x^{μ}
    pub dirichlet: f64,
    /// ∫ (x^{μ+1}(f″)² + (x^{μ+1}+x^{μ−1})(f′)² + x^{μ−1} f²)
    pub norm_sq: f64,
    /// Aggregate quadrature error estimate.
    pub err: f64,
}

/// Coefficients (α, β, γ) of the general expanded square.
#[derive(Debug, Clone, Copy)]
pub struct ResidualCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// g(α) evaluation plus a flag telling whether b was one of the canonical
/// roots b∓ (the quadratic only reduces the expanded square for those).
#[derive(Debug, Clone, Copy)]
pub struct GAlpha {
    pub value: f64,
    pub canonical: bool,
}

/// Decay monitor values at one probe point.
#[derive(Debug, Clone, Copy)]
pub struct DecayProbe {
    pub x: f64,
    /// g1 = (f′)² x^{μ+1}
    pub g1: f64,
    /// g2 = (f′)² x^{μ}
    pub g2: f64,
    /// g3 = f² x^{μ}
    pub g3: f64,
}

fn run_integral(
    what: &'static str,
    label: &str,
    r: Result<IntegralResult>,
) -> Result<IntegralResult> {
    r.map_err(|e| match e {
        Error::NonConvergence { detail, .. } => Error::DivergenceSuspected(format!(
            "{what} integral of `{label}` did not converge: {detail}"
        )),
        other => other,
    })
}

/// Evaluates A, B, D and the squared norm. B uses a single combined
/// integrand; splitting it into two integrals would cancel at the value level
/// instead of the quadrature level.
pub fn form_values(
    triple: &FunctionTriple,
    params: &ProblemParams,
    spec: &QuadratureSpec,
) -> Result<FormValues> {
    let ProblemParams { mu, eps } = *params;
    let t = triple.clone();
    let bending = run_integral(
        "bending",
        &triple.label,
        integrate_halfline(
            move |x| {
                let (_, _, f2) = t.eval(x);
                f2 * f2 * x.powf(mu + 1.0)
            },
            spec,
        ),
    )?;
    let t = triple.clone();
    let hardy = run_integral(
        "hardy",
        &triple.label,
        integrate_halfline(
            move |x| {
                let (f, f1, _) = t.eval(x);
                (x * x * f1 * f1 - eps * f * f) * x.powf(mu - 1.0)
            },
            spec,
        ),
    )?;
    let t = triple.clone();
    let dirichlet = run_integral(
        "dirichlet",
        &triple.label,
        integrate_halfline(
            move |x| {
                let (_, f1, _) = t.eval(x);
                f1 * f1 * x.powf(mu)
            },
            spec,
        ),
    )?;
    let t = triple.clone();
    let norm = run_integral(
        "norm",
        &triple.label,
        integrate_halfline(
            move |x| {
                let (f, f1, f2) = t.eval(x);
                let xm1 = x.powf(mu - 1.0);
                let xp1 = x.powf(mu + 1.0);
                xp1 * f2 * f2 + (xp1 + xm1) * f1 * f1 + xm1 * f * f
            },
            spec,
        ),
    )?;
    Ok(FormValues {
        bending: bending.value,
        hardy: hardy.value,
        dirichlet: dirichlet.value,
        norm_sq: norm.value,
        err: bending.err_estimate + hardy.err_estimate + dirichlet.err_estimate + norm.err_estimate,
    })
}

/// The alternative squared norm `∫(x^{μ+1}(f″)² + (x^{μ+1}+x^{μ})(f′)² + x^{μ−1}f²)`
/// (kept for comparison with the larger space it induces).
pub fn norm_prime_sq(
    triple: &FunctionTriple,
    params: &ProblemParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mu = params.mu;
    let t = triple.clone();
    let r = run_integral(
        "norm-prime",
        &triple.label,
        integrate_halfline(
            move |x| {
                let (f, f1, f2) = t.eval(x);
                let xp1 = x.powf(mu + 1.0);
                x.powf(mu + 1.0) * f2 * f2 + (xp1 + x.powf(mu)) * f1 * f1 + x.powf(mu - 1.0) * f * f
            },
            spec,
        ),
    )?;
    Ok(r.value)
}

/// `∫ (x f″ + α x f′ + β f′ + γ f)² x^{μ−1} dx` — nonnegative by
/// construction.
pub fn residual_lhs(
    triple: &FunctionTriple,
    params: &ProblemParams,
    coeffs: &ResidualCoefficients,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mu = params.mu;
    let ResidualCoefficients { alpha, beta, gamma } = *coeffs;
    let t = triple.clone();
    let r = run_integral(
        "residual",
        &triple.label,
        integrate_halfline(
            move |x| {
                let (f, f1, f2) = t.eval(x);
                let inner = x * f2 + alpha * x * f1 + beta * f1 + gamma * f;
                inner * inner * x.powf(mu - 1.0)
            },
            spec,
        ),
    )?;
    Ok(r.value)
}

/// `g(α) = α²·B − α(μ+1−2b)·D + A`. Any b is accepted; `canonical` is false
/// unless b matches one of the roots b∓, in which case g(α) equals the
/// expanded square with β = μ, γ = (μ−b)α.
pub fn g_alpha(
    triple: &FunctionTriple,
    params: &ProblemParams,
    alpha: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<GAlpha> {
    let fv = form_values(triple, params, spec)?;
    let d = derive(params)?;
    let lin = params.mu + 1.0 - 2.0 * b;
    let value = alpha * alpha * fv.hardy - alpha * lin * fv.dirichlet + fv.bending;
    let tol = 1e-9 * f64::max(1.0, params.mu.abs());
    let canonical = (b - d.b_minus).abs() <= tol || (b - d.b_plus).abs() <= tol;
    Ok(GAlpha { value, canonical })
}

/// Difference between the expanded square (β = μ, γ = (μ−b)α fixed
/// internally) and g(α); zero within quadrature error for canonical b.
pub fn identity_gap(
    triple: &FunctionTriple,
    params: &ProblemParams,
    alpha: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let coeffs = ResidualCoefficients {
        alpha,
        beta: params.mu,
        gamma: (params.mu - b) * alpha,
    };
    let lhs = residual_lhs(triple, params, &coeffs, spec)?;
    let g = g_alpha(triple, params, alpha, b, spec)?;
    Ok(lhs - g.value)
}

/// The scale-invariant quotient `A·B / D²`.
pub fn quotient(
    triple: &FunctionTriple,
    params: &ProblemParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let fv = form_values(triple, params, spec)?;
    if fv.dirichlet <= fv.err || fv.dirichlet <= 0.0 {
        return Err(Error::DegenerateDenominator {
            name: "dirichlet",
            value: fv.dirichlet,
        });
    }
    Ok(fv.bending * fv.hardy / (fv.dirichlet * fv.dirichlet))
}

/// Boundary-decay monitors g1, g2, g3 at each probe. No thresholding here;
/// callers assert decay.
pub fn limit_probe(
    triple: &FunctionTriple,
    params: &ProblemParams,
    xs: &[f64],
) -> Result<Vec<DecayProbe>> {
    let mu = params.mu;
    xs.iter()
        .map(|&x| {
            let (f, f1, _) = triple.eval(x);
            let g1 = f1 * f1 * x.powf(mu + 1.0);
            let g2 = f1 * f1 * x.powf(mu);
            let g3 = f * f * x.powf(mu);
            if !(g1.is_finite() && g2.is_finite() && g3.is_finite()) {
                return Err(Error::Domain {
                    x,
                    context: "limit probe",
                });
            }
            Ok(DecayProbe { x, g1, g2, g3 })
        })
        .collect()
}

/// The standard probe ladder x = 10^{∓k}, k = 1..6, ascending.
pub fn probe_ladder() -> Vec<f64> {
    (-6..=6)
        .filter(|k| *k != 0)
        .map(|k| 10f64.powi(k))
        .collect()
}

/// Constructed demonstration (not from any source) that the two norms induce
/// different spaces: near 0 this function has
/// `f(x) = x·(ln 1/x)^{−1/2}`, so `∫(f′)² x^{−1}` diverges (log-log) at μ = 0
/// while every constituent of the alternative norm stays finite. A C²
/// smoothstep ramps it to zero on [x₀, 1].
pub fn norm_gap_witness() -> FunctionTriple {
    const X0: f64 = 0.25;
    FunctionTriple::new("norm-gap witness", move |x| {
        if x >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        // base(x) = x · L^{-1/2}, L = -ln x
        let l = -x.ln();
        let base = x * l.powf(-0.5);
        let base1 = l.powf(-0.5) + 0.5 * l.powf(-1.5);
        let base2 = (0.5 * l.powf(-1.5) + 0.75 * l.powf(-2.5)) / x;
        if x <= X0 {
            return (base, base1, base2);
        }
        // Quintic smoothstep down on [X0, 1].
        let w = 1.0 - X0;
        let s = (x - X0) / w;
        let r = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
        let r1 = 30.0 * s * s * (1.0 - s) * (1.0 - s) / w;
        let r2 = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (w * w);
        let f = base * (1.0 - r);
        let f1 = base1 * (1.0 - r) - base * r1;
        let f2 = base2 * (1.0 - r) - 2.0 * base1 * r1 - base * r2;
        (f, f1, f2)
    })
}
