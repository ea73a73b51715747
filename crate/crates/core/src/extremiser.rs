//! Closed-form extremisers of the sharp inequality, their equality-case rate
//! λ, the pointwise Euler–Lagrange residual, and divergence evidence for the
//! rejected second solution.
//!
//! For μ > 0 the extremiser is `f(x) = C e^{−λx} ₁F₁(b, μ, λx)`; for μ < 0 it
//! is `f(x) = C (λx)^{1−μ} e^{−λx} ₁F₁(b+1−μ, 2−μ, λx)`, always with the
//! smaller root b = b₋. Derivatives are assembled symbolically (product and
//! power rules over the damped Kummer triple), not by differencing.

use crate::error::{Error, Result};
use crate::forms::{form_values, FunctionTriple};
use crate::kummer::KummerParams;
use crate::problem::{derive, ProblemParams};
use crate::quadrature::{integrate_interval, QuadratureSpec};

/// Which sign of μ the construction serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    MuPositive,
    MuNegative,
}

/// Specification of one extremiser.
#[derive(Debug, Clone, Copy)]
pub struct ExtremiserSpec {
    pub branch: Branch,
    /// Amplitude C ≠ 0.
    pub amplitude: f64,
    /// Rate λ > 0 (the family is a λ-orbit; constants are excluded).
    pub rate: f64,
    pub params: ProblemParams,
    /// Always the smaller root b₋.
    pub b: f64,
}

impl ExtremiserSpec {
    /// Builds a spec with the branch chosen from sign(μ) and b = b₋.
    pub fn new(params: ProblemParams, rate: f64, amplitude: f64) -> Result<Self> {
        if params.mu == 0.0 {
            return Err(Error::Branch { mu: params.mu });
        }
        if !(rate > 0.0) {
            return Err(Error::Parameter(format!("rate must be > 0, got {rate}")));
        }
        if amplitude == 0.0 || !amplitude.is_finite() {
            return Err(Error::Parameter("amplitude must be nonzero".into()));
        }
        let d = derive(&params)?;
        let branch = if params.mu > 0.0 {
            Branch::MuPositive
        } else {
            Branch::MuNegative
        };
        Ok(Self {
            branch,
            amplitude,
            rate,
            params,
            b: d.b_minus,
        })
    }
}

/// A built extremiser: the function triple plus a warning when membership in
/// the working space is doubtful (boundary case s = 0 with a non-terminating
/// Kummer factor, where the tail is only log-marginally outside).
#[derive(Debug, Clone)]
pub struct BuiltExtremiser {
    pub triple: FunctionTriple,
    pub membership_warning: bool,
    /// The underlying Kummer parameters actually evaluated.
    pub kummer: KummerParams,
}

/// Triple for `C (λx)^ν e^{−λx} w(λx)` with w = ₁F₁(kp.b, kp.mu, ·),
/// assembled from the damped Kummer derivatives.
fn damped_power_triple(
    kp: KummerParams,
    nu: f64,
    rate: f64,
    amplitude: f64,
    label: String,
) -> FunctionTriple {
    let terminating = kp.terminating_degree().is_some() || kp.b == kp.mu;
    FunctionTriple::new(label, move |x| {
        let z = rate * x;
        // Far out, the power factor and the damped product cancel at the
        // algebraic level; the folded expansion keeps the derivatives clean.
        if !terminating && z > crate::kummer::DAMPED_SWITCH {
            return match crate::kummer::damped_power_asymptotic(kp.b, kp.mu, nu, z) {
                Ok((g, g1, g2)) => (
                    amplitude * g,
                    amplitude * rate * g1,
                    amplitude * rate * rate * g2,
                ),
                Err(_) => (f64::NAN, f64::NAN, f64::NAN),
            };
        }
        let (e0, ep, epp) = match kp.damped_product_derivatives(z) {
            Ok(v) => v,
            Err(_) => return (f64::NAN, f64::NAN, f64::NAN),
        };
        let (g, g1, g2) = if nu == 0.0 {
            (e0, ep, epp)
        } else {
            // Skip zero-coefficient power terms so z^{negative} never
            // multiplies a 0 into NaN at the endpoints.
            let pw = |c: f64, e: f64| if c == 0.0 { 0.0 } else { c * z.powf(e) };
            let g = pw(1.0, nu) * e0;
            let g1 = pw(nu, nu - 1.0) * e0 + pw(1.0, nu) * ep;
            let g2 = pw(nu * (nu - 1.0), nu - 2.0) * e0
                + 2.0 * pw(nu, nu - 1.0) * ep
                + pw(1.0, nu) * epp;
            (g, g1, g2)
        };
        (
            amplitude * g,
            amplitude * rate * g1,
            amplitude * rate * rate * g2,
        )
    })
}

/// Constructs the extremiser triple for the spec's branch.
pub fn build(spec: &ExtremiserSpec) -> Result<BuiltExtremiser> {
    let mu = spec.params.mu;
    match spec.branch {
        Branch::MuPositive if mu <= 0.0 => return Err(Error::Branch { mu }),
        Branch::MuNegative if mu >= 0.0 => return Err(Error::Branch { mu }),
        _ => {}
    }
    let d = derive(&spec.params)?;
    let (kp, nu) = match spec.branch {
        Branch::MuPositive => (KummerParams::new(spec.b, mu), 0.0),
        Branch::MuNegative => (KummerParams::new(spec.b + 1.0 - mu, 2.0 - mu), 1.0 - mu),
    };
    // Surface pole/parameter problems at build time.
    kp.damped_product_derivatives(spec.rate)?;
    let membership_warning = d.s == 0.0 && kp.terminating_degree().is_none();
    let label = format!(
        "extremiser(mu={mu}, eps={}, lambda={}, C={})",
        spec.params.eps, spec.rate, spec.amplitude
    );
    Ok(BuiltExtremiser {
        triple: damped_power_triple(kp, nu, spec.rate, spec.amplitude, label),
        membership_warning,
        kummer: kp,
    })
}

/// The equality-case rate `λ = (s+1)/2 · D/B` of a function.
pub fn lambda_of(
    triple: &FunctionTriple,
    params: &ProblemParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let d = derive(params)?;
    let fv = form_values(triple, params, spec)?;
    if fv.hardy <= fv.err || fv.hardy <= 0.0 {
        return Err(Error::DegenerateDenominator {
            name: "hardy",
            value: fv.hardy,
        });
    }
    Ok(0.5 * (d.s + 1.0) * fv.dirichlet / fv.hardy)
}

/// One row of the pointwise Euler–Lagrange check
/// `x f″ + λ x f′ + μ f′ + (μ−b)λ f = 0`.
#[derive(Debug, Clone, Copy)]
pub struct ElResidual {
    pub x: f64,
    pub residual: f64,
    /// Sum of the four term magnitudes plus λ(1+λx)|f|. The extra term keeps
    /// the scale meaningful where the zeroth coefficient vanishes (b = μ)
    /// and every derivative term is exponentially dead: there the identity
    /// degenerates to 0 = 0 and |f| sets the size it is verified against.
    pub scale: f64,
}

pub fn euler_lagrange_residual(
    triple: &FunctionTriple,
    params: &ProblemParams,
    lambda: f64,
    xs: &[f64],
) -> Result<Vec<ElResidual>> {
    let d = derive(params)?;
    let mu = params.mu;
    let c0 = (mu - d.b_minus) * lambda;
    xs.iter()
        .map(|&x| {
            let (f, f1, f2) = triple.eval(x);
            let terms = [x * f2, lambda * x * f1, mu * f1, c0 * f];
            let residual: f64 = terms.iter().sum();
            let scale: f64 =
                terms.iter().map(|t| t.abs()).sum::<f64>() + lambda * (1.0 + lambda * x) * f.abs();
            if !residual.is_finite() {
                return Err(Error::Domain {
                    x,
                    context: "euler-lagrange residual",
                });
            }
            Ok(ElResidual { x, residual, scale })
        })
        .collect()
}

/// One partial-integral row of the divergence evidence.
#[derive(Debug, Clone, Copy)]
pub struct GrowthRow {
    /// Lower endpoint δ of the window [δ, 1].
    pub window_start: f64,
    pub partial_integral: f64,
}

/// Divergence evidence for the rejected homogeneous solution.
#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub branch: Branch,
    pub rows: Vec<GrowthRow>,
    pub summary: String,
}

/// Partial integrals over shrinking windows [δ, 1], δ = 10^{−k}, k = 1..6,
/// demonstrating that the rejected solution fails to belong to the space.
///
/// For μ > 0 the second solution `ψ(t) = t^{1−μ}₁F₁(b+1−μ, 2−μ, t)` has
/// `(d²/dt²[e^{−t}ψ])² t^{μ+1} ~ t^{−1−μ}` at 0, so the bending partials blow
/// up. For μ < 0 the rejected first solution has `(e^{−t}φ)² t^{μ−1} ~ t^{μ−1}`
/// at 0 (φ(0) = 1), again non-integrable. μ ∈ {0, 1} and parameter sets that
/// hit a Kummer pole are rejected.
pub fn rejected_solution_evidence(
    params: &ProblemParams,
    lambda: f64,
    spec: &QuadratureSpec,
) -> Result<GrowthReport> {
    let mu = params.mu;
    if mu == 0.0 {
        return Err(Error::Branch { mu });
    }
    if mu == 1.0 {
        return Err(Error::Parameter(
            "mu = 1 makes the two homogeneous solutions coincide".into(),
        ));
    }
    let d = derive(params)?;
    let (kp, nu, weight_pow, use_second_derivative, branch) = if mu > 0.0 {
        (
            KummerParams::new(d.b_minus + 1.0 - mu, 2.0 - mu),
            1.0 - mu,
            mu + 1.0,
            true,
            Branch::MuPositive,
        )
    } else {
        (
            KummerParams::new(d.b_minus, mu),
            0.0,
            mu - 1.0,
            false,
            Branch::MuNegative,
        )
    };
    kp.damped_product_derivatives(lambda)?;
    let triple = damped_power_triple(kp, nu, lambda, 1.0, "rejected solution".into());

    let mut rows = Vec::with_capacity(6);
    for k in 1..=6 {
        let delta = 10f64.powi(-k);
        let t = triple.clone();
        let r = integrate_interval(
            move |x| {
                let (f, _, f2) = t.eval(x);
                let v = if use_second_derivative {
                    f2 * f2
                } else {
                    f * f
                };
                v * x.powf(weight_pow)
            },
            delta,
            1.0,
            spec,
        )?;
        rows.push(GrowthRow {
            window_start: delta,
            partial_integral: r.value,
        });
    }
    let summary = if mu > 0.0 {
        format!("bending partials of the second solution grow ~ delta^(-{mu}) as delta -> 0")
    } else {
        format!("mass partials of e^(-t)*phi grow ~ delta^({mu}) as delta -> 0")
    };
    Ok(GrowthReport {
        branch,
        rows,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{
        identity_gap, limit_probe, probe_ladder, quotient, residual_lhs, ResidualCoefficients,
    };
    use approx::assert_relative_eq;

    fn qspec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn build_for(mu: f64, eps: f64, rate: f64, amplitude: f64) -> BuiltExtremiser {
        let p = ProblemParams::new(mu, eps).unwrap();
        build(&ExtremiserSpec::new(p, rate, amplitude).unwrap()).unwrap()
    }

    #[test]
    fn collapses_to_pure_exponential() {
        // μ=2, ε=0: b₋ = 0, the Kummer factor is 1.
        let e = build_for(2.0, 0.0, 1.0, 1.0);
        assert!(!e.membership_warning);
        for &x in &[0.1, 1.0, 5.0, 40.0] {
            let (f, f1, f2) = e.triple.eval(x);
            assert_relative_eq!(f, (-x).exp(), max_relative = 1e-12);
            assert_relative_eq!(f1, -(-x).exp(), max_relative = 1e-12);
            assert_relative_eq!(f2, (-x).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn closed_form_value_mu3() {
        // μ=3, ε=2, λ=1: f(x) = 2(1 − e^{−x}(1+x))/x², f(1) = 2(1 − 2/e).
        let e = build_for(3.0, 2.0, 1.0, 1.0);
        let (f, _, _) = e.triple.eval(1.0);
        assert_relative_eq!(f, 0.528_482_235_314_230_7, max_relative = 1e-12);
        for &x in &[0.3f64, 2.0, 10.0] {
            let exact = 2.0 * (1.0 - (-x).exp() * (1.0 + x)) / (x * x);
            let (f, _, _) = e.triple.eval(x);
            assert_relative_eq!(f, exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn negative_branch_against_closed_form() {
        // μ=−1, ε=0: b₋ = −1, f = (x)² e^{−x} ₁F₁(1, 3, x) = 2(1 − e^{−x}(1+x)).
        let e = build_for(-1.0, 0.0, 1.0, 1.0);
        for &x in &[0.2f64, 1.0, 4.0, 15.0] {
            let exact = 2.0 * (1.0 - (-x).exp() * (1.0 + x));
            let (f, _, _) = e.triple.eval(x);
            assert_relative_eq!(f, exact, max_relative = 1e-11);
        }
        let (f, _, _) = e.triple.eval(1.0);
        assert_relative_eq!(
            f,
            2.0 * (1.0 - 2.0 / std::f64::consts::E),
            max_relative = 1e-12
        );
    }

    #[test]
    fn triples_pass_finite_difference_consistency() {
        for &(mu, eps) in &[
            (2.0, 0.0),
            (3.0, 2.0),
            (2.0, 0.75),
            (-1.0, 0.0),
            (-2.5, 0.5),
        ] {
            let e = build_for(mu, eps, 1.0, 1.0);
            let (e1, e2) = e.triple.consistency_errors(&[0.2, 0.7, 1.5, 4.0, 9.0]);
            assert!(e1 <= 1e-6, "mu={mu} eps={eps}: f' mismatch {e1:e}");
            assert!(e2 <= 1e-5, "mu={mu} eps={eps}: f'' mismatch {e2:e}");
        }
    }

    #[test]
    fn branch_and_parameter_gates() {
        assert!(matches!(
            ExtremiserSpec::new(ProblemParams::new(0.0, -1.0).unwrap(), 1.0, 1.0),
            Err(Error::Branch { .. })
        ));
        assert!(ExtremiserSpec::new(ProblemParams::new(2.0, 0.0).unwrap(), 0.0, 1.0).is_err());
        assert!(ExtremiserSpec::new(ProblemParams::new(2.0, 0.0).unwrap(), 1.0, 0.0).is_err());
        // Mismatched branch is rejected by build.
        let mut s = ExtremiserSpec::new(ProblemParams::new(2.0, 0.0).unwrap(), 1.0, 1.0).unwrap();
        s.branch = Branch::MuNegative;
        assert!(matches!(build(&s), Err(Error::Branch { .. })));
    }

    #[test]
    fn membership_warning_at_boundary() {
        // s = 0: the Kummer factor never terminates there (b = μ/2 keeps the
        // numerator parameter positive on either branch), so the doubtful
        // membership is always flagged.
        assert!(build_for(2.0, 1.0, 1.0, 1.0).membership_warning);
        assert!(build_for(-2.0, 1.0, 1.0, 1.0).membership_warning);
        // Away from the boundary: no warning.
        assert!(!build_for(2.0, 0.75, 1.0, 1.0).membership_warning);
        assert!(!build_for(-2.0, 0.5, 1.0, 1.0).membership_warning);
    }

    #[test]
    fn lambda_of_examples() {
        let p = ProblemParams::new(2.0, 0.0).unwrap();
        let t = crate::forms::poly_exp_triple(&[1.0], 1.0);
        assert_relative_eq!(
            lambda_of(&t, &p, &qspec()).unwrap(),
            1.0,
            max_relative = 1e-9
        );

        let t_half = crate::forms::poly_exp_triple(&[1.0], 0.5);
        assert_relative_eq!(
            lambda_of(&t_half, &p, &qspec()).unwrap(),
            0.5,
            max_relative = 1e-9
        );

        let p = ProblemParams::new(3.0, 2.0).unwrap();
        let t = crate::forms::poly_exp_triple(&[1.0], 1.0);
        assert_relative_eq!(
            lambda_of(&t, &p, &qspec()).unwrap(),
            1.5,
            max_relative = 1e-9
        );
    }

    #[test]
    fn euler_lagrange_on_and_off_extremisers() {
        // On the extremiser the residual vanishes pointwise.
        let p = ProblemParams::new(3.0, 2.0).unwrap();
        let e = build_for(3.0, 2.0, 1.0, 1.0);
        for r in euler_lagrange_residual(&e.triple, &p, 1.0, &[0.1, 1.0, 10.0]).unwrap() {
            assert!(
                r.residual.abs() <= 1e-9 * f64::max(r.scale, 1e-30),
                "x={}: {:e} vs scale {:e}",
                r.x,
                r.residual,
                r.scale
            );
        }
        // e^{-x} is not the (3, 2)-extremiser: residual at x=1 is −e^{−1}.
        let t = crate::forms::poly_exp_triple(&[1.0], 1.0);
        let rows = euler_lagrange_residual(&t, &p, 1.0, &[1.0]).unwrap();
        assert_relative_eq!(rows[0].residual, -(-1.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn equality_attainment() {
        for &(mu, eps) in &[(2.0, 0.0), (3.0, 2.0), (2.0, 0.75), (-1.0, 0.0)] {
            let p = ProblemParams::new(mu, eps).unwrap();
            let d = derive(&p).unwrap();
            let e = build_for(mu, eps, 1.0, 1.0);
            let q = quotient(&e.triple, &p, &qspec()).unwrap();
            assert_relative_eq!(q, d.sharp_const, max_relative = 1e-6);

            let gap = identity_gap(&e.triple, &p, 1.0, d.b_minus, &qspec()).unwrap();
            let fv = form_values(&e.triple, &p, &qspec()).unwrap();
            assert!(gap.abs() <= f64::max(100.0 * fv.err, 1e-9), "gap {gap:e}");

            let res = residual_lhs(
                &e.triple,
                &p,
                &ResidualCoefficients {
                    alpha: 1.0,
                    beta: mu,
                    gamma: (mu - d.b_minus) * 1.0,
                },
                &qspec(),
            )
            .unwrap();
            assert!(res <= 1e-8 * f64::max(fv.bending, 1.0), "residual {res:e}");

            // Fixed point: the equality-case rate is the build rate.
            let l = lambda_of(&e.triple, &p, &qspec()).unwrap();
            assert_relative_eq!(l, 1.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn lambda_of_degenerate_denominator() {
        let p = ProblemParams::new(2.0, 0.0).unwrap();
        let zero = crate::forms::poly_exp_triple(&[0.0], 1.0);
        assert!(matches!(
            lambda_of(&zero, &p, &qspec()),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn amplitude_invariance() {
        let p = ProblemParams::new(3.0, 2.0).unwrap();
        let e1 = build_for(3.0, 2.0, 1.0, 1.0);
        let e2 = build_for(3.0, 2.0, 1.0, 2.0);
        let q1 = quotient(&e1.triple, &p, &qspec()).unwrap();
        let q2 = quotient(&e2.triple, &p, &qspec()).unwrap();
        assert_relative_eq!(q1, q2, max_relative = 1e-10);
        let l1 = lambda_of(&e1.triple, &p, &qspec()).unwrap();
        let l2 = lambda_of(&e2.triple, &p, &qspec()).unwrap();
        assert_relative_eq!(l1, l2, max_relative = 1e-10);
    }

    #[test]
    fn negative_branch_origin_slope() {
        // Near 0 the μ<0 extremiser behaves like (λx)^{1−μ}: log-log slope
        // 1−μ over [1e-6, 1e-4].
        for &mu in &[-1.0, -2.5] {
            let e = build_for(mu, 0.0, 1.0, 1.0);
            let (f_lo, _, _) = e.triple.eval(1e-6);
            let (f_hi, _, _) = e.triple.eval(1e-4);
            let slope = (f_hi.abs().ln() - f_lo.abs().ln()) / (1e-4f64.ln() - 1e-6f64.ln());
            assert_relative_eq!(slope, 1.0 - mu, max_relative = 1e-3);
        }
    }

    #[test]
    fn lemma_decay_ladder_for_exponential_extremiser() {
        let p = ProblemParams::new(2.0, 0.0).unwrap();
        let e = build_for(2.0, 0.0, 1.0, 1.0);
        let rows = limit_probe(&e.triple, &p, &probe_ladder()).unwrap();
        // Downward from x=0.1 toward 0 and from x=10 toward infinity, every
        // monitor shrinks monotonically and the extremes are tiny.
        for pair in rows.windows(2) {
            if pair[1].x <= 0.1 {
                assert!(pair[0].g1 <= pair[1].g1);
                assert!(pair[0].g2 <= pair[1].g2);
                assert!(pair[0].g3 <= pair[1].g3);
            }
            if pair[0].x >= 10.0 {
                assert!(pair[1].g1 <= pair[0].g1);
                assert!(pair[1].g2 <= pair[0].g2);
                assert!(pair[1].g3 <= pair[0].g3);
            }
        }
        let first = rows.first().unwrap();
        let last = rows.last().unwrap();
        for g in [first.g1, first.g2, first.g3, last.g1, last.g2, last.g3] {
            assert!(g <= 1e-8, "{g:e}");
        }
    }

    #[test]
    fn rejected_solution_growth_mu_positive() {
        // μ=2.5, ε=0: bending partials of the second solution grow ~ δ^{−μ}.
        let p = ProblemParams::new(2.5, 0.0).unwrap();
        let rep = rejected_solution_evidence(&p, 1.0, &qspec()).unwrap();
        assert_eq!(rep.branch, Branch::MuPositive);
        for w in rep.rows.windows(2) {
            assert!(w[1].partial_integral > w[0].partial_integral, "must grow");
        }
        // Growth rate between consecutive decades approaches 10^{2.5}.
        let r5 = rep.rows[4].partial_integral;
        let r6 = rep.rows[5].partial_integral;
        let ratio = r6 / r5;
        assert!(
            ratio > 10f64.powf(2.5) * 0.5 && ratio < 10f64.powf(2.5) * 2.0,
            "{ratio}"
        );
    }

    #[test]
    fn rejected_solution_growth_mu_negative() {
        // μ=−1, ε=0: φ = e^t exactly, so the partials are ∫_δ¹ t^{−2} dt = 1/δ − 1.
        let p = ProblemParams::new(-1.0, 0.0).unwrap();
        let rep = rejected_solution_evidence(&p, 1.0, &qspec()).unwrap();
        assert_eq!(rep.branch, Branch::MuNegative);
        for (k, row) in rep.rows.iter().enumerate() {
            let delta = 10f64.powi(-(k as i32 + 1));
            assert_relative_eq!(row.partial_integral, 1.0 / delta - 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn rejected_solution_gates() {
        assert!(
            rejected_solution_evidence(&ProblemParams::new(1.0, 0.0).unwrap(), 1.0, &qspec())
                .is_err()
        );
        // μ=2, ε=0: the ψ parameters hit the pole at 2−μ = 0.
        let r = rejected_solution_evidence(&ProblemParams::new(2.0, 0.0).unwrap(), 1.0, &qspec());
        assert!(matches!(r, Err(Error::Pole { .. })), "{r:?}");
    }
}
