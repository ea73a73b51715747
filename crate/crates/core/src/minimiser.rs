//! Direct minimisation of the quotient `(cᵀAc)(cᵀBc)/(cᵀDc)²` over a
//! finite-dimensional trial space, as an independent re-derivation of the
//! sharp constant.
//!
//! Trial functions are `φ_k(x) = x^{p+k} e^{−scale·x}` with p = 0 for μ > 0
//! and p = 1−μ for μ < 0 (a Laguerre-type span). Every Gram entry is
//! computed twice — by half-line quadrature and by the exact Gamma closed
//! form — and the two routes must agree to 1e-9.
//!
//! The objective is a product of quadratic forms and nonconvex; it is
//! minimised by projected gradient descent on the ellipsoid cᵀDc = 1 with
//! seeded Gaussian restarts. Monomial spans are badly conditioned, so the
//! optimizer works in D-whitened coordinates internally (the ellipsoid
//! becomes the unit sphere) and reports a condition number alongside the
//! result; the stored matrices are the raw ones.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extremiser::Branch;
use crate::polyexp::PolyExp;
use crate::problem::ProblemParams;
use crate::quadrature::{integrate_halfline, QuadratureSpec};

/// Largest supported basis size; monomial spans lose all remaining digits
/// beyond this even with preconditioning.
pub const MAX_BASIS: usize = 24;

/// Cross-check tolerance between quadrature and Gamma-form Gram entries.
const CROSS_CHECK_TOL: f64 = 1e-9;

/// A trial basis with its three Gram matrices.
#[derive(Debug, Clone)]
pub struct BasisModel {
    pub k: usize,
    pub branch: Branch,
    pub scale: f64,
    /// Gram of ∫ φᵢ″ φⱼ″ x^{μ+1}.
    pub gram_bending: DMatrix<f64>,
    /// Gram of ∫ (x² φᵢ′ φⱼ′ − ε φᵢ φⱼ) x^{μ−1}.
    pub gram_hardy: DMatrix<f64>,
    /// Gram of ∫ φᵢ′ φⱼ′ x^{μ}.
    pub gram_dirichlet: DMatrix<f64>,
    /// Condition number of the Dirichlet Gram (ratio of extreme eigenvalues).
    pub cond_dirichlet: f64,
    /// Worst relative disagreement between the two Gram evaluation routes.
    pub cross_check_err: f64,
}

/// Optimiser options. `warm_start` adds one deterministic extra restart from
/// the given raw-coordinate vector.
#[derive(Debug, Clone)]
pub struct MinimiseOpts {
    pub restarts: u32,
    pub max_iters: u32,
    pub grad_tol: f64,
    pub seed: u64,
    pub warm_start: Option<Vec<f64>>,
}

impl Default for MinimiseOpts {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 5000,
            grad_tol: 1e-7,
            seed: 42,
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimisationResult {
    pub value: f64,
    /// Raw-coordinate coefficients of the best point, D-normalised.
    pub coefficients: Vec<f64>,
    pub restarts_used: u32,
    pub converged: bool,
    /// Preconditioned gradient norm at the best point.
    pub grad_norm: f64,
}

/// Builds the Gram matrices for (μ, ε) with K basis functions. Entries are
/// quadrature values; the Gamma closed form cross-checks each one.
pub fn build_basis(
    params: &ProblemParams,
    k: usize,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<BasisModel> {
    let ProblemParams { mu, eps } = *params;
    if mu == 0.0 {
        return Err(Error::Parameter("no trial family for mu = 0".into()));
    }
    if k < 1 || k > MAX_BASIS {
        return Err(Error::Parameter(format!(
            "basis size {k} outside 1..={MAX_BASIS}"
        )));
    }
    if !(scale > 0.0) {
        return Err(Error::Parameter(format!("scale must be > 0, got {scale}")));
    }
    let branch = if mu > 0.0 {
        Branch::MuPositive
    } else {
        Branch::MuNegative
    };
    let p = if mu > 0.0 { 0.0 } else { 1.0 - mu };

    let basis: Vec<PolyExp> = (0..k)
        .map(|i| PolyExp::power(p + i as f64, scale))
        .collect();
    let d1: Vec<PolyExp> = basis.iter().map(PolyExp::derivative).collect();
    let d2: Vec<PolyExp> = d1.iter().map(PolyExp::derivative).collect();

    let mut gram_bending = DMatrix::zeros(k, k);
    let mut gram_hardy = DMatrix::zeros(k, k);
    let mut gram_dirichlet = DMatrix::zeros(k, k);
    let mut exact_bending = DMatrix::zeros(k, k);
    let mut exact_hardy = DMatrix::zeros(k, k);
    let mut exact_dirichlet = DMatrix::zeros(k, k);

    for i in 0..k {
        for j in i..k {
            exact_bending[(i, j)] = d2[i].integral_with(&d2[j], mu + 1.0);
            exact_hardy[(i, j)] = d1[i].integral_with(&d1[j], mu + 1.0)
                - eps * basis[i].integral_with(&basis[j], mu - 1.0);
            exact_dirichlet[(i, j)] = d1[i].integral_with(&d1[j], mu);

            let (fi2, fj2) = (d2[i].clone(), d2[j].clone());
            let bending =
                integrate_halfline(move |x| fi2.eval(x) * fj2.eval(x) * x.powf(mu + 1.0), spec)?
                    .value;
            let (fi1, fj1, fi0, fj0) = (
                d1[i].clone(),
                d1[j].clone(),
                basis[i].clone(),
                basis[j].clone(),
            );
            let hardy = integrate_halfline(
                move |x| {
                    (x * x * fi1.eval(x) * fj1.eval(x) - eps * fi0.eval(x) * fj0.eval(x))
                        * x.powf(mu - 1.0)
                },
                spec,
            )?
            .value;
            let (gi1, gj1) = (d1[i].clone(), d1[j].clone());
            let dirichlet =
                integrate_halfline(move |x| gi1.eval(x) * gj1.eval(x) * x.powf(mu), spec)?.value;

            gram_bending[(i, j)] = bending;
            gram_bending[(j, i)] = bending;
            gram_hardy[(i, j)] = hardy;
            gram_hardy[(j, i)] = hardy;
            gram_dirichlet[(i, j)] = dirichlet;
            gram_dirichlet[(j, i)] = dirichlet;
        }
    }

    // Per-matrix cross-check: relative to the entry, floored by the matrix
    // scale (near-zero entries carry the neighbouring entries' quadrature
    // noise).
    let mut worst = 0.0f64;
    for (quad, exact) in [
        (&gram_bending, &exact_bending),
        (&gram_hardy, &exact_hardy),
        (&gram_dirichlet, &exact_dirichlet),
    ] {
        let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..k {
            for j in i..k {
                let denom = f64::max(exact[(i, j)].abs(), 1e-3 * scale).max(1e-300);
                worst = worst.max((quad[(i, j)] - exact[(i, j)]).abs() / denom);
            }
        }
    }
    if !worst.is_finite() || worst > CROSS_CHECK_TOL {
        return Err(Error::Precision {
            context: "gram cross-check",
            detail: format!("quadrature vs Gamma closed form disagree by {worst:.3e}"),
        });
    }

    // Positive semidefiniteness of the two energy forms, and the condition
    // report for the normalisation form.
    let eig_d = gram_dirichlet.clone().symmetric_eigen().eigenvalues;
    let (mut dmin, mut dmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in eig_d.iter() {
        dmin = dmin.min(v);
        dmax = dmax.max(v);
    }
    let eig_a = gram_bending.clone().symmetric_eigen().eigenvalues;
    let amin = eig_a.iter().cloned().fold(f64::INFINITY, f64::min);
    let amax = eig_a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if dmin < -1e-10 * dmax.abs() || amin < -1e-10 * amax.abs() {
        return Err(Error::Precision {
            context: "gram assembly",
            detail: format!("energy Gram not PSD: min eigenvalues {amin:.3e}, {dmin:.3e}"),
        });
    }
    let cond_dirichlet = if dmin > 0.0 {
        dmax / dmin
    } else {
        f64::INFINITY
    };

    Ok(BasisModel {
        k,
        branch,
        scale,
        gram_bending,
        gram_hardy,
        gram_dirichlet,
        cond_dirichlet,
        cross_check_err: worst,
    })
}

/// Objective and gradient of `F(c) = (cᵀAc)(cᵀBc)/(cᵀDc)²` in the given
/// (raw) coordinates.
pub fn quotient_gradient(model: &BasisModel, c: &DVector<f64>) -> (f64, DVector<f64>) {
    let ac = &model.gram_bending * c;
    let bc = &model.gram_hardy * c;
    let dc = &model.gram_dirichlet * c;
    let a = c.dot(&ac);
    let b = c.dot(&bc);
    let d = c.dot(&dc);
    let f = a * b / (d * d);
    let grad = (ac * (2.0 * b) + bc * (2.0 * a)) / (d * d) - dc * (4.0 * a * b / (d * d * d));
    (f, grad)
}

/// D-whitened working coordinates: columns of `basis` are D-orthonormal
/// directions of the trial span, so the normalisation ellipsoid becomes the
/// unit sphere and projection is plain renormalisation. Directions whose
/// Dirichlet eigenvalue falls below 1e-13 of the largest are numerically
/// null and dropped (a conservative restriction of the span).
struct Whitened {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    /// k x m map from whitened to raw coordinates.
    basis: DMatrix<f64>,
    /// D_raw * basis, for projecting raw vectors into whitened coordinates.
    proj: DMatrix<f64>,
}

fn whiten(model: &BasisModel) -> Result<Whitened> {
    let k = model.k;
    let mut inv_scale = DVector::zeros(k);
    for i in 0..k {
        let dii = model.gram_dirichlet[(i, i)];
        if !(dii > 0.0) {
            return Err(Error::Parameter(format!(
                "dirichlet Gram has non-positive diagonal entry at {i}"
            )));
        }
        inv_scale[i] = 1.0 / dii.sqrt();
    }
    let s = DMatrix::from_diagonal(&inv_scale);
    let d_hat = &s * &model.gram_dirichlet * &s;
    let eig = d_hat.symmetric_eigen();
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..k)
        .filter(|&i| eig.eigenvalues[i] > 1e-13 * max_ev)
        .collect();
    if keep.is_empty() {
        return Err(Error::Parameter(
            "dirichlet Gram is numerically null".into(),
        ));
    }
    let mut basis = DMatrix::zeros(k, keep.len());
    for (col, &i) in keep.iter().enumerate() {
        let v = eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt();
        basis.set_column(col, &(&s * v));
    }
    let a = basis.transpose() * &model.gram_bending * &basis;
    let b = basis.transpose() * &model.gram_hardy * &basis;
    let proj = &model.gram_dirichlet * &basis;
    Ok(Whitened {
        a: symmetrise(a),
        b: symmetrise(b),
        basis,
        proj,
    })
}

fn symmetrise(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Box-Muller standard normal draw.
fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Minimises the quotient by projected gradient descent on the D-unit
/// sphere (normalised-gradient direction, backtracking halving from 1.0)
/// with seeded Gaussian restarts. Deterministic for a fixed seed.
pub fn minimise_quotient(model: &BasisModel, opts: &MinimiseOpts) -> Result<MinimisationResult> {
    let w = whiten(model)?;
    let m = w.basis.ncols();
    let eval = |y: &DVector<f64>| -> (f64, DVector<f64>) {
        let ay = &w.a * y;
        let by = &w.b * y;
        let a = y.dot(&ay);
        let b = y.dot(&by);
        let n = y.dot(y);
        let f = a * b / (n * n);
        let grad = (ay * (2.0 * b) + by * (2.0 * a)) / (n * n) - y * (4.0 * a * b / (n * n * n));
        (f, grad)
    };

    let mut best_value = f64::INFINITY;
    let mut best_y: Option<DVector<f64>> = None;
    let mut best_grad = f64::INFINITY;
    let mut converged = false;
    let mut restarts_used = 0u32;

    let warm: Option<DVector<f64>> = opts.warm_start.as_ref().map(|raw| {
        let mut c = DVector::zeros(model.k);
        for i in 0..model.k.min(raw.len()) {
            c[i] = raw[i];
        }
        w.proj.transpose() * c
    });

    for r in 0..opts.restarts + warm.is_some() as u32 {
        restarts_used += 1;
        let y0 = if r == 0 && warm.is_some() {
            warm.clone().unwrap()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
            DVector::from_fn(m, |_, _| gaussian(&mut rng))
        };
        let norm = y0.norm();
        if !(norm > 0.0) {
            continue;
        }
        let mut y = y0 / norm;
        let (mut f, mut grad) = eval(&y);
        for _ in 0..opts.max_iters {
            let gn = grad.norm();
            if gn <= opts.grad_tol {
                converged = true;
                break;
            }
            let dir = -&grad / gn;
            let mut step = 1.0f64;
            let mut advanced = false;
            for _ in 0..60 {
                let cand = &y + &dir * step;
                let cn = cand.norm();
                if cn > 0.0 {
                    let cand = cand / cn;
                    let (fc, gc) = eval(&cand);
                    if fc < f {
                        y = cand;
                        f = fc;
                        grad = gc;
                        advanced = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !advanced {
                // Descent exhausted at f64 resolution.
                converged = converged || grad.norm() <= opts.grad_tol.max(1e-6);
                break;
            }
        }
        if f < best_value {
            best_value = f;
            best_grad = grad.norm();
            best_y = Some(y);
        }
    }

    let y = best_y.ok_or_else(|| Error::Parameter("no feasible start point".into()))?;
    // Back to raw coordinates, D-normalised there.
    let raw = &w.basis * y;
    let q = raw.dot(&(&model.gram_dirichlet * &raw));
    let raw = if q > 0.0 { raw / q.sqrt() } else { raw };
    Ok(MinimisationResult {
        value: best_value,
        coefficients: raw.iter().cloned().collect(),
        restarts_used,
        converged,
        grad_norm: best_grad,
    })
}

/// Minimum value per basis size; nested spans make the sequence
/// nonincreasing, realised by warm-starting each size from the previous
/// best point.
pub fn convergence_sweep(
    params: &ProblemParams,
    k_list: &[usize],
    scale: f64,
    spec: &QuadratureSpec,
    opts: &MinimiseOpts,
) -> Result<Vec<(usize, f64)>> {
    let mut rows = Vec::with_capacity(k_list.len());
    let mut warm: Option<Vec<f64>> = None;
    for &k in k_list {
        let model = build_basis(params, k, scale, spec)?;
        let local = MinimiseOpts {
            warm_start: warm.clone(),
            ..opts.clone()
        };
        let res = minimise_quotient(&model, &local)?;
        warm = Some(res.coefficients.clone());
        rows.push((k, res.value));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::derive;
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn gram_entries_match_gamma_oracle() {
        // μ=2, ε=0, K=2, scale=1: first-entry anchors from the factorial forms.
        let p = ProblemParams::new(2.0, 0.0).unwrap();
        let m = build_basis(&p, 2, 1.0, &spec()).unwrap();
        assert_relative_eq!(m.gram_bending[(0, 0)], 0.375, max_relative = 1e-9);
        assert_relative_eq!(m.gram_hardy[(0, 0)], 0.375, max_relative = 1e-9);
        assert_relative_eq!(m.gram_dirichlet[(0, 0)], 0.25, max_relative = 1e-9);
        // D₀₁ = ∫ (−e^{−x})((1−x)e^{−x}) x² dx = 1/8.
        assert_relative_eq!(m.gram_dirichlet[(0, 1)], 0.125, max_relative = 1e-9);
        assert!(m.cross_check_err <= 1e-9);
        for i in 0..m.k {
            assert!(m.gram_dirichlet[(i, i)] > 0.0);
        }
    }

    #[test]
    fn basis_gates() {
        let p = ProblemParams::new(0.0, 0.0).unwrap();
        assert!(build_basis(&p, 4, 1.0, &spec()).is_err());
        let p = ProblemParams::new(2.0, 0.0).unwrap();
        assert!(build_basis(&p, 0, 1.0, &spec()).is_err());
        assert!(build_basis(&p, MAX_BASIS + 1, 1.0, &spec()).is_err());
        assert!(build_basis(&p, 4, -1.0, &spec()).is_err());
    }

    #[test]
    fn single_direction_value_is_exact() {
        // K=1: F is constant on the span; value = A₀₀B₀₀/D₀₀² = 9/4.
        let p = ProblemParams::new(2.0, 0.0).unwrap();
        let m = build_basis(&p, 1, 1.0, &spec()).unwrap();
        let r = minimise_quotient(&m, &MinimiseOpts::default()).unwrap();
        assert_relative_eq!(r.value, 2.25, max_relative = 1e-10);
        assert!(r.converged);
    }

    #[test]
    fn enlarged_space_stays_at_sharp_when_extremiser_inside() {
        let p = ProblemParams::new(2.0, 0.0).unwrap();
        let m = build_basis(&p, 8, 1.0, &spec()).unwrap();
        let r = minimise_quotient(&m, &MinimiseOpts::default()).unwrap();
        assert_relative_eq!(r.value, 2.25, max_relative = 1e-6);
        assert!(r.value >= 2.25 - 1e-6);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let p = ProblemParams::new(3.0, 2.0).unwrap();
        let m = build_basis(&p, 5, 1.0, &spec()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c = DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
            if c.dot(&(&m.gram_dirichlet * &c)) < 1e-6 {
                continue;
            }
            let (_, grad) = quotient_gradient(&m, &c);
            for i in 0..5 {
                let h = 1e-6;
                let mut cp = c.clone();
                let mut cm = c.clone();
                cp[i] += h;
                cm[i] -= h;
                let (fp, _) = quotient_gradient(&m, &cp);
                let (fm, _) = quotient_gradient(&m, &cm);
                let fd = (fp - fm) / (2.0 * h);
                let scale = f64::max(grad[i].abs(), f64::max(fd.abs(), 1e-8));
                assert!(
                    (grad[i] - fd).abs() / scale <= 1e-5,
                    "component {i}: analytic {:e} vs fd {fd:e}",
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn lower_bound_respected_across_parameters() {
        for &(mu, eps, k) in &[
            (2.0, 0.0, 6),
            (3.0, 2.0, 6),
            (1.0, 0.125, 5),
            (-1.0, 0.0, 5),
        ] {
            let p = ProblemParams::new(mu, eps).unwrap();
            let d = derive(&p).unwrap();
            let m = build_basis(&p, k, 1.0, &spec()).unwrap();
            let r = minimise_quotient(&m, &MinimiseOpts::default()).unwrap();
            assert!(
                r.value >= d.sharp_const - 1e-6,
                "mu={mu} eps={eps}: {} below sharp {}",
                r.value,
                d.sharp_const
            );
        }
    }

    #[test]
    fn sweep_monotone_and_anchored() {
        let p = ProblemParams::new(2.0, 0.0).unwrap();
        let rows =
            convergence_sweep(&p, &[1, 2, 4, 8], 1.0, &spec(), &MinimiseOpts::default()).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-8, "{rows:?}");
        }
        for (_, v) in &rows {
            assert_relative_eq!(*v, 2.25, max_relative = 1e-8);
        }
        let single = convergence_sweep(&p, &[3], 1.0, &spec(), &MinimiseOpts::default()).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn sweep_approaches_sharp_from_above() {
        // Nonincreasing toward (but never below) the sharp constant when the
        // extremiser is outside every trial space.
        let p = ProblemParams::new(3.0, 2.0).unwrap();
        let opts = MinimiseOpts {
            restarts: 4,
            max_iters: 1500,
            ..MinimiseOpts::default()
        };
        let rows = convergence_sweep(&p, &[2, 4, 8, 12], 1.0, &spec(), &opts).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-8, "{rows:?}");
        }
        let last = rows.last().unwrap().1;
        assert!(last >= 1.0 - 1e-6 && last < 1.2, "{rows:?}");
    }

    #[test]
    fn scale_gauge_invariance() {
        // The span maps onto itself under x -> cx, so the minimum cannot
        // depend on the envelope rate.
        let p = ProblemParams::new(3.0, 2.0).unwrap();
        let mut values = Vec::new();
        for &scale in &[0.5, 1.0, 2.0] {
            let m = build_basis(&p, 6, scale, &spec()).unwrap();
            let r = minimise_quotient(&m, &MinimiseOpts::default()).unwrap();
            values.push(r.value);
        }
        assert_relative_eq!(values[0], values[1], max_relative = 1e-6);
        assert_relative_eq!(values[1], values[2], max_relative = 1e-6);
    }

    #[test]
    fn negative_branch_basis() {
        // μ=−1: φ_k = x^{2+k} e^{−x}; D₀₀ = ∫(2x − x²)² x^{−1} e^{−2x}... via
        // the Gamma oracle: ∫(4x − 4x² + x³) e^{−2x} = 4/4 − 8/8 + 6/16 = 3/8.
        let p = ProblemParams::new(-1.0, 0.0).unwrap();
        let m = build_basis(&p, 3, 1.0, &spec()).unwrap();
        assert_relative_eq!(m.gram_dirichlet[(0, 0)], 0.375, max_relative = 1e-9);
        let r = minimise_quotient(&m, &MinimiseOpts::default()).unwrap();
        assert!(r.value >= 1.0 - 1e-6);
    }
}
