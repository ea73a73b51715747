//! Cross-checks against reference values computed independently with
//! 30-digit arithmetic (mpmath quadrature and hyp1f1), at parameter points
//! none of the closed-form anchors cover.

use approx::assert_relative_eq;

use sharpline::extremiser::{build, lambda_of, ExtremiserSpec};
use sharpline::forms::{form_values, norm_prime_sq, poly_exp_triple, quotient};
use sharpline::problem::ProblemParams;
use sharpline::quadrature::QuadratureSpec;

#[test]
fn forms_against_high_precision_reference() {
    // f = (1+x)e^{-x}, mu = 1.7, eps = 0.4.
    let params = ProblemParams::new(1.7, 0.4).unwrap();
    let f = poly_exp_triple(&[1.0, 1.0], 1.0);
    let spec = QuadratureSpec::default();
    let fv = form_values(&f, &params, &spec).unwrap();
    assert_relative_eq!(fv.bending, 0.528_711_029_711_090_975, max_relative = 1e-10);
    assert_relative_eq!(fv.hardy, 0.964_780_824_813_338_642, max_relative = 1e-10);
    assert_relative_eq!(fv.dirichlet, 0.593_696_755_669_510_351, max_relative = 1e-10);
    assert_relative_eq!(fv.norm_sq, 3.320_831_948_286_229_36, max_relative = 1e-10);

    let np = norm_prime_sq(&f, &params, &spec).unwrap();
    assert_relative_eq!(np, 3.593_611_538_728_977_36, max_relative = 1e-10);

    let q = quotient(&f, &params, &spec).unwrap();
    assert_relative_eq!(q, 1.447_163_773_471_404_63, max_relative = 1e-10);
    // Strictly above the sharp constant for this non-extremal function.
    assert!(q > 1.140_390_834_580_027_36);

    let l = lambda_of(&f, &params, &spec).unwrap();
    assert_relative_eq!(l, 0.657_147_517_439_551_152, max_relative = 1e-10);
}

#[test]
fn extremiser_triple_against_high_precision_reference() {
    // mu = 1.7, eps = 0.4, lambda = 1.3, C = 0.7, evaluated at x = 2.3.
    let params = ProblemParams::new(1.7, 0.4).unwrap();
    let built = build(&ExtremiserSpec::new(params, 1.3, 0.7).unwrap()).unwrap();
    let (f, f1, f2) = built.triple.eval(2.3);
    assert_relative_eq!(f, 0.079_507_807_942_944_144_7, max_relative = 1e-12);
    assert_relative_eq!(f1, -0.061_275_711_793_447_476_2, max_relative = 1e-12);
    assert_relative_eq!(f2, 0.061_230_295_001_506_165_7, max_relative = 1e-11);

    // Negative branch, mu = -1.6, eps = 0.3, lambda = 0.9, C = 1.1: one
    // point on the series path and one far out on the expansion path.
    let params = ProblemParams::new(-1.6, 0.3).unwrap();
    let built = build(&ExtremiserSpec::new(params, 0.9, 1.1).unwrap()).unwrap();
    let (f, _, _) = built.triple.eval(1.4);
    assert_relative_eq!(f, 0.907_048_276_613_519_344, max_relative = 1e-12);
    let (f, _, _) = built.triple.eval(400.0);
    assert_relative_eq!(f, 16.016_123_007_822_555_5, max_relative = 1e-11);
}
