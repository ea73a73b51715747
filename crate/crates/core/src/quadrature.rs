//! Double-exponential quadrature for integrals on (0, ∞) and on finite
//! intervals.
//!
//! `integrate_halfline` splits at `spec.split`: a tanh-sinh panel on
//! (0, split] absorbs algebraic endpoint behaviour x^p (p > −1), and an
//! exp-sinh panel on [split, ∞) handles the decaying tail. Each panel is the
//! trapezoid rule over a transformed variable, refined by halving the step
//! until two consecutive levels agree within tolerance. Integrands are never
//! evaluated at x = 0.
//!
//! Divergent integrands are not computed: a tail whose node contributions
//! never drop below the cut threshold before the transform runs out of range
//! is reported as `NonConvergence`, which callers treat as divergence
//! evidence.

use crate::error::{Error, Result};

/// Parameters controlling half-line quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Target relative error.
    pub rel_tol: f64,
    /// Absolute tolerance floor for near-zero integrals.
    pub abs_floor: f64,
    /// Split point between the endpoint panel and the tail panel.
    pub split: f64,
    /// Maximum number of step halvings per panel.
    pub max_refinements: u32,
    /// Tail contributions below `tail_cut * max(1, |sum|)` close a tail.
    pub tail_cut: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_floor: 1e-15,
            split: 1.0,
            max_refinements: 12,
            tail_cut: 1e-18,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::Parameter("rel_tol must be > 0".into()));
        }
        if !(self.split > 0.0) {
            return Err(Error::Parameter("split must be > 0".into()));
        }
        if self.max_refinements < 1 {
            return Err(Error::Parameter("max_refinements must be >= 1".into()));
        }
        if !(self.tail_cut > 0.0) || !(self.abs_floor >= 0.0) {
            return Err(Error::Parameter("tail_cut/abs_floor out of range".into()));
        }
        Ok(())
    }
}

/// Result of one integral.
#[derive(Debug, Clone, Copy)]
pub struct IntegralResult {
    pub value: f64,
    /// Difference between the last two refinement levels (0 for a zero
    /// integrand caught at level 0).
    pub err_estimate: f64,
    pub refinements_used: u32,
}

const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;
/// |t| caps for the transformed variable. Past these the node positions
/// underflow/overflow f64 and contributions can no longer be resolved.
const TANH_SINH_T_CAP: f64 = 6.5;
const EXP_SINH_T_CAP: f64 = 6.5;
/// exp(v) overflows past ~709.
const EXP_ARG_CAP: f64 = 700.0;

/// One transformed integration panel.
#[derive(Debug, Clone, Copy)]
enum Panel {
    /// x = mid + half·tanh((π/2)·sinh t) on [lo, hi].
    TanhSinh { lo: f64, hi: f64 },
    /// x = lo·(1 + exp((π/2)·sinh t)) on [lo, ∞).
    ExpSinh { lo: f64 },
}

/// A node: abscissa and trapezoid weight (without the step factor h).
struct Node {
    x: f64,
    w: f64,
}

impl Panel {
    fn t_cap(&self) -> f64 {
        match self {
            Panel::TanhSinh { .. } => TANH_SINH_T_CAP,
            Panel::ExpSinh { .. } => EXP_SINH_T_CAP,
        }
    }

    /// Node at parameter t, or None when the transform has degenerated
    /// (abscissa indistinguishable from an endpoint, or weight under/overflow).
    fn node(&self, t: f64) -> Option<Node> {
        match *self {
            Panel::TanhSinh { lo, hi } => {
                let half = 0.5 * (hi - lo);
                let u = FRAC_PI_2 * t.sinh();
                // 1 ∓ tanh(u) computed as 2/(1 + e^{±2u}) to keep the node
                // strictly inside the interval for large |u|.
                let e = (-2.0 * u.abs()).exp();
                let gap = half * 2.0 * e / (1.0 + e);
                let x = if t >= 0.0 { hi - gap } else { lo + gap };
                if gap == 0.0 || (t < 0.0 && x <= lo) || (t >= 0.0 && x >= hi) {
                    return None;
                }
                // dx/dt = half · (π/2) cosh t · sech²(u)
                let sech = 2.0 * (-u.abs()).exp() / (1.0 + e);
                let w = half * FRAC_PI_2 * t.cosh() * sech * sech;
                if w == 0.0 || !w.is_finite() {
                    return None;
                }
                Some(Node { x, w })
            }
            Panel::ExpSinh { lo } => {
                let v = FRAC_PI_2 * t.sinh();
                if v > EXP_ARG_CAP {
                    return None;
                }
                let ev = v.exp();
                let x = lo * (1.0 + ev);
                if !(x > lo) || !x.is_finite() {
                    return None;
                }
                let w = lo * ev * FRAC_PI_2 * t.cosh();
                if w == 0.0 || !w.is_finite() {
                    return None;
                }
                Some(Node { x, w })
            }
        }
    }
}

/// Neumaier compensated accumulator.
#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        self.comp += if self.sum.abs() >= v.abs() {
            (self.sum - t) + v
        } else {
            (v - t) + self.sum
        };
        self.sum = t;
    }
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

struct SideSum {
    sum: Kahan,
    /// Σ|contribution| — the rounding-noise scale of the side.
    mass: f64,
    tail_ok: bool,
}

/// Sums one side (t > 0 or t < 0) of the trapezoid at step h, visiting
/// `k = start, start + stride, ...`. The tail closes once two consecutive
/// contributions fall below the cut; hitting the transform cap with live
/// contributions marks the tail as unresolved.
fn sum_side<F: Fn(f64) -> f64>(
    h: &F,
    panel: Panel,
    step: f64,
    sign: f64,
    start: u64,
    stride: u64,
    cut: f64,
    level_scale: f64,
) -> Result<SideSum> {
    let mut acc = Kahan::default();
    let mut mass = 0.0f64;
    let mut small_run = 0u32;
    let mut last_contrib = 0.0f64;
    let mut k = start;
    loop {
        let t = sign * (k as f64) * step;
        if t.abs() > panel.t_cap() {
            // Tail still live at the cap: cannot certify the truncation.
            return Ok(SideSum {
                sum: acc,
                mass,
                tail_ok: last_contrib.abs() <= cut * f64::max(1.0, level_scale),
            });
        }
        match panel.node(t) {
            None => {
                // Transform degenerated; fine only if contributions had
                // already become negligible.
                let ok = small_run > 0
                    || last_contrib.abs() <= cut.sqrt() * f64::max(1.0, level_scale)
                    || k == start;
                return Ok(SideSum {
                    sum: acc,
                    mass,
                    tail_ok: ok,
                });
            }
            Some(Node { x, w }) => {
                let hx = h(x);
                if !hx.is_finite() {
                    // Deep in a tail the integrand can overflow f64 range
                    // (or produce 0·inf) past the point where contributions
                    // matter; that ends the walk like a degenerate node. A
                    // non-finite value in the bulk is a real domain error.
                    if t.abs() >= 2.5 {
                        let ok = small_run > 0
                            || last_contrib.abs() <= cut.sqrt() * f64::max(1.0, level_scale);
                        return Ok(SideSum {
                            sum: acc,
                            mass,
                            tail_ok: ok,
                        });
                    }
                    return Err(Error::Domain {
                        x,
                        context: "integrand",
                    });
                }
                let contrib = hx * w;
                acc.add(contrib);
                mass += contrib.abs();
                last_contrib = contrib;
                let scale = f64::max(1.0, f64::max(level_scale, acc.value().abs()));
                if contrib.abs() <= cut * scale {
                    small_run += 1;
                    if small_run >= 2 {
                        return Ok(SideSum {
                            sum: acc,
                            mass,
                            tail_ok: true,
                        });
                    }
                } else {
                    small_run = 0;
                }
            }
        }
        k += stride;
    }
}

/// Trapezoid sum over one panel with step halving until two consecutive
/// levels agree within tolerance.
fn integrate_panel<F: Fn(f64) -> f64>(
    h: &F,
    panel: Panel,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let mut step = 1.0f64;
    let mut prev: Option<f64> = None;
    let mut value = 0.0f64;
    let mut mass = 0.0f64;
    let mut err = f64::INFINITY;
    let mut tails_resolved = false;

    for level in 0..=spec.max_refinements {
        let (sum, level_mass, tail_ok) = if level == 0 {
            let centre = {
                let n = panel.node(0.0).expect("centre node is always valid");
                let hx = h(n.x);
                if !hx.is_finite() {
                    return Err(Error::Domain {
                        x: n.x,
                        context: "integrand",
                    });
                }
                hx * n.w
            };
            let scale = centre.abs();
            let right = sum_side(h, panel, step, 1.0, 1, 1, spec.tail_cut, scale)?;
            let left = sum_side(h, panel, step, -1.0, 1, 1, spec.tail_cut, scale)?;
            let mut acc = Kahan::default();
            acc.add(centre);
            acc.add(right.sum.value());
            acc.add(left.sum.value());
            (
                acc.value() * step,
                (centre.abs() + right.mass + left.mass) * step,
                right.tail_ok && left.tail_ok,
            )
        } else {
            // Refinement adds the odd multiples of the halved step.
            step *= 0.5;
            let scale = value.abs() / step;
            let right = sum_side(h, panel, step, 1.0, 1, 2, spec.tail_cut, scale)?;
            let left = sum_side(h, panel, step, -1.0, 1, 2, spec.tail_cut, scale)?;
            let odd = right.sum.value() + left.sum.value();
            (
                0.5 * value + step * odd,
                0.5 * mass + step * (right.mass + left.mass),
                right.tail_ok && left.tail_ok,
            )
        };

        tails_resolved = tail_ok;
        mass = level_mass;
        // Sign-cancelling integrands cannot be resolved below the rounding
        // noise of their node mass; the floor reflects that.
        let noise = f64::max(spec.abs_floor, 1e-15 * mass);
        if let Some(p) = prev {
            err = (sum - p).abs();
            value = sum;
            if tail_ok && err <= f64::max(spec.rel_tol * sum.abs(), noise) {
                return Ok(IntegralResult {
                    value,
                    err_estimate: err,
                    refinements_used: level,
                });
            }
        } else {
            value = sum;
            // A zero level-0 sum with resolved tails is an exactly zero
            // integrand as far as the nodes can see.
            if tail_ok && sum == 0.0 {
                return Ok(IntegralResult {
                    value: 0.0,
                    err_estimate: 0.0,
                    refinements_used: 0,
                });
            }
        }
        prev = Some(value);
    }

    let detail = if tails_resolved {
        format!("levels still differ by {err:.3e}")
    } else {
        "tail contributions never decayed below the cut".to_string()
    };
    Err(Error::NonConvergence {
        refinements: spec.max_refinements,
        detail,
    })
}

/// Computes `∫₀^∞ h(x) dx` for integrands with x^p (p > −1) behaviour at 0
/// and decay at infinity. Deterministic for a fixed spec.
pub fn integrate_halfline<F: Fn(f64) -> f64>(
    h: F,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    spec.validate()?;
    let head = integrate_panel(
        &h,
        Panel::TanhSinh {
            lo: 0.0,
            hi: spec.split,
        },
        spec,
    )?;
    let tail = integrate_panel(&h, Panel::ExpSinh { lo: spec.split }, spec)?;
    Ok(IntegralResult {
        value: head.value + tail.value,
        err_estimate: head.err_estimate + tail.err_estimate,
        refinements_used: head.refinements_used.max(tail.refinements_used),
    })
}

/// Computes `∫ₐᵇ h(x) dx` by a single tanh-sinh panel. Endpoints are never
/// evaluated.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    h: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    spec.validate()?;
    if !(lo < hi) {
        return Err(Error::Parameter(format!(
            "interval bounds must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    integrate_panel(&h, Panel::TanhSinh { lo, hi }, spec)
}
