//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each panel is integrated with a 10-point and a 20-point rule; the
//! difference is the panel's error estimate. The panel with the largest
//! estimate is bisected until the summed estimate meets the absolute
//! tolerance or the panel budget is exhausted.
//!
//! Endpoint singularities of the form (b − x)^{s−1} are handled by callers
//! through the power substitutions in [`integrate_right_singular`] and
//! [`integrate_to_infinity`], which make the transformed integrand bounded.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const LOW_ORDER: usize = 10;
const HIGH_ORDER: usize = 20;

/// Default panel budget; 2 × 30 evaluations per panel.
pub const DEFAULT_MAX_PANELS: usize = 4000;

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Nodes and weights on [−1, 1] via Newton iteration on P_n.
fn gauss_legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn rules() -> &'static (Rule, Rule) {
    static RULES: OnceLock<(Rule, Rule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(LOW_ORDER), gauss_legendre(HIGH_ORDER)))
}

fn apply_rule<F: Fn(f64) -> f64>(rule: &Rule, f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let (lo, hi) = rules();
    let coarse = apply_rule(lo, f, a, b);
    let fine = apply_rule(hi, f, a, b);
    let err = if fine.is_finite() && coarse.is_finite() {
        (fine - coarse).abs()
    } else {
        f64::INFINITY
    };
    Panel {
        a,
        b,
        value: fine,
        err,
    }
}

/// Integral of `f` over [a, b] to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_with_budget(f, a, b, tol, DEFAULT_MAX_PANELS)
}

pub fn integrate_with_budget<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || !(tol > 0.0) {
        return Err(Error::domain(
            "quadrature",
            format!("need finite limits and positive tolerance, got [{a}, {b}], tol={tol}"),
        ));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    let first = panel(&f, a, b);
    let mut total_err = first.err;
    heap.push(first);
    let mut panels = 1;
    while total_err > tol {
        if panels >= max_panels {
            return Err(Error::Nonconvergence {
                op: "quadrature",
                msg: format!(
                    "error estimate {total_err:e} above tolerance {tol:e} after {panels} panels"
                ),
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel can no longer be split in double precision.
            return Err(Error::Nonconvergence {
                op: "quadrature",
                msg: format!("panel [{}, {}] collapsed", worst.a, worst.b),
            });
        }
        let left = panel(&f, worst.a, mid);
        let right = panel(&f, mid, worst.b);
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        panels += 1;
        // Re-sum occasionally so cancellation in the running total cannot
        // hide an unconverged panel.
        if panels % 64 == 0 {
            total_err = heap.iter().map(|p| p.err).sum();
        }
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(panels.iter().map(|p| p.value).sum())
}

/// ∫_a^b f(t) dt where f may behave like (b − t)^{σ} near b, σ > −1.
///
/// Uses t = b − (b − a)(1 − u)^κ with κ ≥ 1, so that the transformed
/// integrand behaves like (1 − u)^{κ(σ+1) − 1}. Nodes whose image rounds
/// onto b are dropped; the transformed integrand is bounded there.
pub fn integrate_right_singular<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    kappa: f64,
    tol: f64,
) -> Result<f64> {
    integrate_right_singular_with(|t, _| if t >= b { 0.0 } else { f(t) }, a, b, kappa, tol)
}

/// As [`integrate_right_singular`], but `f` also receives the distance
/// b − t, computed without cancellation, so it can be evaluated right up
/// to the endpoint.
pub fn integrate_right_singular_with<F: Fn(f64, f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    kappa: f64,
    tol: f64,
) -> Result<f64> {
    let len = b - a;
    let g = |u: f64| {
        let s = 1.0 - u;
        let d = len * s.powf(kappa);
        if d <= 0.0 {
            return 0.0;
        }
        f(b - d, d) * len * kappa * s.powf(kappa - 1.0)
    };
    integrate(g, 0.0, 1.0, tol)
}

/// ∫_x0^∞ f(x) dx for f decaying like x^{−p}, p > 1, and x0 > 0.
///
/// Uses x = x0 v^{−κ} with κ = 1/(p − 1), which maps the tail onto
/// v ∈ (0, 1] with a bounded integrand.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, x0: f64, p: f64, tol: f64) -> Result<f64> {
    if !(x0 > 0.0) || !(p > 1.0) {
        return Err(Error::domain(
            "quadrature",
            format!("tail integral needs x0 > 0 and decay p > 1, got x0={x0}, p={p}"),
        ));
    }
    let kappa = 1.0 / (p - 1.0);
    let g = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let x = x0 * v.powf(-kappa);
        if !x.is_finite() {
            return 0.0;
        }
        f(x) * kappa * x0 * v.powf(-kappa - 1.0)
    };
    integrate(g, 0.0, 1.0, tol)
}
