//! Numerical checks of the auxiliary estimates: the Schur-test weight
//! bounds behind the Ȟ_θ norm ceiling, the power-series estimate
//! Σ n^{c−1} w^{2n} ≍ (1 − w²)^{−c}, and the Stirling remainder bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::integrate_to_infinity;
use crate::special_fn::{beta, stirling_remainder, stirling_remainder_bound};

/// Required width of the certified bracket around each weight sum.
pub const W_TAIL_TOL: f64 = 1e-10;

/// Ceiling on the number of summed terms before giving up.
const W_TERM_CAP: usize = 1 << 26;
const W_START_TERMS: usize = 1024;
const QUAD_TOL: f64 = 1e-13;

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }
    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// g(x) = amp · (x + shift)^{−p1} · (x + θ)^{−p2}, positive, decreasing and
/// convex on [0, ∞).
#[derive(Debug, Clone, Copy)]
struct Summand {
    amp: f64,
    shift: f64,
    p1: f64,
    theta: f64,
    p2: f64,
}

impl Summand {
    fn at(&self, x: f64) -> f64 {
        self.amp * (x + self.shift).powf(-self.p1) * (x + self.theta).powf(-self.p2)
    }

    /// Bracket [lo, hi] on Σ_{k≥0} g(k), width below `W_TAIL_TOL`.
    ///
    /// For convex decreasing g the tail Σ_{k≥K} g(k) lies between
    /// ∫_K^∞ g + g(K)/2 (trapezoid) and ∫_{K−½}^∞ g (midpoint).
    fn bracket(&self) -> Result<(f64, f64, usize)> {
        let decay = self.p1 + self.p2;
        let mut acc = Neumaier::default();
        let mut k = 0usize;
        let mut target = W_START_TERMS;
        loop {
            while k < target {
                acc.add(self.at(k as f64));
                k += 1;
            }
            let kf = k as f64;
            let f = |x: f64| self.at(x);
            let lower_tail = integrate_to_infinity(f, kf, decay, QUAD_TOL)? + 0.5 * self.at(kf);
            let upper_tail = integrate_to_infinity(f, kf - 0.5, decay, QUAD_TOL)?;
            let partial = acc.value();
            let lo = partial + lower_tail - QUAD_TOL;
            let hi = partial + upper_tail + QUAD_TOL;
            if hi - lo < W_TAIL_TOL {
                return Ok((lo, hi, k));
            }
            if target >= W_TERM_CAP {
                return Err(Error::ToleranceUnreachable {
                    op: "check_lemma_w_bounds",
                    tol: W_TAIL_TOL,
                    cap: W_TERM_CAP,
                });
            }
            target *= 2;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WSide {
    /// w^{[1]}(n), bounded by B (n+θ)^{−β}.
    Row,
    /// w^{[2]}(k), bounded by B (k+θ)^{α}.
    Col,
}

#[derive(Debug, Clone, Serialize)]
pub struct WBoundEntry {
    pub side: WSide,
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub terms: usize,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WBoundReport {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub beta_constant: f64,
    pub bound_scale: f64,
    pub entries: Vec<WBoundEntry>,
}

impl WBoundReport {
    pub fn violations(&self) -> Vec<&WBoundEntry> {
        self.entries.iter().filter(|e| !e.ok).collect()
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }

    /// Widest certified bracket.
    pub fn max_width(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.upper - e.lower)
            .fold(0.0, f64::max)
    }
}

/// Upper bracket ends of w^{[1]}(n) and w^{[2]}(k) against
/// `bound_scale` × B((1+β)/2, (1−α)/2) × weight. A scale below 1 tightens
/// the bound, which is how a violation can be provoked on purpose.
pub fn check_lemma_w_bounds(
    theta: f64,
    alpha: f64,
    beta_: f64,
    n_list: &[usize],
    k_list: &[usize],
    bound_scale: f64,
) -> Result<WBoundReport> {
    const OP: &str = "check_lemma_w_bounds";
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::domain(OP, format!("theta = {theta} must be > 0")));
    }
    for (name, v) in [("alpha", alpha), ("beta", beta_)] {
        if !(v > -1.0 && v < 1.0) {
            return Err(Error::domain(OP, format!("{name} = {v} not in (-1,1)")));
        }
    }
    if !(bound_scale.is_finite() && bound_scale > 0.0) {
        return Err(Error::domain(
            OP,
            format!("bound scale {bound_scale} must be > 0"),
        ));
    }
    let b = beta(0.5 * (1.0 + beta_), 0.5 * (1.0 - alpha))?;
    let gamma = 1.0 + 0.5 * (beta_ - alpha);
    let cells: Vec<(WSide, usize)> = n_list
        .iter()
        .map(|&n| (WSide::Row, n))
        .chain(k_list.iter().map(|&k| (WSide::Col, k)))
        .collect();
    let entries = cells
        .into_par_iter()
        .map(|(side, i)| {
            let base = i as f64 + theta;
            let (summand, weight) = match side {
                WSide::Row => (
                    Summand {
                        amp: base.powf(0.5 * (1.0 - beta_)),
                        shift: i as f64 + 2.0 * theta,
                        p1: gamma,
                        theta,
                        p2: 0.5 * (1.0 + alpha),
                    },
                    base.powf(-beta_),
                ),
                WSide::Col => (
                    Summand {
                        amp: base.powf(0.5 * (1.0 + alpha)),
                        shift: i as f64 + 2.0 * theta,
                        p1: gamma,
                        theta,
                        p2: 0.5 * (1.0 - beta_),
                    },
                    base.powf(alpha),
                ),
            };
            let (lower, upper, terms) = summand.bracket()?;
            let bound = bound_scale * b * weight;
            Ok(WBoundEntry {
                side,
                index: i,
                lower,
                upper,
                terms,
                bound,
                ok: upper <= bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WBoundReport {
        theta,
        alpha,
        beta: beta_,
        beta_constant: b,
        bound_scale,
        entries,
    })
}

/// Absolute accuracy of each R(w) in [`check_est`].
pub const EST_TAIL_TOL: f64 = 1e-14;
const EST_TERM_CAP: usize = 100_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct EstReport {
    pub c: f64,
    /// (w, R(w)) with R(w) = (1 − w²)^c Σ_{n≥1} n^{c−1} w^{2n}.
    pub values: Vec<(f64, f64)>,
    pub min: f64,
    pub max: f64,
    pub ok: bool,
}

fn est_ratio(c: f64, w: f64) -> Result<f64> {
    let x = w * w;
    let lx = x.ln();
    let scale = (1.0 - x).powf(c);
    let mut acc = Neumaier::default();
    // terms increase up to n ≈ (c − 1)/(−ln x) and decrease after
    let peak = if c > 1.0 {
        ((c - 1.0) / -lx).ceil() as usize
    } else {
        1
    };
    for n in 1..=EST_TERM_CAP {
        let nf = n as f64;
        let t = ((c - 1.0) * nf.ln() + nf * lx).exp();
        acc.add(t);
        if n >= peak {
            // ratio of successive terms is at most q from here on
            let q = ((nf + 1.0) / nf).powf((c - 1.0).max(0.0)) * x;
            if q < 1.0 {
                let tail = t * q / (1.0 - q);
                if tail * scale < EST_TAIL_TOL {
                    return Ok(scale * acc.value());
                }
            }
        }
    }
    Err(Error::ToleranceUnreachable {
        op: "check_est",
        tol: EST_TAIL_TOL,
        cap: EST_TERM_CAP,
    })
}

pub fn check_est(c: f64, w_list: &[f64]) -> Result<EstReport> {
    const OP: &str = "check_est";
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain(OP, format!("c = {c} must be > 0")));
    }
    if w_list.is_empty() {
        return Err(Error::domain(OP, "w list must be nonempty"));
    }
    if let Some(w) = w_list.iter().find(|w| !(**w > 0.0 && **w < 1.0)) {
        return Err(Error::domain(OP, format!("w = {w} not in (0,1)")));
    }
    let values = w_list
        .par_iter()
        .map(|&w| Ok((w, est_ratio(c, w)?)))
        .collect::<Result<Vec<_>>>()?;
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let max = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(EstReport {
        c,
        values,
        min,
        max,
        ok: min.is_finite() && max.is_finite() && min > 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StirlingEntry {
    pub x: f64,
    pub remainder: f64,
    pub bound: f64,
    pub ok: bool,
}

/// |Γ(x) / (√(2π) x^{x−½} e^{−x}) − 1| ≤ e^{1/(12x)} − 1 at each x.
pub fn check_stirling(xs: &[f64]) -> Result<Vec<StirlingEntry>> {
    xs.iter()
        .map(|&x| {
            let remainder = stirling_remainder(x)?;
            let bound = stirling_remainder_bound(x)?;
            Ok(StirlingEntry {
                x,
                remainder,
                bound,
                ok: remainder.abs() <= bound,
            })
        })
        .collect()
}
