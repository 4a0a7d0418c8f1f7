//! Disk-space model for decreasing coefficient sequences.
//!
//! A space X_p has the membership test Σ_{n≥1} n^{G} a_nᵖ < ∞ for
//! nonincreasing nonnegative a_n. Hardy, Bergman and Dirichlet spaces fit
//! this shape with the exponents below.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "label", rename_all = "lowercase")]
pub enum XpLabel {
    Hardy,
    Dirichlet { alpha: f64 },
    Bergman { alpha: f64 },
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XpModel {
    pub g: f64,
    pub p: f64,
    pub label: XpLabel,
}

impl XpModel {
    const OP: &'static str = "XpModel";

    fn checked(g: f64, p: f64, label: XpLabel) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::domain(Self::OP, format!("p = {p} must be > 1")));
        }
        if !(g.is_finite() && g > -1.0) {
            return Err(Error::domain(Self::OP, format!("G = {g} must be > -1")));
        }
        Ok(XpModel { g, p, label })
    }

    /// H^p: G = p − 2.
    pub fn hardy(p: f64) -> Result<Self> {
        XpModel::checked(p - 2.0, p, XpLabel::Hardy)
    }

    /// Dirichlet-type D^p_α, p − 2 < α ≤ p − 1: G = 2p − 3 − α.
    pub fn dirichlet(p: f64, alpha: f64) -> Result<Self> {
        if !(alpha > p - 2.0 && alpha <= p - 1.0) {
            return Err(Error::domain(
                Self::OP,
                format!(
                    "dirichlet alpha = {alpha} not in ({}, {}]",
                    p - 2.0,
                    p - 1.0
                ),
            ));
        }
        XpModel::checked(2.0 * p - 3.0 - alpha, p, XpLabel::Dirichlet { alpha })
    }

    /// Bergman A^p_α, −1 < α < p − 2: G = 2p − 3 − α.
    pub fn bergman(p: f64, alpha: f64) -> Result<Self> {
        if !(alpha > -1.0 && alpha < p - 2.0) {
            return Err(Error::domain(
                Self::OP,
                format!("bergman alpha = {alpha} not in (-1, {})", p - 2.0),
            ));
        }
        XpModel::checked(2.0 * p - 3.0 - alpha, p, XpLabel::Bergman { alpha })
    }

    pub fn custom(g: f64, p: f64) -> Result<Self> {
        XpModel::checked(g, p, XpLabel::Custom)
    }
}

/// Nonincreasing, finite, nonnegative a_0..a_{N−1}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XpSeq {
    values: Vec<f64>,
}

impl XpSeq {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        const OP: &str = "XpSeq";
        if values.is_empty() {
            return Err(Error::domain(OP, "sequence must be nonempty"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::domain(
                OP,
                format!("entry {v} is not finite and nonnegative"),
            ));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::domain(
                OP,
                format!(
                    "increase at index {}: {} > {}",
                    i + 1,
                    values[i + 1],
                    values[i]
                ),
            ));
        }
        Ok(XpSeq { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Σ_{1≤n<N} n^G a_nᵖ; a_0 does not enter.
pub fn xp_norm_p(a: &XpSeq, model: &XpModel) -> f64 {
    a.values
        .iter()
        .enumerate()
        .skip(1)
        .fold(0.0, |acc, (n, v)| {
            acc + (n as f64).powf(model.g) * v.powf(model.p)
        })
}

/// b_n = Σ_{k<N} a_k / (k + n + 1)^λ for n < out_len.
pub fn apply_hhat(a: &XpSeq, lambda: f64, out_len: usize) -> Result<XpSeq> {
    use rayon::prelude::*;
    const OP: &str = "apply_hhat";
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(OP, format!("lambda = {lambda} must be > 0")));
    }
    if out_len == 0 {
        return Err(Error::domain(OP, "output length must be >= 1"));
    }
    let n_in = a.len();
    // kernel table, clamped so rounding in powf can never make it increase
    let mut h: Vec<f64> = (0..out_len + n_in)
        .map(|m| (m as f64 + 1.0).powf(-lambda))
        .collect();
    for m in 1..h.len() {
        h[m] = h[m].min(h[m - 1]);
    }
    let b: Vec<f64> = (0..out_len)
        .into_par_iter()
        .map(|n| {
            a.values
                .iter()
                .zip(&h[n..n + n_in])
                .fold(0.0, |acc, (ak, hk)| acc + ak * hk)
        })
        .collect();
    XpSeq::new(b).map_err(|e| Error::Invariant {
        op: OP,
        msg: format!("image is not nonincreasing: {e}"),
    })
}

/// â_0 = (ε/(1+ε))^{1/p}, â_k = (ε/(1+ε))^{1/p} k^{−(G+1+ε)/p}.
pub fn make_f_hat(eps: f64, model: &XpModel, n: usize) -> Result<XpSeq> {
    const OP: &str = "make_f_hat";
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain(OP, format!("eps = {eps} must be > 0")));
    }
    if n == 0 {
        return Err(Error::domain(OP, "truncation must be >= 1"));
    }
    let lead = (eps / (1.0 + eps)).powf(1.0 / model.p);
    let expo = -(model.g + 1.0 + eps) / model.p;
    let values = (0..n)
        .map(|k| {
            if k == 0 {
                lead
            } else {
                lead * (k as f64).powf(expo)
            }
        })
        .collect();
    XpSeq::new(values)
}
