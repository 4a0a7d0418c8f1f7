//! Test-function families used as lower-bound witnesses.
//!
//! All coefficients carry their 1/√(k!) in the log scale of the
//! [`CoeffVec`], so truncations in the tens of thousands stay representable.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock_space::{ln_factorial, CoeffVec, FockWeight};

fn check_len(op: &'static str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain(op, "truncation must be >= 1"));
    }
    Ok(())
}

fn check_w(op: &'static str, w: f64) -> Result<()> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::domain(op, format!("w = {w} not in (0,1)")));
    }
    Ok(())
}

/// a_0 = 0, a_k = √(εθ^ε) (k+θ)^{−(α+1+ε)/2} / √(k!).
///
/// ‖f_ε‖² = εθ^ε Σ_{k≥1} (k+θ)^{−1−ε} ≤ εθ^ε ∫_0^∞ (x+θ)^{−1−ε} dx = 1.
pub fn make_f_eps(eps: f64, w: &FockWeight, n: usize) -> Result<CoeffVec> {
    const OP: &str = "make_f_eps";
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::domain(OP, format!("eps = {eps} must be > 0")));
    }
    check_len(OP, n)?;
    let lead = (eps * w.theta.powf(eps)).sqrt();
    let expo = -0.5 * (w.alpha + 1.0 + eps);
    let mantissa = (0..n)
        .map(|k| {
            let v = if k == 0 {
                0.0
            } else {
                lead * (k as f64 + w.theta).powf(expo)
            };
            Complex64::new(v, 0.0)
        })
        .collect();
    let log_scale = (0..n).map(|k| -0.5 * ln_factorial(k)).collect();
    CoeffVec::from_scaled(mantissa, log_scale)
}

/// a_k = (1 − w²)^{1/2} (k+θ)^{−α/2} w^k / √(k!).
pub fn make_f_w(w_val: f64, w: &FockWeight, n: usize) -> Result<CoeffVec> {
    const OP: &str = "make_f_w";
    check_w(OP, w_val)?;
    check_len(OP, n)?;
    let lead = (1.0 - w_val * w_val).sqrt();
    let lw = w_val.ln();
    let mantissa = (0..n)
        .map(|k| Complex64::new(lead * (k as f64 + w.theta).powf(-0.5 * w.alpha), 0.0))
        .collect();
    let log_scale = (0..n)
        .map(|k| k as f64 * lw - 0.5 * ln_factorial(k))
        .collect();
    CoeffVec::from_scaled(mantissa, log_scale)
}

/// ã_k = (1 − w²)^{(1+α)/2} w^k / √(k!).
pub fn make_f_tilde(w_val: f64, alpha: f64, n: usize) -> Result<CoeffVec> {
    const OP: &str = "make_f_tilde";
    check_w(OP, w_val)?;
    check_len(OP, n)?;
    if !alpha.is_finite() {
        return Err(Error::domain(OP, "alpha must be finite"));
    }
    let lead = (1.0 - w_val * w_val).powf(0.5 * (1.0 + alpha));
    let lw = w_val.ln();
    let mantissa = vec![Complex64::new(lead, 0.0); n];
    let log_scale = (0..n)
        .map(|k| k as f64 * lw - 0.5 * ln_factorial(k))
        .collect();
    CoeffVec::from_scaled(mantissa, log_scale)
}

/// Smallest N for which w^N drops below `floor`; geometric families are
/// negligible beyond it.
pub fn geometric_cutoff(w_val: f64, floor: f64) -> usize {
    (floor.ln() / w_val.ln()).ceil().max(1.0) as usize
}
