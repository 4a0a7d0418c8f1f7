//! Coefficient model of the weighted Fock space with norm
//! ‖f‖² = Σ (n + θ)^α |a_n|² n!.
//!
//! Taylor coefficients of interesting functions shrink like 1/√(n!), which
//! leaves the double range near n ≈ 300. A [`CoeffVec`] therefore stores
//! each coefficient as a mantissa times e^{log_scale}; factorials only
//! ever enter through [`log_gamma`] and are combined with the scale before
//! exponentiation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::log_gamma;

/// Largest exponent whose exponential is finite.
const LN_MAX: f64 = 709.782_712_893_384;

/// Default cap on the number of kernel terms.
pub const KERNEL_TERM_CAP: usize = 100_000;

pub(crate) fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        log_gamma(n as f64 + 1.0).expect("n + 1 > 0")
    }
}

/// Parameters (θ, α) of a weighted Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockWeight {
    pub theta: f64,
    pub alpha: f64,
}

impl FockWeight {
    pub fn new(theta: f64, alpha: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::domain(
                "FockWeight",
                format!("theta must be positive, got {theta}"),
            ));
        }
        if !alpha.is_finite() {
            return Err(Error::domain(
                "FockWeight",
                format!("alpha must be finite, got {alpha}"),
            ));
        }
        Ok(FockWeight { theta, alpha })
    }

    /// −1 < α < 1, the range the boundedness results are stated for.
    pub fn in_theorem_range(&self) -> bool {
        self.alpha > -1.0 && self.alpha < 1.0
    }

    /// Same θ, different exponent.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        FockWeight::new(self.theta, alpha)
    }

    /// ln of the map from Taylor coefficient to orthonormal coordinate:
    /// ½ ln n! + (α/2) ln(n + θ).
    pub fn log_ortho_factor(&self, n: usize) -> f64 {
        0.5 * ln_factorial(n) + 0.5 * self.alpha * (n as f64 + self.theta).ln()
    }
}

/// Multiply `z` by e^{log_factor} without forming the factor on its own.
fn scale_by_exp(z: Complex64, log_factor: f64) -> Complex64 {
    if log_factor == 0.0 {
        return z;
    }
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let factor = log_factor.exp();
    if factor.is_normal() && (r * factor).is_normal() {
        return z * factor;
    }
    let unit = z / r;
    unit * (r.ln() + log_factor).exp()
}

/// Truncated Taylor coefficients a_0..a_{N−1}, a_n = mantissa_n · e^{log_scale_n}.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVec {
    mantissa: Vec<Complex64>,
    log_scale: Vec<f64>,
}

impl CoeffVec {
    /// Plain coefficients (log scale zero).
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        let n = coeffs.len();
        CoeffVec::from_scaled(coeffs, vec![0.0; n])
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        CoeffVec::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_scaled(mantissa: Vec<Complex64>, log_scale: Vec<f64>) -> Result<Self> {
        if mantissa.is_empty() {
            return Err(Error::domain(
                "CoeffVec",
                "at least one coefficient is required",
            ));
        }
        if mantissa.len() != log_scale.len() {
            return Err(Error::domain(
                "CoeffVec",
                "mantissa and scale lengths differ",
            ));
        }
        if mantissa
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::domain("CoeffVec", "coefficients must be finite"));
        }
        if log_scale.iter().any(|s| !s.is_finite()) {
            return Err(Error::domain("CoeffVec", "log scales must be finite"));
        }
        Ok(CoeffVec {
            mantissa,
            log_scale,
        })
    }

    /// Truncation length N.
    pub fn trunc(&self) -> usize {
        self.mantissa.len()
    }

    /// a_n as a double; underflows to zero for very small coefficients.
    pub fn get(&self, n: usize) -> Complex64 {
        scale_by_exp(self.mantissa[n], self.log_scale[n])
    }

    pub fn to_vec(&self) -> Vec<Complex64> {
        (0..self.trunc()).map(|n| self.get(n)).collect()
    }

    /// ln |a_n|, −∞ for a zero coefficient.
    pub fn log_abs(&self, n: usize) -> f64 {
        self.mantissa[n].norm().ln() + self.log_scale[n]
    }

    pub fn mantissa(&self) -> &[Complex64] {
        &self.mantissa
    }

    pub fn log_scale(&self) -> &[f64] {
        &self.log_scale
    }

    /// Append coefficients from `other` after the current ones.
    pub fn extended(&self, other: &CoeffVec) -> CoeffVec {
        let mut m = self.mantissa.clone();
        let mut s = self.log_scale.clone();
        m.extend_from_slice(&other.mantissa);
        s.extend_from_slice(&other.log_scale);
        CoeffVec {
            mantissa: m,
            log_scale: s,
        }
    }
}

/// Orthonormal coordinates u_n = a_n √(n!) (n + θ)^{α/2}.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoVec {
    pub values: Vec<Complex64>,
    pub weight: FockWeight,
}

impl OrthoVec {
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Σ_{n<N} (n + θ)^α |a_n|² n!.
pub fn norm_sq(f: &CoeffVec, w: &FockWeight) -> Result<f64> {
    let mut sum = 0.0;
    for n in 0..f.trunc() {
        let m = f.mantissa[n].norm_sqr();
        if m == 0.0 {
            continue;
        }
        let log_term = m.ln() + 2.0 * f.log_scale[n] + 2.0 * w.log_ortho_factor(n);
        if log_term > LN_MAX {
            return Err(Error::Overflow {
                op: "norm_sq",
                msg: format!("term {n} has log-magnitude {log_term:.3}"),
            });
        }
        sum += log_term.exp();
    }
    if !sum.is_finite() {
        return Err(Error::Overflow {
            op: "norm_sq",
            msg: "sum of terms exceeds the double range".into(),
        });
    }
    Ok(sum)
}

pub fn to_orthonormal(f: &CoeffVec, w: &FockWeight) -> OrthoVec {
    let values = (0..f.trunc())
        .map(|n| scale_by_exp(f.mantissa[n], f.log_scale[n] + w.log_ortho_factor(n)))
        .collect();
    OrthoVec { values, weight: *w }
}

/// Inverse of [`to_orthonormal`]; the result keeps the inverse factor as
/// its log scale, so nothing underflows.
pub fn from_orthonormal(u: &OrthoVec) -> CoeffVec {
    let log_scale = (0..u.values.len())
        .map(|n| -u.weight.log_ortho_factor(n))
        .collect();
    CoeffVec {
        mantissa: u.values.clone(),
        log_scale,
    }
}

/// Coefficients of the n-th orthonormal basis vector e_n, truncated to N.
pub fn basis_vector(n: usize, w: &FockWeight, trunc: usize) -> Result<CoeffVec> {
    if n >= trunc {
        return Err(Error::domain(
            "basis_vector",
            format!("index {n} outside truncation {trunc}"),
        ));
    }
    let mut mantissa = vec![Complex64::new(0.0, 0.0); trunc];
    let mut log_scale = vec![0.0; trunc];
    mantissa[n] = Complex64::new(1.0, 0.0);
    log_scale[n] = -w.log_ortho_factor(n);
    CoeffVec::from_scaled(mantissa, log_scale)
}

/// Σ_{n<N} a_n z^n by Horner's rule.
pub fn evaluate(f: &CoeffVec, z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in (0..f.trunc()).rev() {
        acc = acc * z + f.get(n);
    }
    acc
}

/// Reproducing kernel Σ (n + θ)^{−α} (z ȳ)^n / n! truncated once the
/// remaining tail is provably below `tol`.
pub fn kernel_eval(w: &FockWeight, z: Complex64, y: Complex64, tol: f64) -> Result<Complex64> {
    kernel_eval_capped(w, z, y, tol, KERNEL_TERM_CAP)
}

pub fn kernel_eval_capped(
    w: &FockWeight,
    z: Complex64,
    y: Complex64,
    tol: f64,
    cap: usize,
) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::domain(
            "kernel_eval",
            format!("tolerance must be positive, got {tol}"),
        ));
    }
    let x = z * y.conj();
    let ax = x.norm();
    let theta = w.theta;
    let alpha = w.alpha;
    let mut term = Complex64::new(theta.powf(-alpha), 0.0);
    let mut sum = term;
    if ax == 0.0 {
        return Ok(sum);
    }
    for n in 0..cap {
        let nf = n as f64;
        // t_{n+1} / t_n = x/(n+1) · ((n+θ)/(n+1+θ))^α
        let weight_ratio = ((nf + theta) / (nf + 1.0 + theta)).powf(alpha);
        term = term * x * (weight_ratio / (nf + 1.0));
        sum += term;
        if !(sum.re.is_finite() && sum.im.is_finite()) {
            return Err(Error::Overflow {
                op: "kernel_eval",
                msg: format!("partial sum left the double range at n={}", n + 1),
            });
        }
        // Bound on every later ratio |t_{m+1}/t_m|, m ≥ n+1.
        let m = nf + 1.0;
        let growth = if alpha < 0.0 {
            ((m + 1.0 + theta) / (m + theta)).powf(-alpha)
        } else {
            1.0
        };
        let q = ax / (m + 1.0) * growth;
        if q < 0.5 && term.norm() * q / (1.0 - q) <= tol {
            return Ok(sum);
        }
    }
    Err(Error::ToleranceUnreachable {
        op: "kernel_eval",
        tol,
        cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn norm_sq_examples() {
        let w = FockWeight::new(2.0, 1.0).unwrap();
        assert_eq!(
            norm_sq(&CoeffVec::from_real(&[1.0]).unwrap(), &w).unwrap(),
            2.0
        );
        let w = FockWeight::new(1.0, 2.0).unwrap();
        assert_relative_eq!(
            norm_sq(&CoeffVec::from_real(&[0.0, 1.0]).unwrap(), &w).unwrap(),
            4.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn basis_vectors_have_unit_norm() {
        let w = FockWeight::new(1.0, 0.5).unwrap();
        let e3 = basis_vector(3, &w, 6).unwrap();
        assert_relative_eq!(norm_sq(&e3, &w).unwrap(), 1.0, max_relative = 1e-14);
        let u = to_orthonormal(&e3, &w);
        for (n, v) in u.values.iter().enumerate() {
            let want = if n == 3 { 1.0 } else { 0.0 };
            assert!((v - c(want, 0.0)).norm() < 1e-14);
        }
        // far beyond the point where 1/√(n!) underflows
        let e = basis_vector(3000, &w, 3001).unwrap();
        assert_relative_eq!(norm_sq(&e, &w).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn from_orthonormal_gives_basis_coefficients() {
        let w = FockWeight::new(1.5, -0.5).unwrap();
        let mut values = vec![c(0.0, 0.0); 5];
        values[4] = c(1.0, 0.0);
        let a = from_orthonormal(&OrthoVec { values, weight: w });
        let want = (24f64).powf(-0.5) * (4.0 + 1.5f64).powf(0.25);
        assert_relative_eq!(a.get(4).re, want, max_relative = 1e-14);
        assert_eq!(a.get(0), c(0.0, 0.0));
    }

    #[test]
    fn to_orthonormal_trivial() {
        let w = FockWeight::new(1.0, 0.0).unwrap();
        let u = to_orthonormal(&CoeffVec::from_real(&[1.0, 0.0]).unwrap(), &w);
        assert_eq!(u.values, vec![c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn evaluate_examples() {
        let f = CoeffVec::from_real(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(evaluate(&f, c(0.0, 0.0)), c(1.0, 0.0));
        let f = CoeffVec::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(evaluate(&f, c(2.0, 1.0)), c(2.0, 1.0));
        // e^z: tail after 30 terms is below 1/30! · e
        let coeffs: Vec<f64> = (0..30).map(|n| (-ln_factorial(n)).exp()).collect();
        let f = CoeffVec::from_real(&coeffs).unwrap();
        assert!((evaluate(&f, c(1.0, 0.0)).re - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn kernel_examples() {
        let tol = 1e-13;
        for theta in [0.5, 1.0, 3.0] {
            let w = FockWeight::new(theta, 0.0).unwrap();
            let k = kernel_eval(&w, c(1.0, 0.0), c(1.0, 0.0), tol).unwrap();
            assert!((k.re - std::f64::consts::E).abs() <= 2.0 * tol);
        }
        let w = FockWeight::new(2.5, 0.7).unwrap();
        let k = kernel_eval(&w, c(3.0, -1.0), c(0.0, 0.0), tol).unwrap();
        assert_relative_eq!(k.re, 2.5f64.powf(-0.7), max_relative = 1e-15);
        // Σ 1/((n+1) n!) = Σ 1/(n+1)! = e − 1
        let w = FockWeight::new(1.0, 1.0).unwrap();
        let k = kernel_eval(&w, c(1.0, 0.0), c(1.0, 0.0), tol).unwrap();
        assert!((k.re - (std::f64::consts::E - 1.0)).abs() <= 2.0 * tol);
        let direct: f64 = (0..25).map(|n| (-ln_factorial(n + 1)).exp()).sum();
        assert!((k.re - direct).abs() < 1e-13);
    }

    #[test]
    fn kernel_alpha_zero_is_exponential() {
        let w = FockWeight::new(0.7, 0.0).unwrap();
        let pts = [
            (c(0.3, 0.1), c(-1.2, 0.4)),
            (c(2.0, -1.0), c(1.5, 0.5)),
            (c(-3.0, 2.0), c(0.2, -2.2)),
        ];
        for (z, y) in pts {
            let k = kernel_eval(&w, z, y, 1e-12).unwrap();
            let want = (z * y.conj()).exp();
            assert!(
                (k - want).norm() <= 1e-12 + 1e-14 * want.norm(),
                "{k} vs {want}"
            );
        }
    }

    #[test]
    fn kernel_cap_and_bad_tolerance() {
        let w = FockWeight::new(1.0, 0.0).unwrap();
        let r = kernel_eval_capped(&w, c(20.0, 0.0), c(20.0, 0.0), 1e-12, 50);
        assert!(matches!(
            r,
            Err(Error::ToleranceUnreachable { cap: 50, .. })
        ));
        assert!(kernel_eval(&w, c(1.0, 0.0), c(1.0, 0.0), 0.0).is_err());
        assert!(matches!(
            kernel_eval(&w, c(40.0, 0.0), c(40.0, 0.0), 1e-3),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn weight_validation() {
        assert!(FockWeight::new(0.0, 0.0).is_err());
        assert!(FockWeight::new(1.0, f64::NAN).is_err());
        assert!(FockWeight::new(1.0, 0.5).unwrap().in_theorem_range());
        assert!(!FockWeight::new(1.0, 1.0).unwrap().in_theorem_range());
        assert!(CoeffVec::new(vec![]).is_err());
        assert!(CoeffVec::from_real(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn norm_overflow_is_reported() {
        let w = FockWeight::new(1.0, 0.0).unwrap();
        let mut coeffs = vec![0.0; 400];
        coeffs[399] = 1.0;
        let f = CoeffVec::from_real(&coeffs).unwrap();
        assert!(matches!(
            norm_sq(&f, &w),
            Err(Error::Overflow { op: "norm_sq", .. })
        ));
    }
}
