//! Positive measures on [0, 1): moments μ[n] = ∫ tⁿ dμ, tail masses
//! μ([t, 1)), s-Carleson quotients and the (1 − t)^{λ−1} reweighting.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::special_fn::log_beta;

/// Absolute tolerance for density quadrature.
pub const DENSITY_TOL: f64 = 1e-13;

/// Number of points in the default geometric Carleson grid.
pub const DEFAULT_GRID_LEN: usize = 41;

type DensityFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Nonnegative density on [0, 1), shared between threads.
#[derive(Clone)]
pub struct Density {
    label: String,
    f: Arc<DensityFn>,
}

impl Density {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Density::with_complement(label, move |t, _| f(t))
    }

    /// Density given as g(t, 1 − t). Quadrature passes the complement
    /// exactly, so factors like (1 − t)^σ keep full accuracy near t = 1
    /// where forming 1 − t from t would cancel.
    pub fn with_complement(
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Density {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t, 1.0 - t)
    }

    /// Value at t = 1 − d.
    pub fn eval_near_one(&self, d: f64) -> f64 {
        (self.f)(1.0 - d, d)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Estimated exponent σ in f(t) ~ (1 − t)^σ as t → 1⁻.
    fn decay_exponent(&self) -> f64 {
        let (h1, h2) = (1e-4, 1e-7);
        let (f1, f2) = (self.eval_near_one(h1), self.eval_near_one(h2));
        if f1 <= 0.0 || f2 <= 0.0 || !f1.is_finite() || !f2.is_finite() {
            // vanishes (or is unusable) near 1: treat as smooth
            return 0.0;
        }
        (f1 / f2).ln() / (h1 / h2).ln()
    }

    /// Substitution exponent that makes the pulled-back density bounded.
    fn kappa(&self, op: &'static str) -> Result<f64> {
        let sigma = self.decay_exponent();
        if !(sigma > -1.0 + 1e-3) {
            return Err(Error::InfiniteMass {
                op,
                msg: format!(
                    "density '{}' behaves like (1-t)^{sigma:.3} near t=1",
                    self.label
                ),
            });
        }
        Ok((1.0 / (sigma + 1.0)).clamp(1.0, 16.0))
    }
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Density({})", self.label)
    }
}

/// A positive Borel measure on [0, 1).
#[derive(Debug, Clone)]
pub enum MeasureSpec {
    /// Point masses (position, mass).
    Atoms(Vec<(f64, f64)>),
    /// c · (1 − t)^{s−1} dt.
    PowerDensity {
        c: f64,
        s: f64,
    },
    GeneralDensity(Density),
    Mixture(Vec<MeasureSpec>),
}

impl MeasureSpec {
    pub fn zero() -> Self {
        MeasureSpec::Atoms(Vec::new())
    }

    pub fn dirac(t: f64) -> Result<Self> {
        MeasureSpec::atoms(vec![(t, 1.0)])
    }

    pub fn lebesgue() -> Self {
        MeasureSpec::PowerDensity { c: 1.0, s: 1.0 }
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let m = MeasureSpec::Atoms(atoms);
        m.validate()?;
        Ok(m)
    }

    pub fn power(c: f64, s: f64) -> Result<Self> {
        let m = MeasureSpec::PowerDensity { c, s };
        m.validate()?;
        Ok(m)
    }

    /// Checks positions, signs and (for densities) finiteness of mass.
    pub fn validate(&self) -> Result<()> {
        const OP: &str = "MeasureSpec";
        match self {
            MeasureSpec::Atoms(atoms) => {
                for &(t, mass) in atoms {
                    if !(t.is_finite() && (0.0..1.0).contains(&t)) {
                        return Err(Error::domain(OP, format!("atom position {t} not in [0,1)")));
                    }
                    if !(mass.is_finite() && mass >= 0.0) {
                        return Err(Error::domain(OP, format!("atom mass {mass} must be >= 0")));
                    }
                }
                Ok(())
            }
            MeasureSpec::PowerDensity { c, s } => {
                if !(c.is_finite() && *c >= 0.0) {
                    return Err(Error::domain(
                        OP,
                        format!("density coefficient {c} must be >= 0"),
                    ));
                }
                if !(s.is_finite() && *s > 0.0) {
                    return Err(Error::domain(
                        OP,
                        format!("density exponent s={s} must be > 0"),
                    ));
                }
                Ok(())
            }
            MeasureSpec::GeneralDensity(d) => {
                d.kappa(OP)?;
                let mass = moment(self, 0)?;
                if !mass.is_finite() {
                    return Err(Error::InfiniteMass {
                        op: OP,
                        msg: format!("density '{}' integrates to {mass}", d.label()),
                    });
                }
                Ok(())
            }
            MeasureSpec::Mixture(parts) => parts.iter().try_for_each(MeasureSpec::validate),
        }
    }

    /// Short human-readable identifier used in reports.
    pub fn id(&self) -> String {
        match self {
            MeasureSpec::Atoms(a) if a.is_empty() => "zero".into(),
            MeasureSpec::Atoms(a) => {
                let parts: Vec<String> = a.iter().map(|(t, m)| format!("{m}@{t}")).collect();
                format!("atoms[{}]", parts.join(","))
            }
            MeasureSpec::PowerDensity { c, s } => format!("power(c={c},s={s})"),
            MeasureSpec::GeneralDensity(d) => format!("density({})", d.label()),
            MeasureSpec::Mixture(p) => {
                let parts: Vec<String> = p.iter().map(MeasureSpec::id).collect();
                format!("mixture[{}]", parts.join("+"))
            }
        }
    }

    /// Parse the JSON measure schema (atoms, power, mixture).
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MeasureJson =
            serde_json::from_str(text).map_err(|e| Error::parse("measure_json", e.to_string()))?;
        let m = raw.into_spec();
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        let raw = MeasureJson::from_spec(self)?;
        Ok(serde_json::to_string(&raw).expect("measure JSON serialises"))
    }
}

/// Wire format of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureJson {
    Atoms { atoms: Vec<[f64; 2]> },
    Power { c: f64, s: f64 },
    Mixture { parts: Vec<MeasureJson> },
}

impl MeasureJson {
    fn into_spec(self) -> MeasureSpec {
        match self {
            MeasureJson::Atoms { atoms } => {
                MeasureSpec::Atoms(atoms.into_iter().map(|[t, m]| (t, m)).collect())
            }
            MeasureJson::Power { c, s } => MeasureSpec::PowerDensity { c, s },
            MeasureJson::Mixture { parts } => {
                MeasureSpec::Mixture(parts.into_iter().map(MeasureJson::into_spec).collect())
            }
        }
    }

    fn from_spec(m: &MeasureSpec) -> Result<Self> {
        Ok(match m {
            MeasureSpec::Atoms(a) => MeasureJson::Atoms {
                atoms: a.iter().map(|&(t, m)| [t, m]).collect(),
            },
            MeasureSpec::PowerDensity { c, s } => MeasureJson::Power { c: *c, s: *s },
            MeasureSpec::GeneralDensity(d) => {
                return Err(Error::domain(
                    "measure_json",
                    format!("density '{}' has no JSON form", d.label()),
                ))
            }
            MeasureSpec::Mixture(p) => MeasureJson::Mixture {
                parts: p
                    .iter()
                    .map(MeasureJson::from_spec)
                    .collect::<Result<_>>()?,
            },
        })
    }
}

/// μ[n] = ∫_0^1 tⁿ dμ(t).
pub fn moment(m: &MeasureSpec, n: usize) -> Result<f64> {
    match m {
        MeasureSpec::Atoms(atoms) => {
            Ok(atoms.iter().map(|&(t, mass)| mass * t.powf(n as f64)).sum())
        }
        MeasureSpec::PowerDensity { c, s } => {
            if *c == 0.0 {
                return Ok(0.0);
            }
            Ok(c * power_beta(n, *s)?)
        }
        MeasureSpec::GeneralDensity(d) => {
            let kappa = d.kappa("moment")?;
            let nf = n as f64;
            quadrature::integrate_right_singular_with(
                |t, c| {
                    let tn = if n == 0 { 1.0 } else { t.powf(nf) };
                    tn * (d.f)(t, c)
                },
                0.0,
                1.0,
                kappa,
                DENSITY_TOL,
            )
            .map_err(|e| relabel(e, "moment"))
        }
        MeasureSpec::Mixture(parts) => parts.iter().map(|p| moment(p, n)).sum(),
    }
}

/// Largest n for which B(n+1, s) is formed as a ratio of products.
const PRODUCT_BETA_MAX: usize = 64;

/// B(n+1, s) = n! / (s (s+1) ⋯ (s+n)). Small n use the product ratio,
/// which is exact for integer s while the factorials stay below 2^53.
fn power_beta(n: usize, s: f64) -> Result<f64> {
    if n <= PRODUCT_BETA_MAX {
        let (mut num, mut den) = (1.0f64, s);
        for j in 1..=n {
            num *= j as f64;
            den *= s + j as f64;
        }
        let v = num / den;
        if v.is_normal() && den.is_finite() {
            return Ok(v);
        }
    }
    Ok(log_beta(n as f64 + 1.0, s)?.exp())
}

fn relabel(e: Error, op: &'static str) -> Error {
    match e {
        Error::Nonconvergence { msg, .. } => Error::Nonconvergence { op, msg },
        other => other,
    }
}

/// Moments μ[0..=N] of one measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub source: String,
    pub values: Vec<f64>,
}

impl MomentTable {
    /// Largest index covered.
    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }

    /// Violations of nonnegativity, monotonicity and log-convexity.
    pub fn invariant_violations(&self) -> Vec<String> {
        let v = &self.values;
        let slack = 1e-12 * v[0] * v[0];
        let mut out = Vec::new();
        for (n, &x) in v.iter().enumerate() {
            if !(x >= 0.0) {
                out.push(format!("mu[{n}] = {x} is negative"));
            }
        }
        for n in 0..v.len().saturating_sub(1) {
            if v[n + 1] > v[n] * (1.0 + 1e-12) + 1e-300 {
                out.push(format!("mu[{}] = {} > mu[{n}] = {}", n + 1, v[n + 1], v[n]));
            }
        }
        for n in 0..v.len().saturating_sub(2) {
            if v[n] * v[n + 2] < v[n + 1] * v[n + 1] - slack {
                out.push(format!("log-convexity fails at n = {n}"));
            }
        }
        out
    }
}

/// μ[0], …, μ[N].
pub fn moment_table(m: &MeasureSpec, max_index: usize) -> Result<MomentTable> {
    let values = (0..=max_index)
        .map(|n| moment(m, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentTable {
        source: m.id(),
        values,
    })
}

/// μ([t, 1)).
pub fn tail_mass(m: &MeasureSpec, t: f64) -> Result<f64> {
    if !(t.is_finite() && (0.0..1.0).contains(&t)) {
        return Err(Error::domain("tail_mass", format!("t = {t} not in [0,1)")));
    }
    match m {
        MeasureSpec::Atoms(atoms) => Ok(atoms
            .iter()
            .filter(|(ti, _)| *ti >= t)
            .map(|(_, mass)| mass)
            .sum()),
        MeasureSpec::PowerDensity { c, s } => Ok(c / s * (1.0 - t).powf(*s)),
        MeasureSpec::GeneralDensity(d) => {
            let kappa = d.kappa("tail_mass")?;
            // Scale the tolerance with the interval so small tails keep
            // their relative accuracy.
            let tol = DENSITY_TOL * (1.0 - t).max(1e-6);
            quadrature::integrate_right_singular_with(|x, c| (d.f)(x, c), t, 1.0, kappa, tol)
                .map_err(|e| relabel(e, "tail_mass"))
        }
        MeasureSpec::Mixture(parts) => parts.iter().map(|p| tail_mass(p, t)).sum(),
    }
}

/// Geometric grid t_j = 1 − 2^{−j}, j = 0..=40.
pub fn default_grid() -> Vec<f64> {
    (0..DEFAULT_GRID_LEN as i32)
        .map(|j| 1.0 - 2f64.powi(-j))
        .collect()
}

fn check_grid(op: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain(op, "grid must be nonempty"));
    }
    if let Some(t) = grid
        .iter()
        .find(|t| !(t.is_finite() && (0.0..1.0).contains(*t)))
    {
        return Err(Error::domain(op, format!("grid point {t} not in [0,1)")));
    }
    Ok(())
}

fn carleson_quotient(m: &MeasureSpec, s: f64, t: f64) -> Result<f64> {
    let tail = tail_mass(m, t)?;
    if tail == 0.0 {
        return Ok(0.0);
    }
    let q = tail / (1.0 - t).powf(s);
    Ok(if q.is_nan() { f64::INFINITY } else { q })
}

/// max over the grid of μ([t, 1)) / (1 − t)^s.
pub fn carleson_constant(m: &MeasureSpec, s: f64, grid: &[f64]) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::domain(
            "carleson_constant",
            format!("s = {s} must be > 0"),
        ));
    }
    check_grid("carleson_constant", grid)?;
    let mut best = 0.0f64;
    for &t in grid {
        best = best.max(carleson_quotient(m, s, t)?);
    }
    Ok(best)
}

/// (t_j, μ([t_j, 1)) / (1 − t_j)^s) along an increasing grid.
pub fn vanishing_profile(m: &MeasureSpec, s: f64, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::domain(
            "vanishing_profile",
            format!("s = {s} must be > 0"),
        ));
    }
    check_grid("vanishing_profile", grid)?;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(
            "vanishing_profile",
            "grid must be strictly increasing",
        ));
    }
    grid.iter()
        .map(|&t| Ok((t, carleson_quotient(m, s, t)?)))
        .collect()
}

/// dν(t) = (1 − t)^{λ−1} dμ(t).
pub fn lambda_transform(m: &MeasureSpec, lambda: f64) -> Result<MeasureSpec> {
    const OP: &str = "lambda_transform";
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(OP, format!("lambda = {lambda} must be > 0")));
    }
    let e = lambda - 1.0;
    Ok(match m {
        MeasureSpec::Atoms(atoms) => MeasureSpec::Atoms(
            atoms
                .iter()
                .map(|&(t, mass)| (t, mass * (1.0 - t).powf(e)))
                .collect(),
        ),
        MeasureSpec::PowerDensity { c, s } => {
            if *c == 0.0 {
                MeasureSpec::PowerDensity { c: 0.0, s: *s }
            } else if s + e > 0.0 {
                MeasureSpec::PowerDensity { c: *c, s: s + e }
            } else {
                return Err(Error::InfiniteMass {
                    op: OP,
                    msg: format!("(1-t)^{} density is not integrable", s + e - 1.0),
                });
            }
        }
        MeasureSpec::GeneralDensity(d) => {
            let inner = d.clone();
            let nd = Density::with_complement(format!("{}*(1-t)^{e}", d.label()), move |t, c| {
                (inner.f)(t, c) * c.powf(e)
            });
            nd.kappa(OP)?;
            MeasureSpec::GeneralDensity(nd)
        }
        MeasureSpec::Mixture(parts) => MeasureSpec::Mixture(
            parts
                .iter()
                .map(|p| lambda_transform(p, lambda))
                .collect::<Result<_>>()?,
        ),
    })
}

/// μ_λ[n] = ∫ tⁿ (1 − t)^{λ−1} dμ(t).
pub fn lambda_moment(m: &MeasureSpec, lambda: f64, n: usize) -> Result<f64> {
    moment(&lambda_transform(m, lambda)?, n)
}
