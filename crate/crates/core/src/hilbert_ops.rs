//! Hilbert-type operators as truncated matrices in orthonormal coordinates.
//!
//! With u_k = a_k √(k!) (k + θ)^{α/2} on the source side and the analogous
//! map with exponent β on the target side, the factorials in the operator
//! definitions cancel and every operator becomes
//!
//! ```text
//! M[n][k] = (n + θ)^{β/2} · (k + θ)^{−α/2} · κ(n + k)
//! ```
//!
//! a diagonally scaled Hankel matrix. The kernel κ depends on the variant:
//!
//! | variant      | κ(m)                             |
//! |--------------|----------------------------------|
//! | `HLambda`    | 1 / (m^λ + 1)                    |
//! | `HCheck`     | (m + 2θ)^{−(1 + (β − α)/2)}      |
//! | `HMu`        | μ[m]                             |
//! | `HLambdaMu`  | ∫ t^m (1 − t)^{λ−1} dμ(t)        |

use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock_space::{from_orthonormal, to_orthonormal, CoeffVec, FockWeight, OrthoVec};
use crate::linalg::{spectral_norm, LinearMap};
use crate::radial_measure::{lambda_transform, moment_table, MeasureSpec, MomentTable};

/// Largest dimension stored densely; larger truncations stream entries.
pub const DENSE_LIMIT: usize = 4096;

/// Default relative tolerance for [`op_norm`].
pub const DEFAULT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum OperatorKind {
    HLambda { lambda: f64 },
    HCheck,
    HMu { measure: MeasureSpec },
    HLambdaMu { lambda: f64, measure: MeasureSpec },
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::HLambda { .. } => "hlambda",
            OperatorKind::HCheck => "hcheck",
            OperatorKind::HMu { .. } => "hmu",
            OperatorKind::HLambdaMu { .. } => "hlambdamu",
        }
    }
}

/// An operator from 𝓕²_{θ,α} to 𝓕²_{θ,β}.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    kind: OperatorKind,
    source: FockWeight,
    target: FockWeight,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind, source: FockWeight, target: FockWeight) -> Result<Self> {
        const OP: &str = "OperatorSpec";
        if source.theta != target.theta {
            return Err(Error::domain(
                OP,
                format!(
                    "source θ={} and target θ={} differ",
                    source.theta, target.theta
                ),
            ));
        }
        match &kind {
            OperatorKind::HLambda { lambda } | OperatorKind::HLambdaMu { lambda, .. }
                if !(lambda.is_finite() && *lambda > 0.0) =>
            {
                return Err(Error::domain(OP, format!("lambda = {lambda} must be > 0")));
            }
            _ => {}
        }
        match &kind {
            OperatorKind::HMu { measure } => measure.validate()?,
            OperatorKind::HLambdaMu { lambda, measure } => {
                measure.validate()?;
                lambda_transform(measure, *lambda)?;
            }
            _ => {}
        }
        Ok(OperatorSpec {
            kind,
            source,
            target,
        })
    }

    /// Convenience constructor from (θ, α, β).
    pub fn with_params(kind: OperatorKind, theta: f64, alpha: f64, beta: f64) -> Result<Self> {
        OperatorSpec::new(
            kind,
            FockWeight::new(theta, alpha)?,
            FockWeight::new(theta, beta)?,
        )
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }
    pub fn source(&self) -> FockWeight {
        self.source
    }
    pub fn target(&self) -> FockWeight {
        self.target
    }
    pub fn theta(&self) -> f64 {
        self.source.theta
    }

    /// 1 + (β − α)/2, the critical exponent for this pair of spaces.
    pub fn critical_exponent(&self) -> f64 {
        1.0 + 0.5 * (self.target.alpha - self.source.alpha)
    }

    fn needs_moments(&self) -> bool {
        matches!(
            self.kind,
            OperatorKind::HMu { .. } | OperatorKind::HLambdaMu { .. }
        )
    }

    pub fn row_factor(&self, n: usize) -> f64 {
        (n as f64 + self.theta()).powf(0.5 * self.target.alpha)
    }

    pub fn col_factor(&self, k: usize) -> f64 {
        (k as f64 + self.theta()).powf(-0.5 * self.source.alpha)
    }
}

/// Moments feeding the kernel: μ[m] for `HMu`, those of (1 − t)^{λ−1}dμ for
/// `HLambdaMu`; `None` for the closed-form kernels.
pub fn kernel_moments(spec: &OperatorSpec, max_index: usize) -> Result<Option<MomentTable>> {
    match &spec.kind {
        OperatorKind::HMu { measure } => moment_table(measure, max_index).map(Some),
        OperatorKind::HLambdaMu { lambda, measure } => {
            moment_table(&lambda_transform(measure, *lambda)?, max_index).map(Some)
        }
        _ => Ok(None),
    }
}

fn kernel_value(spec: &OperatorSpec, m: usize, moments: Option<&MomentTable>) -> Result<f64> {
    match &spec.kind {
        OperatorKind::HLambda { lambda } => Ok(1.0 / ((m as f64).powf(*lambda) + 1.0)),
        OperatorKind::HCheck => Ok((m as f64 + 2.0 * spec.theta()).powf(-spec.critical_exponent())),
        OperatorKind::HMu { .. } | OperatorKind::HLambdaMu { .. } => {
            let table = moments.ok_or(Error::MissingMoment {
                op: "entry",
                need: m,
                have: 0,
            })?;
            table.get(m).ok_or(Error::MissingMoment {
                op: "entry",
                need: m,
                have: table.max_index(),
            })
        }
    }
}

/// Matrix entry M[n][k]. For `HLambdaMu` the table must hold the moments of
/// the reweighted measure, as produced by [`kernel_moments`].
pub fn entry(
    spec: &OperatorSpec,
    n: usize,
    k: usize,
    moments: Option<&MomentTable>,
) -> Result<f64> {
    let kappa = kernel_value(spec, n + k, moments)?;
    Ok(spec.row_factor(n) * spec.col_factor(k) * kappa)
}

/// Row/column scalings and Hankel kernel for indices below `rows`/`cols`.
#[derive(Debug, Clone)]
struct Factors {
    row: Vec<f64>,
    col: Vec<f64>,
    hankel: Vec<f64>,
}

impl Factors {
    fn build(spec: &OperatorSpec, rows: usize, cols: usize) -> Result<Self> {
        let max_index = (rows + cols).saturating_sub(2);
        let moments = if spec.needs_moments() {
            kernel_moments(spec, max_index)?
        } else {
            None
        };
        let hankel = (0..=max_index)
            .map(|m| kernel_value(spec, m, moments.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Factors {
            row: (0..rows).map(|n| spec.row_factor(n)).collect(),
            col: (0..cols).map(|k| spec.col_factor(k)).collect(),
            hankel,
        })
    }

    #[inline]
    fn entry(&self, n: usize, k: usize) -> f64 {
        self.row[n] * self.col[k] * self.hankel[n + k]
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<f64>),
    Streaming,
}

/// N × N truncation of an operator.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    dim: usize,
    spec: OperatorSpec,
    factors: Factors,
    storage: Storage,
}

/// Dense row-major fill up to [`DENSE_LIMIT`]; entries are streamed from the
/// Hankel factors beyond that.
pub fn build_truncated(spec: &OperatorSpec, dim: usize) -> Result<TruncatedOperator> {
    if dim == 0 {
        return Err(Error::domain("build_truncated", "dimension must be >= 1"));
    }
    let factors = Factors::build(spec, dim, dim)?;
    let storage = if dim <= DENSE_LIMIT {
        let mut data = vec![0.0; dim * dim];
        data.par_chunks_mut(dim).enumerate().for_each(|(n, row)| {
            for (k, v) in row.iter_mut().enumerate() {
                *v = factors.entry(n, k);
            }
        });
        Storage::Dense(data)
    } else {
        Storage::Streaming
    };
    let op = TruncatedOperator {
        dim,
        spec: spec.clone(),
        factors,
        storage,
    };
    if let Some(bad) = op
        .factors
        .hankel
        .iter()
        .find(|v| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::Invariant {
            op: "build_truncated",
            msg: format!("kernel value {bad} is not finite and nonnegative"),
        });
    }
    Ok(op)
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn entry(&self, n: usize, k: usize) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d[n * self.dim + k],
            Storage::Streaming => self.factors.entry(n, k),
        }
    }

    /// Dense entries, when stored.
    pub fn entries(&self) -> Option<&[f64]> {
        match &self.storage {
            Storage::Dense(d) => Some(d),
            Storage::Streaming => None,
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Rows `rows` of the matrix as a linear map.
    pub fn row_block(&self, rows: Range<usize>) -> RowBlock<'_> {
        RowBlock { op: self, rows }
    }

    /// Σ_k κ(n,k) (n+θ)^{(1−β)/2} (k+θ)^{−(1+α)/2} over the truncation, for
    /// the `HCheck` kernel.
    pub fn schur_row_sums(&self) -> Result<Vec<f64>> {
        self.require_hcheck()?;
        let th = self.spec.theta();
        let (a, b) = (self.spec.source.alpha, self.spec.target.alpha);
        Ok((0..self.dim)
            .map(|n| {
                let left = (n as f64 + th).powf(0.5 * (1.0 - b));
                (0..self.dim).fold(0.0, |acc, k| {
                    acc + self.factors.hankel[n + k] * left * (k as f64 + th).powf(-0.5 * (1.0 + a))
                })
            })
            .collect())
    }

    /// Σ_n κ(n,k) (k+θ)^{(1+α)/2} (n+θ)^{−(1−β)/2} over the truncation.
    pub fn schur_col_sums(&self) -> Result<Vec<f64>> {
        self.require_hcheck()?;
        let th = self.spec.theta();
        let (a, b) = (self.spec.source.alpha, self.spec.target.alpha);
        Ok((0..self.dim)
            .map(|k| {
                let left = (k as f64 + th).powf(0.5 * (1.0 + a));
                (0..self.dim).fold(0.0, |acc, n| {
                    acc + self.factors.hankel[n + k] * left * (n as f64 + th).powf(-0.5 * (1.0 - b))
                })
            })
            .collect())
    }

    fn require_hcheck(&self) -> Result<()> {
        if matches!(self.spec.kind, OperatorKind::HCheck) {
            Ok(())
        } else {
            Err(Error::domain(
                "schur_sums",
                format!("defined for hcheck only, not {}", self.spec.kind.name()),
            ))
        }
    }
}

impl LinearMap for TruncatedOperator {
    fn rows(&self) -> usize {
        self.dim
    }
    fn cols(&self) -> usize {
        self.dim
    }
    fn row_segment(&self, i: usize, cols: Range<usize>, out: &mut [f64]) {
        match &self.storage {
            Storage::Dense(d) => {
                let s = i * self.dim;
                out.copy_from_slice(&d[s + cols.start..s + cols.end]);
            }
            Storage::Streaming => {
                for (o, k) in out.iter_mut().zip(cols) {
                    *o = self.factors.entry(i, k);
                }
            }
        }
    }
}

/// A contiguous band of rows of a truncated operator.
pub struct RowBlock<'a> {
    op: &'a TruncatedOperator,
    rows: Range<usize>,
}

impl LinearMap for RowBlock<'_> {
    fn rows(&self) -> usize {
        self.rows.len()
    }
    fn cols(&self) -> usize {
        self.op.dim
    }
    fn row_segment(&self, i: usize, cols: Range<usize>, out: &mut [f64]) {
        self.op.row_segment(self.rows.start + i, cols, out)
    }
}

/// Largest singular value of the truncation; a lower bound on the norm of
/// the untruncated operator.
pub fn op_norm(t: &TruncatedOperator, tol: f64) -> Result<f64> {
    spectral_norm(t, tol)
}

/// Norm of the truncation at `n_big` with its first `n_keep` output rows
/// removed.
pub fn tail_norm(spec: &OperatorSpec, n_keep: usize, n_big: usize, tol: f64) -> Result<f64> {
    if n_keep > n_big {
        return Err(Error::domain(
            "tail_norm",
            format!("kept rows {n_keep} exceed truncation {n_big}"),
        ));
    }
    if n_keep == n_big {
        return Ok(0.0);
    }
    let t = build_truncated(spec, n_big)?;
    spectral_norm(&t.row_block(n_keep..n_big), tol)
}

/// Taylor coefficients b_0..b_{out_len−1} of the image of `f`.
pub fn apply(spec: &OperatorSpec, f: &CoeffVec, out_len: usize) -> Result<CoeffVec> {
    if out_len == 0 {
        return Err(Error::domain("apply", "output length must be >= 1"));
    }
    let u = to_orthonormal(f, &spec.source);
    let v = apply_orthonormal(spec, &u.values, out_len)?;
    Ok(from_orthonormal(&OrthoVec {
        values: v,
        weight: spec.target,
    }))
}

/// M u for orthonormal coordinates `u`; rows accumulate in ascending k.
pub fn apply_orthonormal(
    spec: &OperatorSpec,
    u: &[Complex64],
    out_len: usize,
) -> Result<Vec<Complex64>> {
    if u.is_empty() || out_len == 0 {
        return Err(Error::domain(
            "apply",
            "input and output lengths must be >= 1",
        ));
    }
    let factors = Factors::build(spec, out_len, u.len())?;
    let scaled: Vec<Complex64> = u.iter().zip(&factors.col).map(|(x, c)| x * c).collect();
    Ok((0..out_len)
        .into_par_iter()
        .map(|n| {
            let h = &factors.hankel[n..n + scaled.len()];
            let (re, im) = h.iter().zip(&scaled).fold((0.0, 0.0), |(re, im), (hk, x)| {
                (re + hk * x.re, im + hk * x.im)
            });
            Complex64::new(re, im) * factors.row[n]
        })
        .collect())
}

/// Summary of a truncation, for reports.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorSummary {
    pub op: &'static str,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub dim: usize,
}

impl TruncatedOperator {
    pub fn summary(&self) -> OperatorSummary {
        OperatorSummary {
            op: self.spec.kind.name(),
            theta: self.spec.theta(),
            alpha: self.spec.source.alpha,
            beta: self.spec.target.alpha,
            dim: self.dim,
        }
    }
}
