//! Largest singular value by power iteration on MᵀM.
//!
//! Products are parallel over output entries, but each entry is
//! accumulated serially in ascending index order, so results do not depend
//! on the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Iteration cap for [`spectral_norm`].
pub const POWER_ITERATION_CAP: usize = 100_000;

/// Columns handled per task in transposed products.
const COL_CHUNK: usize = 256;

/// A real rows × cols matrix that can multiply vectors from both sides.
pub trait LinearMap: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// Row `i` restricted to `cols`, written into `out`.
    fn row_segment(&self, i: usize, cols: std::ops::Range<usize>, out: &mut [f64]);

    /// y = M x
    fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let cols = self.cols();
        (0..self.rows())
            .into_par_iter()
            .map_init(
                || vec![0.0; cols],
                |buf, i| {
                    self.row_segment(i, 0..cols, buf);
                    buf.iter().zip(x).fold(0.0, |acc, (m, v)| acc + m * v)
                },
            )
            .collect()
    }

    /// x = Mᵀ y
    fn mul_transpose_vec(&self, y: &[f64]) -> Vec<f64> {
        let cols = self.cols();
        let rows = self.rows();
        let chunks: Vec<Vec<f64>> = (0..cols.div_ceil(COL_CHUNK))
            .into_par_iter()
            .map(|c| {
                let range = c * COL_CHUNK..((c + 1) * COL_CHUNK).min(cols);
                let mut acc = vec![0.0; range.len()];
                let mut buf = vec![0.0; range.len()];
                for (i, &yi) in y.iter().enumerate().take(rows) {
                    if yi == 0.0 {
                        continue;
                    }
                    self.row_segment(i, range.clone(), &mut buf);
                    for (a, m) in acc.iter_mut().zip(&buf) {
                        *a += m * yi;
                    }
                }
                acc
            })
            .collect();
        chunks.concat()
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::domain(
                "DenseMatrix",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            data[i * n + i] = *v;
        }
        DenseMatrix {
            rows: n,
            cols: n,
            data,
        }
    }
}

impl LinearMap for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn row_segment(&self, i: usize, cols: std::ops::Range<usize>, out: &mut [f64]) {
        let start = i * self.cols;
        out.copy_from_slice(&self.data[start + cols.start..start + cols.end]);
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest singular value of `m`, from the all-ones start vector.
///
/// Every iterate ‖M v‖ with ‖v‖ = 1 is a lower bound on the norm; the
/// loop stops once two successive iterates agree to relative `tol`.
pub fn spectral_norm<M: LinearMap + ?Sized>(m: &M, tol: f64) -> Result<f64> {
    spectral_norm_capped(m, tol, POWER_ITERATION_CAP)
}

pub fn spectral_norm_capped<M: LinearMap + ?Sized>(m: &M, tol: f64, cap: usize) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::domain(
            "op_norm",
            format!("tolerance must be positive, got {tol}"),
        ));
    }
    let (rows, cols) = (m.rows(), m.cols());
    if rows == 0 || cols == 0 {
        return Ok(0.0);
    }
    let mut v = vec![1.0 / (cols as f64).sqrt(); cols];
    let mut prev = 0.0;
    for _ in 0..cap {
        let w = m.mul_vec(&v);
        let sigma = l2(&w);
        if sigma == 0.0 {
            return Ok(0.0);
        }
        if !sigma.is_finite() {
            return Err(Error::Overflow {
                op: "op_norm",
                msg: "matrix-vector product left the double range".into(),
            });
        }
        if (sigma - prev).abs() <= tol * sigma {
            return Ok(sigma);
        }
        prev = sigma;
        let z = m.mul_transpose_vec(&w);
        let zn = l2(&z);
        if zn == 0.0 {
            return Ok(sigma);
        }
        v = z.into_iter().map(|x| x / zn).collect();
    }
    Err(Error::Nonconvergence {
        op: "op_norm",
        msg: format!("power iteration did not settle to {tol:e} within {cap} steps"),
    })
}
