//! Parameter sweeps producing [`ScanReport`]s.
//!
//! Cells are computed in parallel and assembled in grid order, so a report
//! does not depend on the number of worker threads. Unboundedness is never
//! asserted here; it shows up as growth ratios across N.

use rayon::prelude::*;

use super::disk::{apply_hhat, make_f_hat, xp_norm_p, XpModel};
use super::families::{geometric_cutoff, make_f_eps, make_f_tilde};
use crate::error::{Error, Result};
use crate::fock_space::{norm_sq, to_orthonormal, FockWeight};
use crate::hilbert_ops::{
    apply, apply_orthonormal, build_truncated, op_norm, OperatorKind, OperatorSpec,
};
use crate::linalg::spectral_norm;
use crate::radial_measure::{carleson_constant, default_grid, vanishing_profile, MeasureSpec};
use crate::report::{fmt_g17, ScanReport};

/// Coefficients of geometric test functions below this are dropped.
const GEOMETRIC_FLOOR: f64 = 1e-16;
const MIN_GEOMETRIC_TRUNC: usize = 256;

fn check_exponents(op: &'static str, alpha: f64, beta: f64) -> Result<()> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > -1.0 && v < 1.0) {
            return Err(Error::domain(op, format!("{name} = {v} not in (-1,1)")));
        }
    }
    Ok(())
}

fn sorted_sizes(op: &'static str, grid: &[usize]) -> Result<Vec<usize>> {
    let mut g = grid.to_vec();
    g.sort_unstable();
    g.dedup();
    if g.is_empty() || g[0] == 0 {
        return Err(Error::domain(op, "N grid must be nonempty and positive"));
    }
    Ok(g)
}

fn check_params(op: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain(op, "parameter grid must be nonempty"));
    }
    if let Some(v) = grid.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(op, format!("parameter {v} is not finite")));
    }
    Ok(())
}

/// Value of a cell, with overflow recorded instead of aborting the scan.
fn cell(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Overflow { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn key(name: &str, param: f64) -> String {
    format!("{name}[{}]", fmt_g17(param))
}

/// Ratio between the two largest N of a series, stored in the summary.
fn record_last_ratio(report: &mut ScanReport, series: &str, param: f64, sizes: &[usize]) {
    if let [.., lo, hi] = sizes {
        if let Some(g) = report.growth(series, param, *lo, *hi) {
            report
                .summary
                .insert(key(&format!("{series}_ratio"), param), g);
        }
    }
}

/// Boundedness threshold 1 + ½(β − α) for `H_λ`.
pub fn lambda_star(alpha: f64, beta: f64) -> f64 {
    1.0 + 0.5 * (beta - alpha)
}

/// Witness exponent for λ below the threshold: half the admissible margin.
pub fn witness_eps(alpha: f64, beta: f64, lambda: f64) -> Option<f64> {
    let margin = (beta - alpha) + 2.0 * (1.0 - lambda);
    (margin > 0.0).then_some(0.5 * margin)
}

/// Truncated norms of `H_λ` over λ × N, plus the f_ε witness below λ*.
pub fn threshold_scan(
    theta: f64,
    alpha: f64,
    beta: f64,
    lambda_grid: &[f64],
    n_grid: &[usize],
    tol: f64,
) -> Result<ScanReport> {
    const OP: &str = "threshold_scan";
    check_exponents(OP, alpha, beta)?;
    check_params(OP, lambda_grid)?;
    let sizes = sorted_sizes(OP, n_grid)?;
    let source = FockWeight::new(theta, alpha)?;
    let target = FockWeight::new(theta, beta)?;
    let specs = lambda_grid
        .iter()
        .map(|&lambda| OperatorSpec::new(OperatorKind::HLambda { lambda }, source, target))
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|i| sizes.iter().map(move |&n| (i, n)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(i, n)| {
            let spec = &specs[i];
            let norm = cell(build_truncated(spec, n).and_then(|t| op_norm(&t, tol)))?;
            let witness = match witness_eps(alpha, beta, lambda_grid[i]) {
                Some(eps) => Some(cell((|| {
                    let f = make_f_eps(eps, &source, n)?;
                    Ok(norm_sq(&apply(spec, &f, n)?, &target)?.sqrt())
                })())?),
                None => None,
            };
            Ok((norm, witness))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = ScanReport::new(OP);
    report.meta("theta", theta);
    report.meta("alpha", alpha);
    report.meta("beta", beta);
    report.meta("tol", tol);
    report.mark_nested("opnorm");
    report.mark_nested("witness");
    let ls = lambda_star(alpha, beta);
    report.summary.insert("lambda_star".into(), ls);
    for (&(i, n), (norm, _)) in cells.iter().zip(&values) {
        report.push("opnorm", lambda_grid[i], n, *norm);
    }
    for (&(i, n), (_, witness)) in cells.iter().zip(&values) {
        if let Some(w) = witness {
            report.push("witness", lambda_grid[i], n, *w);
        }
    }
    for (i, &lambda) in lambda_grid.iter().enumerate() {
        record_last_ratio(&mut report, "opnorm", lambda, &sizes);
        if let Some(eps) = witness_eps(alpha, beta, lambda) {
            report.summary.insert(key("eps", lambda), eps);
            record_last_ratio(&mut report, "witness", lambda, &sizes);
        }
        let _ = i;
    }
    Ok(report)
}

fn hmu_spec(m: &MeasureSpec, theta: f64, alpha: f64, beta: f64) -> Result<OperatorSpec> {
    OperatorSpec::with_params(OperatorKind::HMu { measure: m.clone() }, theta, alpha, beta)
}

/// s*-Carleson constant of μ next to truncated norms of `H_μ`.
pub fn carleson_boundedness_experiment(
    m: &MeasureSpec,
    theta: f64,
    alpha: f64,
    beta: f64,
    n_grid: &[usize],
    tol: f64,
) -> Result<ScanReport> {
    const OP: &str = "carleson_boundedness_experiment";
    check_exponents(OP, alpha, beta)?;
    let sizes = sorted_sizes(OP, n_grid)?;
    let spec = hmu_spec(m, theta, alpha, beta)?;
    let s_star = spec.critical_exponent();
    let grid = default_grid();
    let constant = carleson_constant(m, s_star, &grid)?;
    let norms = sizes
        .par_iter()
        .map(|&n| cell(build_truncated(&spec, n).and_then(|t| op_norm(&t, tol))))
        .collect::<Result<Vec<_>>>()?;

    let mut report = ScanReport::new(OP);
    report.meta("theta", theta);
    report.meta("alpha", alpha);
    report.meta("beta", beta);
    report.meta("measure", m.id());
    report.meta("tol", tol);
    report.mark_nested("opnorm");
    report.summary.insert("s_star".into(), s_star);
    report.summary.insert("carleson_constant".into(), constant);
    for (&n, v) in sizes.iter().zip(norms) {
        report.push("opnorm", s_star, n, v);
    }
    record_last_ratio(&mut report, "opnorm", s_star, &sizes);
    Ok(report)
}

/// ‖H_μ f̃_w‖ with f̃_w truncated where its coefficients become negligible.
pub fn tilde_image_norm(spec: &OperatorSpec, w: f64) -> Result<(usize, f64)> {
    let n = geometric_cutoff(w, GEOMETRIC_FLOOR).max(MIN_GEOMETRIC_TRUNC);
    let f = make_f_tilde(w, spec.source().alpha, n)?;
    let u = to_orthonormal(&f, &spec.source());
    let v = apply_orthonormal(spec, &u.values, n)?;
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() {
        return Err(Error::Overflow {
            op: "tilde_image_norm",
            msg: format!("image norm at w = {w} left the double range"),
        });
    }
    Ok((n, norm))
}

/// Tail norms, images of f̃_w and the s*-vanishing profile side by side.
#[allow(clippy::too_many_arguments)]
pub fn compactness_experiment(
    m: &MeasureSpec,
    theta: f64,
    alpha: f64,
    beta: f64,
    n_keep_grid: &[usize],
    n_big: usize,
    w_grid: &[f64],
    tol: f64,
) -> Result<ScanReport> {
    const OP: &str = "compactness_experiment";
    check_exponents(OP, alpha, beta)?;
    check_params(OP, w_grid)?;
    if n_keep_grid.iter().any(|&k| k > n_big) {
        return Err(Error::domain(
            OP,
            format!("kept rows exceed N_big = {n_big}"),
        ));
    }
    let spec = hmu_spec(m, theta, alpha, beta)?;
    let s_star = spec.critical_exponent();
    let t = build_truncated(&spec, n_big)?;
    // sequential over N_keep: each norm already uses every worker
    let tails = n_keep_grid
        .iter()
        .map(|&k| cell(spectral_norm(&t.row_block(k..n_big), tol)))
        .collect::<Result<Vec<_>>>()?;
    drop(t);
    let images = w_grid
        .iter()
        .map(|&w| match tilde_image_norm(&spec, w) {
            Ok((n, v)) => Ok((n, Some(v))),
            Err(Error::Overflow { .. }) => Ok((0, None)),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = default_grid();
    let profile = vanishing_profile(m, s_star, &grid)?;

    let mut report = ScanReport::new(OP);
    report.meta("theta", theta);
    report.meta("alpha", alpha);
    report.meta("beta", beta);
    report.meta("measure", m.id());
    report.meta("N_big", n_big);
    report.meta("tol", tol);
    report.summary.insert("s_star".into(), s_star);
    for (&k, v) in n_keep_grid.iter().zip(tails) {
        report.push("tail_norm", k as f64, n_big, v);
    }
    for (&w, (n, v)) in w_grid.iter().zip(images) {
        report.push("image_norm", w, n, v);
    }
    for (j, (t, q)) in profile.into_iter().enumerate() {
        report.push("profile", t, j, Some(q));
    }
    if let Some(last) = report.series("profile").last().and_then(|r| r.value) {
        report.summary.insert("profile_last".into(), last);
    }
    Ok(report)
}

/// Witness exponent in the disk model: ½p(1 − λ) below λ = 1, else 0.1.
pub fn proposition_eps(model: &XpModel, lambda: f64) -> f64 {
    if lambda < 1.0 {
        0.5 * model.p * (1.0 - lambda)
    } else {
        0.1
    }
}

/// Σ n^G b_nᵖ for b = Ĥ_λ f̂_ε over λ × N.
pub fn proposition_scan(
    model: &XpModel,
    lambda_grid: &[f64],
    n_grid: &[usize],
) -> Result<ScanReport> {
    const OP: &str = "proposition_scan";
    check_params(OP, lambda_grid)?;
    if let Some(l) = lambda_grid.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::domain(OP, format!("lambda = {l} must be > 0")));
    }
    let sizes = sorted_sizes(OP, n_grid)?;
    let cells: Vec<(f64, usize)> = lambda_grid
        .iter()
        .flat_map(|&l| sizes.iter().map(move |&n| (l, n)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(lambda, n)| {
            let f = make_f_hat(proposition_eps(model, lambda), model, n)?;
            let b = apply_hhat(&f, lambda, n)?;
            let v = xp_norm_p(&b, model);
            Ok(v.is_finite().then_some(v))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = ScanReport::new(OP);
    report.meta("model", model);
    report.mark_nested("xp_norm");
    for (&(lambda, n), v) in cells.iter().zip(values) {
        report.push("xp_norm", lambda, n, v);
    }
    for &lambda in lambda_grid {
        report
            .summary
            .insert(key("eps", lambda), proposition_eps(model, lambda));
        if let (Some(&lo), Some(&hi)) = (sizes.first(), sizes.last()) {
            if let Some(g) = report.growth("xp_norm", lambda, lo, hi) {
                report.summary.insert(key("xp_norm_growth", lambda), g);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thresholds() {
        assert_eq!(lambda_star(0.0, 0.0), 1.0);
        assert_eq!(lambda_star(-0.5, 0.5), 1.5);
        assert_eq!(witness_eps(0.0, 0.5, 1.25), None);
        assert_eq!(witness_eps(0.0, 0.5, 1.0), Some(0.25));
    }

    #[test]
    fn small_threshold_scan() {
        let r = threshold_scan(1.0, 0.0, 0.0, &[0.8, 1.5], &[32, 8, 16], 1e-12).unwrap();
        assert_eq!(r.series("opnorm").count(), 6);
        assert_eq!(r.series("witness").count(), 3);
        assert!(r.check_nesting().is_ok());
        assert_eq!(r.summary["lambda_star"], 1.0);
        // grid order is preserved: N ascending within each lambda
        let ns: Vec<usize> = r.series("opnorm").map(|c| c.n).collect();
        assert_eq!(ns, vec![8, 16, 32, 8, 16, 32]);
    }

    #[test]
    fn dirac_zero_is_flat() {
        let m = MeasureSpec::dirac(0.0).unwrap();
        let r = carleson_boundedness_experiment(&m, 4.0, 0.0, 0.5, &[4, 16], 1e-12).unwrap();
        for c in r.series("opnorm") {
            assert_relative_eq!(c.value.unwrap(), 4f64.powf(0.25), max_relative = 1e-13);
        }
    }

    #[test]
    fn compactness_for_interior_atom() {
        let m = MeasureSpec::dirac(0.5).unwrap();
        let r = compactness_experiment(&m, 1.0, 0.0, 0.0, &[4, 16, 64], 128, &[0.9, 0.99], 1e-12)
            .unwrap();
        let tails: Vec<f64> = r.series("tail_norm").map(|c| c.value.unwrap()).collect();
        assert!(tails.windows(2).all(|w| w[1] < w[0]), "{tails:?}");
        let imgs: Vec<f64> = r.series("image_norm").map(|c| c.value.unwrap()).collect();
        assert!(imgs[1] < imgs[0]);
    }

    #[test]
    fn hardy_scan_shape() {
        let hardy = XpModel::hardy(2.0).unwrap();
        let r = proposition_scan(&hardy, &[0.75, 1.0], &[64, 256]).unwrap();
        assert!(r.check_nesting().is_ok());
        assert_eq!(r.summary[&key("eps", 0.75)], 0.25);
        assert!(proposition_scan(&hardy, &[], &[64]).is_err());
    }
}
