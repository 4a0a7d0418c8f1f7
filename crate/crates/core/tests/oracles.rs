//! Library results against independent computations: dense SVDs, direct
//! summations and closed forms.

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use fhl_core::fock_space::{
    basis_vector, evaluate, kernel_eval, to_orthonormal, CoeffVec, FockWeight,
};
use fhl_core::hilbert_ops::{
    apply, apply_orthonormal, build_truncated, op_norm, tail_norm, OperatorKind, OperatorSpec,
    DENSE_LIMIT,
};
use fhl_core::radial_measure::{carleson_constant, default_grid, moment, MeasureSpec};
use fhl_core::special_fn::beta;
use fhl_core::Error;

fn dense(spec: &OperatorSpec, n: usize) -> DMatrix<f64> {
    let t = build_truncated(spec, n).unwrap();
    DMatrix::from_fn(n, n, |i, k| t.entry(i, k))
}

fn kinds() -> Vec<OperatorKind> {
    vec![
        OperatorKind::HLambda { lambda: 0.8 },
        OperatorKind::HLambda { lambda: 1.7 },
        OperatorKind::HCheck,
        OperatorKind::HMu {
            measure: MeasureSpec::power(1.3, 0.9).unwrap(),
        },
        OperatorKind::HMu {
            measure: MeasureSpec::atoms(vec![(0.2, 1.0), (0.9, 0.5)]).unwrap(),
        },
        OperatorKind::HLambdaMu {
            lambda: 1.5,
            measure: MeasureSpec::lebesgue(),
        },
    ]
}

#[test]
fn power_iteration_matches_svd() {
    for kind in kinds() {
        for (th, a, b) in [(0.5, -0.5, 0.5), (1.0, 0.0, 0.0), (2.5, 0.7, -0.3)] {
            let s = OperatorSpec::with_params(kind.clone(), th, a, b).unwrap();
            let n = 48;
            let want = dense(&s, n).singular_values().max();
            let got = op_norm(&build_truncated(&s, n).unwrap(), 1e-13).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-9);
        }
    }
}

#[test]
fn tail_norm_matches_svd_of_lower_block() {
    let s = OperatorSpec::with_params(
        OperatorKind::HMu {
            measure: MeasureSpec::power(1.0, 2.0).unwrap(),
        },
        1.0,
        0.0,
        0.5,
    )
    .unwrap();
    let m = dense(&s, 64);
    for keep in [1, 8, 40] {
        let want = m.rows(keep, 64 - keep).into_owned().singular_values().max();
        assert_relative_eq!(
            tail_norm(&s, keep, 64, 1e-13).unwrap(),
            want,
            max_relative = 1e-9
        );
    }
}

#[test]
fn complex_apply_matches_dense_product() {
    let s =
        OperatorSpec::with_params(OperatorKind::HLambda { lambda: 1.2 }, 0.7, 0.4, -0.1).unwrap();
    let u: Vec<Complex64> = (0..20)
        .map(|k| Complex64::new((k as f64 * 0.7).cos(), (k as f64 * 1.3).sin()))
        .collect();
    let got = apply_orthonormal(&s, &u, 20).unwrap();
    let m = dense(&s, 20);
    let re = &m * DVector::from_iterator(20, u.iter().map(|z| z.re));
    let im = &m * DVector::from_iterator(20, u.iter().map(|z| z.im));
    for n in 0..20 {
        assert_relative_eq!(got[n].re, re[n], epsilon = 1e-12, max_relative = 1e-12);
        assert_relative_eq!(got[n].im, im[n], epsilon = 1e-12, max_relative = 1e-12);
    }
}

#[test]
fn rectangular_apply_uses_longer_kernel() {
    // 3 input coefficients, 10 outputs: rows beyond the input length still
    // see the full kernel
    let s =
        OperatorSpec::with_params(OperatorKind::HLambda { lambda: 1.0 }, 1.0, 0.0, 0.0).unwrap();
    let f = CoeffVec::from_real(&[1.0, 1.0, 1.0]).unwrap();
    let b = apply(&s, &f, 10).unwrap();
    let w = FockWeight::new(1.0, 0.0).unwrap();
    let u = to_orthonormal(&f, &w);
    let m = dense(&s, 12);
    let bo = to_orthonormal(&b, &w);
    for n in 0..10 {
        let want: f64 = (0..3).map(|k| m[(n, k)] * u.values[k].re).sum();
        assert_relative_eq!(bo.values[n].re, want, max_relative = 1e-12);
    }
}

#[test]
fn hlambda_mu_lebesgue_is_beta_kernel() {
    for lambda in [0.5, 1.0, 2.5] {
        let s = OperatorSpec::with_params(
            OperatorKind::HLambdaMu {
                lambda,
                measure: MeasureSpec::lebesgue(),
            },
            1.0,
            0.0,
            0.0,
        )
        .unwrap();
        let t = build_truncated(&s, 12).unwrap();
        for n in 0..12 {
            for k in 0..12 {
                let want = beta((n + k) as f64 + 1.0, lambda).unwrap();
                assert_relative_eq!(t.entry(n, k), want, max_relative = 1e-12);
            }
        }
    }
}

#[test]
fn streaming_truncation_agrees_with_dense() {
    let s =
        OperatorSpec::with_params(OperatorKind::HLambda { lambda: 1.6 }, 1.0, 0.0, 0.2).unwrap();
    let big = build_truncated(&s, DENSE_LIMIT + 1).unwrap();
    assert!(!big.is_dense());
    let dense_part = build_truncated(&s, DENSE_LIMIT).unwrap();
    assert!(dense_part.is_dense());
    for (i, k) in [(0, 0), (17, 4000), (4095, 4095)] {
        assert_eq!(big.entry(i, k), dense_part.entry(i, k));
    }
    let (a, b) = (
        op_norm(&dense_part, 1e-12).unwrap(),
        op_norm(&big, 1e-12).unwrap(),
    );
    assert!(a <= b * (1.0 + 1e-10));
}

#[test]
fn kernel_reproduces_point_evaluation() {
    // f(z) = ⟨f, K_z⟩ with ⟨f, g⟩ = Σ (n+θ)^α a_n conj(b_n) n!
    let w = FockWeight::new(1.5, 0.7).unwrap();
    let z = Complex64::new(0.6, -0.8);
    let y = Complex64::new(-0.3, 1.1);
    let direct = kernel_eval(&w, y, z, 1e-15).unwrap();
    // K_z(y) via the orthonormal basis: Σ e_n(y) conj(e_n(z))
    let mut via_basis = Complex64::new(0.0, 0.0);
    for n in 0..80 {
        let e = basis_vector(n, &w, n + 1).unwrap();
        via_basis += evaluate(&e, y) * evaluate(&e, z).conj();
    }
    assert_relative_eq!(direct.re, via_basis.re, max_relative = 1e-12);
    assert_relative_eq!(direct.im, via_basis.im, max_relative = 1e-12);
}

#[test]
fn atom_carleson_constant() {
    // δ_{0.9}: the quotient 1/(1−t)^s is largest at the last grid point ≤ 0.9
    let m = MeasureSpec::dirac(0.9).unwrap();
    let grid = default_grid();
    let t_max = grid
        .iter()
        .copied()
        .filter(|&t| t <= 0.9)
        .fold(0.0, f64::max);
    let want = (1.0 - t_max).powf(-1.5);
    assert_relative_eq!(
        carleson_constant(&m, 1.5, &grid).unwrap(),
        want,
        max_relative = 1e-14
    );
}

#[test]
fn mixture_moments_add() {
    let a = MeasureSpec::power(1.0, 0.5).unwrap();
    let b = MeasureSpec::atoms(vec![(0.5, 2.0)]).unwrap();
    let mix = MeasureSpec::Mixture(vec![a.clone(), b.clone()]);
    for n in [0, 3, 50] {
        let want = moment(&a, n).unwrap() + moment(&b, n).unwrap();
        assert_relative_eq!(moment(&mix, n).unwrap(), want, max_relative = 1e-15);
    }
}

#[test]
fn heavy_densities_are_rejected() {
    let m = MeasureSpec::power(1.0, 0.5).unwrap();
    let bad = OperatorSpec::with_params(
        OperatorKind::HLambdaMu {
            lambda: 0.4,
            measure: m,
        },
        1.0,
        0.0,
        0.0,
    );
    assert!(matches!(bad, Err(Error::InfiniteMass { .. })));
}
