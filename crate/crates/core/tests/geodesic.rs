use std::f64::consts::PI;

use proptest::prelude::*;
use weylab_core::geodesic::*;

#[test]
fn elementary_beta_integrals() {
    let (i0, i1) = beta_integrals(2.0).unwrap();
    assert!((i0 - PI / 2.0).abs() < 1e-12 && (i1 - PI / 4.0).abs() < 1e-12);
    let (i0, i1) = beta_integrals(1.0).unwrap();
    assert!((i0 - 2.0).abs() < 1e-12 && (i1 - 4.0 / 3.0).abs() < 1e-12);
    let (i0, i1) = beta_integrals(5.0).unwrap();
    assert!((i1 / i0 - 2.0 / 7.0).abs() < 1e-12);
    assert!(beta_integrals(0.0).is_err());
}

#[test]
fn closed_forms() {
    assert!((c_beta_formula(2.0).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-12);
    let c1 = 2.0 * 0.75f64.powf(2.0 / 3.0) * 2f64.powf(1.0 / 3.0);
    assert!((c_beta_formula(1.0).unwrap() - c1).abs() < 1e-12);
    for beta in [0.5, 1.0, 2.0, 4.0] {
        let (i0, i1) = beta_integrals(beta).unwrap();
        let chain = 2.0 * i0 * (2.0 * i1).powf(-2.0 / (2.0 + beta));
        let f = c_beta_formula(beta).unwrap();
        assert!((chain - f).abs() <= 1e-9 * f, "beta={beta}");
    }
}

#[test]
fn three_way_agreement() {
    for beta in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let r = boundary_distance(beta, 1.0).unwrap();
        assert!(
            (r.c_quadrature - r.c_formula).abs() <= 1e-9 * r.c_formula,
            "beta={beta}"
        );
        assert!(
            (r.c_shooting - r.c_formula).abs() <= 1e-6 * r.c_formula,
            "beta={beta}: {r:?}"
        );
    }
}

#[test]
fn apex_height_invariance() {
    for beta in [1.0, 2.0] {
        let c: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&x| c_beta_shooting(beta, x, &DEFAULT_DELTAS).unwrap().0)
            .collect();
        assert!(
            (c[0] - c[1]).abs() <= 1e-7 * c[1] && (c[2] - c[1]).abs() <= 1e-7 * c[1],
            "{c:?}"
        );
    }
}

#[test]
fn span_scaling() {
    // Span scales like x_max^{1 + beta/2}: doubling it keeps 2L / (2 dy)^theta.
    let beta = 2.0;
    let x2 = 2f64.powf(1.0 / (1.0 + beta / 2.0));
    let (c1, r1) = c_beta_shooting(beta, 1.0, &DEFAULT_DELTAS).unwrap();
    let (c2, r2) = c_beta_shooting(beta, x2, &DEFAULT_DELTAS).unwrap();
    assert!((r2.half_span / r1.half_span - 2.0).abs() < 1e-6);
    assert!((c1 - c2).abs() <= 1e-7 * c1);
}

#[test]
fn small_beta_trend() {
    let v: Vec<f64> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&b| c_beta_shooting(b, 1.0, &DEFAULT_DELTAS).unwrap().0)
        .collect();
    let f: Vec<f64> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&b| c_beta_formula(b).unwrap())
        .collect();
    let up = |w: &[f64]| w[1] > w[0];
    assert_eq!(up(&v[..2]), up(&f[..2]));
    assert_eq!(up(&v[1..]), up(&f[1..]));
}

#[test]
fn moment_identity_on_grid() {
    for i in 1..=50 {
        let beta = 10.0 * i as f64 / 50.0;
        let (i0, i1) = beta_integrals(beta).unwrap();
        assert!(
            (i1 - 2.0 / (2.0 + beta) * i0).abs() <= 1e-10 * i0,
            "beta={beta}"
        );
    }
}

proptest! {
    #[test]
    fn quadrature_matches_formula(beta in 0.05..12.0f64) {
        let f = c_beta_formula(beta).unwrap();
        let q = c_beta_quadrature(beta).unwrap();
        prop_assert!((f - q).abs() <= 1e-9 * f);
        prop_assert!(f > 0.0);
        let t = theta(beta);
        prop_assert!(t > 0.0 && t <= 1.0);
    }
}
