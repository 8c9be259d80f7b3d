use std::f64::consts::PI;

use proptest::prelude::*;
use weylab_core::cone::*;
use weylab_core::radial1d::{eigenvalues_below, LeftBc, RadialOperatorSpec, RightBc};

const CIRCLE: f64 = 2.0 * PI;

fn collar(beta: f64, b: f64, right_bc: RightBc) -> CollarSpec {
    CollarSpec {
        beta,
        n: 1,
        torus: vec![CIRCLE],
        b,
        right_bc,
        x_min: 0.0,
    }
}

fn brute_lattice(torus: &[f64], lambda: f64) -> u64 {
    let bound = |l: f64| (l * lambda.max(0.0).sqrt() / (2.0 * PI)).ceil() as i64 + 1;
    let mu = |j: i64, l: f64| (2.0 * PI * j as f64 / l).powi(2);
    match torus {
        [l] => (-bound(*l)..=bound(*l))
            .filter(|&j| mu(j, *l) <= lambda * (1.0 + 1e-12))
            .count() as u64,
        [l1, l2] => {
            let mut n = 0;
            for j1 in -bound(*l1)..=bound(*l1) {
                for j2 in -bound(*l2)..=bound(*l2) {
                    if mu(j1, *l1) + mu(j2, *l2) <= lambda * (1.0 + 1e-12) {
                        n += 1;
                    }
                }
            }
            n
        }
        _ => unreachable!(),
    }
}

#[test]
fn lattice_examples() {
    assert_eq!(lattice_count(&[CIRCLE], 10.0).total, 7);
    let zero = lattice_count(&[CIRCLE], 0.0);
    assert_eq!((zero.total, zero.zero_mode, zero.positive()), (1, 1, 0));
    assert_eq!(lattice_count(&[CIRCLE, CIRCLE], 2.0).total, 9);
}

#[test]
fn cone_matches_double_enumeration() {
    let beta: f64 = 4.0;
    let lambda = 500.0;
    let eigs = cone_radial_spectrum(beta, 1, 2.0 * lambda).unwrap();
    let mut brute = 0u64;
    for &nu in &eigs {
        for j in 1..10_000i64 {
            let mu = (j as f64).powi(2);
            if mu.powf(2.0 / (beta + 2.0)) * nu > lambda {
                break;
            }
            brute += 2;
        }
    }
    let n = cone_count(beta, 1, &[CIRCLE], lambda).unwrap();
    assert_eq!(n, brute);
    assert!(n > 1000);
}

#[test]
fn cone_is_empty_below_threshold() {
    let nu1 = cone_radial_spectrum(4.0, 1, 20.0).unwrap()[0];
    // The first positive circle mode is mu = 1, so the threshold is nu_1.
    assert_eq!(cone_count(4.0, 1, &[CIRCLE], 0.99 * nu1).unwrap(), 0);
    assert_eq!(cone_count(4.0, 1, &[CIRCLE], 1.01 * nu1).unwrap(), 2);
}

#[test]
fn flat_cylinder_collar() {
    let n = collar_count(&collar(0.0, 1.0, RightBc::Dirichlet), 50.0).unwrap();
    let mut brute = 0;
    for k in 1..10i64 {
        for j in -10..=10i64 {
            if PI * PI * (k * k) as f64 + (j * j) as f64 <= 50.0 {
                brute += 1;
            }
        }
    }
    assert_eq!(brute, 20);
    assert_eq!(n, 20);
}

#[test]
fn collar_is_bounded_by_cone() {
    for b in [1.0, 2.0] {
        let table = CollarTable::build(&collar(4.0, b, RightBc::Dirichlet), 100.0).unwrap();
        let cone = cone_count(4.0, 1, &[CIRCLE], 100.0).unwrap();
        assert!(table.positive_count(100.0).unwrap() <= cone, "b={b}");
    }
}

#[test]
fn long_collar_matches_cone() {
    let lambda = 500.0;
    let table = CollarTable::build(&collar(4.0, 5.0, RightBc::Dirichlet), lambda).unwrap();
    let cone = cone_count(4.0, 1, &[CIRCLE], lambda).unwrap() as f64;
    let pos = table.positive_count(lambda).unwrap() as f64;
    assert!((pos - cone).abs() <= 0.01 * cone, "{pos} vs {cone}");
    assert_eq!(
        table.count(lambda).unwrap(),
        table.positive_count(lambda).unwrap() + table.zero_mode_count(lambda).unwrap()
    );
}

#[test]
fn wavelength_truncation_is_inert() {
    let lambda: f64 = 500.0;
    let spec = collar(4.0, 5.0, RightBc::Dirichlet);
    let full = collar_count(&spec, lambda).unwrap() as f64;
    let cut = collar_curve(&spec, &[lambda], Some(0.1)).unwrap();
    assert_eq!(cut.provenance, Provenance::TruncatedCollar);
    let trunc = cut.samples[0].count;
    assert!((trunc - full).abs() <= 0.005 * full, "{trunc} vs {full}");
    assert!(trunc <= full);
}

#[test]
fn critical_collar_log_law() {
    let lambda: f64 = 1e4;
    let n = collar_count(&collar(2.0, 1.0, RightBc::Dirichlet), lambda).unwrap() as f64;
    let ratio = n / (lambda * lambda.ln());
    assert!((ratio - 0.25).abs() <= 0.15 * 0.25, "ratio {ratio}");
}

fn fitted_leading_constant(right_bc: RightBc) -> f64 {
    // N = c lambda^{3/2} + c' lambda by least squares.
    let lambdas: Vec<f64> = (0..8).map(|i| 250.0 * 2f64.powf(i as f64 / 2.0)).collect();
    let curve = collar_curve(&collar(4.0, 1.0, right_bc), &lambdas, None).unwrap();
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in &curve.samples {
        // Rows scaled by lambda^{-3/2} so every sample carries equal weight.
        let (a, b, y) = (1.0, s.lambda.powf(-0.5), s.count * s.lambda.powf(-1.5));
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        r1 += a * y;
        r2 += b * y;
    }
    (r1 * s22 - r2 * s12) / (s11 * s22 - s12 * s12)
}

#[test]
fn dirichlet_and_neumann_share_the_leading_constant() {
    let d = fitted_leading_constant(RightBc::Dirichlet);
    let n = fitted_leading_constant(RightBc::Neumann);
    assert!((d - n).abs() <= 0.02 * d, "{d} vs {n}");
}

#[test]
fn table_matches_direct_solves_off_grid() {
    let lambda = 400.0;
    let spec = collar(3.0, 2.0, RightBc::Dirichlet);
    let table = CollarTable::build(&spec, lambda).unwrap();
    assert!(table.validation_error <= TABLE_TOL);
    for mu in [2.3f64, 17.7, 61.1] {
        let sigma = mu.powf(1.0 / 5.0);
        let radial = RadialOperatorSpec::new(
            3.0,
            1,
            mu,
            (0.0, 2.0),
            LeftBc::FriedrichsLimit,
            RightBc::Dirichlet,
        )
        .unwrap();
        let direct = eigenvalues_below(&radial, lambda, 1e-12)
            .unwrap()
            .eigenvalues;
        assert!(!direct.is_empty());
        for (k, &e) in direct.iter().enumerate() {
            let t = sigma * sigma * table.nu(k, sigma).unwrap();
            assert!((t - e).abs() <= TABLE_TOL * e, "mu={mu} k={k}: {t} vs {e}");
        }
    }
}

#[test]
fn curves_are_monotone_with_provenance() {
    let lambdas = [50.0, 100.0, 200.0, 400.0];
    let c = cone_curve(4.0, 1, &[CIRCLE], &lambdas).unwrap();
    assert_eq!(c.provenance, Provenance::ConeSeparated);
    assert!(c.counts().windows(2).all(|w| w[1] >= w[0]));
    let k = collar_curve(&collar(4.0, 1.0, RightBc::Neumann), &lambdas, None).unwrap();
    assert_eq!(k.provenance, Provenance::CollarSeparated);
    assert!(k.counts().windows(2).all(|w| w[1] >= w[0]));
    let bad = vec![
        CountingSample {
            lambda: 2.0,
            count: 1.0,
            accepted: true,
        },
        CountingSample {
            lambda: 1.0,
            count: 2.0,
            accepted: true,
        },
    ];
    assert!(CountingCurve::new(Provenance::DirectFem, bad, "bad").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_count_matches_brute_force(l1 in 1.0..12.0f64, l2 in 1.0..12.0f64, lambda in 0.0..60.0f64, two in any::<bool>()) {
        let torus = if two { vec![l1, l2] } else { vec![l1] };
        let c = lattice_count(&torus, lambda);
        prop_assert_eq!(c.total, brute_lattice(&torus, lambda));
        let modes = TangentialSpectrum::new(torus.clone()).unwrap().positive_modes(lambda);
        prop_assert_eq!(modes.iter().map(|m| m.1).sum::<u64>(), c.positive());
        prop_assert!(modes.windows(2).all(|w| w[1].0 > w[0].0));
    }
}
