use std::f64::consts::PI;

use proptest::prelude::*;
use weylab_core::radial1d::*;

fn oscillator(n: usize, mu: f64) -> Spectrum {
    let spec = RadialOperatorSpec::model(2.0, n, mu, 20.0, RightBc::Dirichlet).unwrap();
    eigenvalues_below(&spec, 90.0, 1e-13).unwrap()
}

#[test]
fn harmonic_oscillator_ladders() {
    // Radial oscillator: 4m + 2l + 3 with l = beta n / 4 - 1/2 + 1/2.
    for (n, shift) in [(1usize, 0.0), (2, 1.0)] {
        let s = oscillator(n, 1.0);
        for k in 1..=10 {
            let exact = 4.0 * k as f64 + shift;
            let rel = (s.eigenvalues[k - 1] - exact).abs() / exact;
            assert!(rel <= 1e-6, "n={n} k={k}: {}", s.eigenvalues[k - 1]);
        }
    }
}

#[test]
fn scaling_covariance() {
    let base = oscillator(1, 1.0);
    for mu in [4.0f64, 16.0] {
        let spec = RadialOperatorSpec::model(2.0, 1, mu, 20.0, RightBc::Dirichlet).unwrap();
        let s = eigenvalues_below(&spec, 80.0, 1e-13).unwrap();
        let f = mu.powf(0.5);
        for (k, e) in s.eigenvalues.iter().enumerate() {
            assert!(
                (e - f * base.eigenvalues[k]).abs() <= 1e-5 * e,
                "mu={mu} k={k}"
            );
        }
    }
    let spec = RadialOperatorSpec::model(2.0, 1, 4.0, 20.0, RightBc::Dirichlet).unwrap();
    let s = eigenvalues_below(&spec, 81.0, 1e-13).unwrap();
    for (k, e) in s.eigenvalues.iter().enumerate() {
        assert!((e - 8.0 * (k + 1) as f64).abs() < 1e-6 * e);
    }
}

#[test]
fn friedrichs_ladder() {
    let spec = RadialOperatorSpec::new(
        2.0,
        1,
        1.0,
        (0.1, 20.0),
        LeftBc::DirichletAtA,
        RightBc::Dirichlet,
    )
    .unwrap();
    let r1 = friedrichs_extrapolate(&spec, 1, 1e-7).unwrap();
    assert!((r1.limit - 4.0).abs() < 1e-6 * 4.0, "{}", r1.limit);
    assert!(r1
        .eigenvalues
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    let r3 = friedrichs_extrapolate(&spec, 3, 1e-7).unwrap();
    assert!((r3.limit - 12.0).abs() < 1e-6 * 12.0, "{}", r3.limit);
}

#[test]
fn hardy_floor_examples() {
    let lam = 1e4;
    let d0 = hardy_floor_ratio(0.0, 1, 1.0, lam, RightBc::Dirichlet).unwrap();
    assert!((d0 - PI * PI).abs() < 1e-6 * PI * PI);
    let n0 = hardy_floor_ratio(0.0, 1, 1.0, lam, RightBc::Neumann).unwrap();
    assert!((n0 - PI * PI / 4.0).abs() < 1e-6 * PI * PI);
    let d2 = hardy_floor_ratio(2.0, 1, 1.0, lam, RightBc::Dirichlet).unwrap();
    assert!(d2 >= PI * PI);
    assert!(hardy_floor_ratio(0.0, 1, 2.0, lam, RightBc::Dirichlet).is_err());
}

#[test]
fn neumann_bound_examples() {
    assert!(uniform_neumann_bound_check(2.0, 1, (0.0, 20.0), 100.0).is_err());
    let full = uniform_neumann_bound_check(4.0, 1, (0.0, 20.0), 100.0).unwrap();
    assert!(full.holds, "{full:?}");
    let shrunk = uniform_neumann_bound_check(4.0, 1, (0.5, 3.0), 100.0).unwrap();
    assert!(shrunk.holds, "{shrunk:?}");
}

#[test]
fn neumann_below_dirichlet() {
    let d = RadialOperatorSpec::new(
        3.0,
        1,
        1.0,
        (0.2, 3.0),
        LeftBc::DirichletAtA,
        RightBc::Dirichlet,
    )
    .unwrap();
    let n = RadialOperatorSpec::new(
        3.0,
        1,
        1.0,
        (0.2, 3.0),
        LeftBc::DirichletAtA,
        RightBc::Neumann,
    )
    .unwrap();
    let ed = eigenvalues_below(&d, 200.0, 1e-12).unwrap().eigenvalues;
    let en = eigenvalues_below(&n, 200.0, 1e-12).unwrap().eigenvalues;
    assert!(en.len() >= ed.len());
    for (a, b) in en.iter().zip(&ed) {
        assert!(a <= b);
    }
}

#[test]
fn truncation_convergence() {
    let mut prev: Option<Vec<f64>> = None;
    for l in [3.0, 9.0, 18.0] {
        let spec = RadialOperatorSpec::model(4.0, 1, 1.0, l, RightBc::Dirichlet).unwrap();
        let e = eigenvalues_below(&spec, 60.0, 1e-13).unwrap().eigenvalues;
        if let Some(p) = prev {
            for (a, b) in e.iter().zip(&p) {
                assert!(*a <= b * (1.0 + 1e-9), "L={l}");
            }
            if l >= 18.0 {
                // Turning points of nu < 60 sit well below L / 3 here.
                for (a, b) in e.iter().zip(&p) {
                    assert!((a - b).abs() <= 1e-8 * a);
                }
            }
        }
        prev = Some(e);
    }
}

#[test]
fn bisection_matches_sturm_on_every_level() {
    let spec = RadialOperatorSpec::model(3.0, 1, 2.0, 8.0, RightBc::Neumann).unwrap();
    let s = eigenvalues_below(&spec, 150.0, 1e-12).unwrap();
    for level in &s.levels {
        let below = level
            .eigenvalues
            .iter()
            .filter(|&&e| e < s.lambda_max)
            .count();
        assert!(below <= level.count_at_max);
    }
    assert!(s.eigenvalues.windows(2).all(|w| w[1] > w[0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sturm_count_is_monotone(beta in 0.0..5.0f64, mu in 0.0..5.0f64, l1 in 1.0..80.0f64, dl in 0.0..80.0f64) {
        let spec = RadialOperatorSpec::new(beta, 1, mu, (0.05, 4.0), LeftBc::DirichletAtA, RightBc::Dirichlet).unwrap();
        let grid = base_grid(&spec, 200.0, &SolverOptions::default()).unwrap();
        let p = assemble_pencil(&spec, &grid).unwrap();
        let a = sturm_count(&p, l1).count;
        let b = sturm_count(&p, l1 + dl).count;
        prop_assert!(a <= b);
    }

    #[test]
    fn dirichlet_domain_monotonicity(beta in 0.5..4.0f64, a in 0.05..0.5f64, da in 0.01..0.5f64) {
        let wide = RadialOperatorSpec::new(beta, 1, 1.0, (a, 5.0), LeftBc::DirichletAtA, RightBc::Dirichlet).unwrap();
        let narrow = wide.with_interval(a + da, 5.0, LeftBc::DirichletAtA).unwrap();
        let ew = eigenvalues_below(&wide, 120.0, 1e-11).unwrap().eigenvalues;
        let en = eigenvalues_below(&narrow, 120.0, 1e-11).unwrap().eigenvalues;
        prop_assert!(en.len() <= ew.len());
        for (x, y) in en.iter().zip(&ew) {
            prop_assert!(*x >= y * (1.0 - 1e-9));
        }
    }

    #[test]
    fn spectrum_is_above_potential_minimum(beta in 0.0..4.0f64, mu in 0.1..4.0f64) {
        let spec = RadialOperatorSpec::new(beta, 1, mu, (0.1, 3.0), LeftBc::DirichletAtA, RightBc::Neumann).unwrap();
        let e = eigenvalues_below(&spec, 100.0, 1e-11).unwrap().eigenvalues;
        let vmin = (0..=1000).map(|i| spec.potential(0.1 + 2.9 * i as f64 / 1000.0)).fold(f64::INFINITY, f64::min);
        for x in e {
            prop_assert!(x >= vmin * (1.0 - 1e-6));
        }
    }
}
