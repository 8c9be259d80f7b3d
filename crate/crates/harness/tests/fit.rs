use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weylab_harness::fit::{fit_points, least_squares, FitModel, MIN_SAMPLES};
use weylab_harness::HarnessError;

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

#[test]
fn exact_power_law() {
    let pts: Vec<(f64, f64)> = geometric(10.0, 1e4, 8)
        .into_iter()
        .map(|l| (l, 3.0 * l.powf(1.25)))
        .collect();
    let f = fit_points(&pts, FitModel::PurePower, None).unwrap();
    assert!((f.exponent - 1.25).abs() <= 1e-12);
    assert!((f.constant - 3.0).abs() <= 1e-12 * 3.0);
    assert!(f.residual_norm <= 1e-12);
    assert_eq!(f.samples, 8);
    assert!((f.eval(500.0) - 3.0 * 500f64.powf(1.25)).abs() <= 1e-9 * f.eval(500.0));
}

#[test]
fn exact_critical_law() {
    let pts: Vec<(f64, f64)> = geometric(1e3, 1e5, 9)
        .into_iter()
        .map(|l| (l, 0.25 * l * l.ln() + 7.0 * l))
        .collect();
    let f = fit_points(&pts, FitModel::LambdaLogLinear, None).unwrap();
    assert!((f.constant - 0.25).abs() <= 1e-10);
    assert!((f.secondary.unwrap() - 7.0).abs() <= 1e-9);
    assert_eq!(f.exponent, 1.0);
}

#[test]
fn power_log_models() {
    let pts: Vec<(f64, f64)> = geometric(10.0, 1e6, 10)
        .into_iter()
        .map(|l| (l, 2.0 * l.powf(1.25) * l.ln().powf(-0.5)))
        .collect();
    let f = fit_points(&pts, FitModel::PowerLogQ { q: -0.5 }, None).unwrap();
    assert!((f.exponent - 1.25).abs() <= 1e-12);
    assert!((f.constant - 2.0).abs() <= 1e-11);

    let pts: Vec<(f64, f64)> = geometric(10.0, 1e6, 10)
        .into_iter()
        .map(|l| (l, 0.5 * l * l.ln()))
        .collect();
    let f = fit_points(&pts, FitModel::PowerLog, None).unwrap();
    assert!((f.exponent - 1.0).abs() <= 1e-12);
}

#[test]
fn noisy_slope_within_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts: Vec<(f64, f64)> = geometric(100.0, 1e4, 12)
        .into_iter()
        .map(|l| (l, 3.0 * l.powf(1.25) * (1.0 + rng.gen_range(-0.01..0.01))))
        .collect();
    let f = fit_points(&pts, FitModel::PurePower, None).unwrap();
    assert!((f.exponent - 1.25).abs() <= 0.02, "{}", f.exponent);
}

#[test]
fn window_selects_samples() {
    let pts: Vec<(f64, f64)> = geometric(1.5, 1e4, 20)
        .into_iter()
        .map(|l| (l, if l < 100.0 { l } else { l * l }))
        .collect();
    let f = fit_points(&pts, FitModel::PurePower, Some((100.0, 1e4))).unwrap();
    assert!((f.exponent - 2.0).abs() <= 1e-12);
    assert_eq!(f.window, (100.0, 1e4));
}

#[test]
fn too_few_samples_is_an_error() {
    let pts: Vec<(f64, f64)> = geometric(10.0, 100.0, MIN_SAMPLES - 1)
        .into_iter()
        .map(|l| (l, l))
        .collect();
    assert!(matches!(
        fit_points(&pts, FitModel::PurePower, None),
        Err(HarnessError::Fit(_))
    ));
}

#[test]
fn rank_deficiency_is_detected() {
    let pts = vec![(100.0, 5.0); 8];
    assert!(matches!(
        fit_points(&pts, FitModel::PurePower, None),
        Err(HarnessError::Fit(_))
    ));
    let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
    assert!(least_squares(&rows, &[1.0, 2.0, 3.0]).is_err());
}

#[test]
fn nonpositive_counts_rejected_for_log_models() {
    let mut pts: Vec<(f64, f64)> = geometric(10.0, 1e3, 8)
        .into_iter()
        .map(|l| (l, l))
        .collect();
    pts[0].1 = 0.0;
    assert!(fit_points(&pts, FitModel::PurePower, None).is_err());
}

proptest! {
    #[test]
    fn recovers_any_power_law(c in 0.1f64..10.0, p in 0.5f64..2.5) {
        let pts: Vec<(f64, f64)> = geometric(10.0, 1e4, 7).into_iter().map(|l| (l, c * l.powf(p))).collect();
        let f = fit_points(&pts, FitModel::PurePower, None).unwrap();
        prop_assert!((f.exponent - p).abs() <= 1e-10);
        prop_assert!((f.constant - c).abs() <= 1e-9 * c);
    }
}
