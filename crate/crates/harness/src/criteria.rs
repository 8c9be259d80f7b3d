//! Numerical acceptance checks. Each returns an outcome with a one-line
//! detail; a check passes only if its tolerance and time budget both hold.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use serde::Serialize;
use weylab_core::asymptotics::{
    integral_weyl_rhs, laplace_morse_bott, laplace_quadrature, truncated_volume, MorseBottData,
    WeylTable,
};
use weylab_core::cone::{collar_curve, cone_count, cone_curve, CollarSpec};
use weylab_core::constants::{gamma_weyl, ExponentProfile, ModelConfig};
use weylab_core::direct2d::{
    assemble_2d, assemble_2d_conformal, bracketing_check, counting_curve_2d, quasi_isometry_check,
    random_conformal_factor, AdaptiveMesh, Bc2D, Domain2D, MeshLadder, MeshSpec2D,
};
use weylab_core::geodesic::{beta_integrals, boundary_distance, c_beta_formula};
use weylab_core::radial1d::{
    eigenvalues_below, hardy_floor_ratio, model_spectrum, LeftBc, RadialOperatorSpec, RightBc,
};
use weylab_core::zeta::{pole_probe, zeta_from_eigenvalues, zeta_value};

use crate::config::ReportCheck;
use crate::error::Result;
use crate::fit::{fit_counting_curve, FitModel};

const CIRCLE: f64 = 2.0 * PI;

/// Wavelength truncation constant for direct counting.
pub const DIRECT_TRUNCATION: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {} ({:.1} s of {:.0} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds,
            self.budget_seconds
        )
    }
}

fn timed(
    id: &'static str,
    title: &'static str,
    budget: Duration,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionOutcome {
    let t = Instant::now();
    let (ok, detail) = match body() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = t.elapsed();
    let within = elapsed <= budget;
    CriterionOutcome {
        id,
        title,
        passed: ok && within,
        detail: if within {
            detail
        } else {
            format!("{detail}; over time budget")
        },
        seconds: elapsed.as_secs_f64(),
        budget_seconds: budget.as_secs_f64(),
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn max_rel(values: &[f64], exact: impl Fn(usize) -> f64) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| ((v - exact(i)) / exact(i)).abs())
        .fold(0.0, f64::max)
}

pub fn radial_oracle() -> CriterionOutcome {
    timed("1", "radial oscillator oracle", secs(10), || {
        let one = model_spectrum(2.0, 1, 10)?.eigenvalues;
        let two = model_spectrum(2.0, 2, 10)?.eigenvalues;
        let e1 = max_rel(&one[..10], |i| 4.0 * (i + 1) as f64);
        let e2 = max_rel(&two[..10], |i| 4.0 * (i + 1) as f64 + 1.0);
        Ok((
            e1 <= 1e-6 && e2 <= 1e-6,
            format!("max rel err n=1 {e1:.2e}, n=2 {e2:.2e} (tol 1e-6)"),
        ))
    })
}

pub fn zeta_exactness() -> CriterionOutcome {
    timed("2", "zeta exactness", secs(10), || {
        let cutoff = 200;
        let eigs = model_spectrum(2.0, 1, cutoff)?.eigenvalues;
        let mut worst: f64 = 0.0;
        for s in [2.0, 3.0, 5.0] {
            let z = zeta_from_eigenvalues(2.0, 1, s, &eigs[..cutoff])?;
            let riemann: f64 = (1..=cutoff).rev().map(|k| (k as f64).powf(-s)).sum();
            worst = worst.max((z.partial_sum * 4f64.powf(s) - riemann).abs());
        }
        let z22 = zeta_value(2.0, 2, 2.0, cutoff)?.total;
        let ok = worst <= 1e-10 && (z22 - 0.074833).abs() <= 1e-5;
        Ok((
            ok,
            format!("partial-sum deviation {worst:.2e} (tol 1e-10); zeta_2,2(2) = {z22:.7}"),
        ))
    })
}

pub fn pole_of_weyl_coefficient() -> CriterionOutcome {
    timed("3", "pole of A(beta, 1)", secs(120), || {
        let probe = pole_probe(1, &[2.4, 2.2, 2.1, 2.05], weylab_core::zeta::DEFAULT_CUTOFF)?;
        let v: Vec<f64> = probe.rows.iter().map(|r| r.normalized).collect();
        let dist: Vec<f64> = v.iter().map(|x| (x - 1.0).abs()).collect();
        let monotone = v.windows(2).all(|w| w[1] >= w[0]) || v.windows(2).all(|w| w[1] <= w[0]);
        let toward = dist.windows(2).all(|w| w[1] <= w[0]);
        let lim = probe.extrapolated;
        let ok = monotone && toward && (0.95..=1.05).contains(&lim);
        let seq: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
        Ok((
            ok,
            format!(
                "(beta-2) 2pi A = [{}], extrapolated {lim:.4}",
                seq.join(", ")
            ),
        ))
    })
}

pub fn boundary_distance_check() -> CriterionOutcome {
    timed("4", "boundary distance constant", secs(30), || {
        let mut worst: f64 = 0.0;
        for beta in [0.5, 1.0, 2.0, 4.0] {
            let r = boundary_distance(beta, 1.0)?;
            worst = worst.max((r.c_formula - r.c_shooting).abs() / r.c_formula);
        }
        let c2 = c_beta_formula(2.0)?;
        let e2 = (c2 - (2.0 * PI).sqrt()).abs() / (2.0 * PI).sqrt();
        let mut id: f64 = 0.0;
        for i in 1..=50 {
            let beta = 10.0 * i as f64 / 50.0;
            let (i0, i1) = beta_integrals(beta)?;
            id = id.max((i1 - 2.0 / (2.0 + beta) * i0).abs() / i0);
        }
        let ok = worst <= 1e-6 && e2 <= 1e-9 && id <= 1e-10;
        Ok((ok, format!("shooting {worst:.2e} (tol 1e-6), c_2 {e2:.2e} (tol 1e-9), I1 identity {id:.2e} (tol 1e-10)")))
    })
}

/// Radial zero-sector count on `(x_min, b)` below `lambda`.
fn zero_sector_count(beta: f64, x_min: f64, b: f64, lambda: f64) -> Result<usize> {
    let spec = RadialOperatorSpec::new(
        beta,
        1,
        0.0,
        (x_min, b),
        LeftBc::DirichletAtA,
        RightBc::Dirichlet,
    )?;
    Ok(eigenvalues_below(&spec, lambda, 1e-12)?.eigenvalues.len())
}

pub fn constant_cell_cross_check() -> CriterionOutcome {
    timed("5", "cone vs direct at beta = 4", secs(900), || {
        let beta = 4.0;
        let b = 5.0;
        let compare = [200.0, 300.0, 400.0, 500.0];
        // The top decade of both curves, shared with the comparison samples.
        let decade: Vec<f64> = (0..8).map(|i| 50.0 * 10f64.powf(i as f64 / 7.0)).collect();
        let mut lambdas: Vec<f64> = decade.iter().chain(&compare).copied().collect();
        lambdas.sort_by(f64::total_cmp);
        lambdas.dedup_by(|x, y| (*x - *y).abs() < 1e-9 * *y);
        let profile = ExponentProfile::constant(beta)?;
        let domain = Domain2D {
            b,
            circumference: CIRCLE,
            right_bc: Bc2D::Dirichlet,
        };
        let ladder = MeshLadder::Adaptive(AdaptiveMesh::default());
        let (direct, records) =
            counting_curve_2d(&profile, &domain, &ladder, &lambdas, DIRECT_TRUNCATION)?;
        let x_min = DIRECT_TRUNCATION / 500f64.sqrt();
        let mut worst: f64 = 0.0;
        let mut converged = true;
        let mut rows = Vec::new();
        for (s, r) in direct.samples.iter().zip(&records) {
            if !compare.iter().any(|&l| (l - s.lambda).abs() < 1e-9 * l) {
                continue;
            }
            let cone = cone_count(beta, 1, &[CIRCLE], s.lambda)? as f64;
            let zero = zero_sector_count(beta, x_min, b, s.lambda)? as f64;
            let positive = s.count - zero;
            worst = worst.max((positive - cone).abs() / cone);
            converged &= r.accepted;
            rows.push(format!(
                "{}: direct {} (zero sector {}), cone {}{}",
                s.lambda,
                s.count,
                zero,
                cone,
                if r.accepted { "" } else { " unconverged" }
            ));
        }
        let window = Some((50.0 * (1.0 - 1e-12), 500.0 * (1.0 + 1e-12)));
        let cone_slope = fit_counting_curve(
            &cone_curve(beta, 1, &[CIRCLE], &decade)?,
            FitModel::PurePower,
            window,
        )?
        .exponent;
        let direct_slope = fit_counting_curve(&direct, FitModel::PurePower, window)?.exponent;
        let slope_ok = (cone_slope - 1.5).abs() <= 0.05 || (direct_slope - 1.5).abs() <= 0.05;
        let ok = converged && worst <= 0.02 && slope_ok;
        Ok((
            ok,
            format!(
                "max rel diff {worst:.4} (tol 0.02); slopes over [50, 500]: cone {cone_slope:.4}, direct {direct_slope:.4} (either 1.5 +- 0.05); {}",
                rows.join("; ")
            ),
        ))
    })
}

pub fn critical_logarithm() -> CriterionOutcome {
    timed("6", "critical logarithm on the collar", secs(1200), || {
        let spec = CollarSpec {
            beta: 2.0,
            n: 1,
            torus: vec![CIRCLE],
            b: 1.0,
            right_bc: RightBc::Dirichlet,
            x_min: 0.0,
        };
        let lambdas: Vec<f64> = (0..11).map(|i| 1e3 * 10f64.powf(0.2 * i as f64)).collect();
        let curve = collar_curve(&spec, &lambdas, None)?;
        let fit = fit_counting_curve(&curve, FitModel::LambdaLogLinear, None)?;
        let c = fit.constant;
        Ok((
            (0.2125..=0.2875).contains(&c),
            format!(
                "c = {c:.4}, c' = {:.4} (c in [0.2125, 0.2875])",
                fit.secondary.unwrap_or(f64::NAN)
            ),
        ))
    })
}

pub fn supercritical_variable() -> CriterionOutcome {
    timed(
        "7",
        "variable-exponent supercritical regime",
        secs(1800),
        || {
            let profile = ExponentProfile::cosine_well(3.0, 1.0, 0.0)?;
            let domain = Domain2D {
                b: 1.0,
                circumference: CIRCLE,
                right_bc: Bc2D::Dirichlet,
            };
            let lambdas: Vec<f64> = (0..6).map(|i| 320.0 * 10f64.powf(0.2 * i as f64)).collect();
            let ladder = MeshLadder::Adaptive(AdaptiveMesh::default());
            let (curve, records) =
                counting_curve_2d(&profile, &domain, &ladder, &lambdas, DIRECT_TRUNCATION)?;
            let fit = fit_counting_curve(&curve, FitModel::PurePower, None)?;
            let beta_bar = 2.5;
            let table = WeylTable::for_profile(1, beta_bar, profile.beta_max())?;
            let model = ModelConfig::circle(1.0, CIRCLE);
            let mut ratios = Vec::new();
            for s in curve.accepted() {
                ratios.push(
                    s.count / integral_weyl_rhs(&profile, &model, beta_bar, s.lambda, &table)?,
                );
            }
            let monotone =
                ratios.windows(2).all(|w| w[1] >= w[0]) || ratios.windows(2).all(|w| w[1] <= w[0]);
            let top = ratios.last().copied().unwrap_or(f64::NAN);
            let accepted = records.iter().filter(|r| r.accepted).count();
            let ok = (fit.exponent - 1.25).abs() <= 0.08 && monotone && (0.5..=2.0).contains(&top);
            let rs: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
            Ok((
                ok,
                format!(
                    "slope {:.4} (1.25 +- 0.08) over {accepted} accepted samples, N/rhs = [{}]",
                    fit.exponent,
                    rs.join(", ")
                ),
            ))
        },
    )
}

pub fn subcritical_constant() -> CriterionOutcome {
    timed("8", "subcritical truncated-volume law", secs(900), || {
        let profile = ExponentProfile::constant(1.0)?;
        let domain = Domain2D {
            b: 1.0,
            circumference: CIRCLE,
            right_bc: Bc2D::Dirichlet,
        };
        let lambdas = [250.0, 500.0, 1000.0, 2000.0];
        let ladder = MeshLadder::Adaptive(AdaptiveMesh::default());
        let (curve, _) =
            counting_curve_2d(&profile, &domain, &ladder, &lambdas, DIRECT_TRUNCATION)?;
        let model = ModelConfig::circle(1.0, CIRCLE);
        let Some(top) = curve.accepted().last() else {
            return Ok((false, "no accepted sample".into()));
        };
        let r = top.count
            / (gamma_weyl(2) * top.lambda * truncated_volume(&profile, &model, top.lambda)?);
        Ok((
            (0.9..=1.1).contains(&r),
            format!("ratio {r:.4} at lambda = {} (in [0.9, 1.1])", top.lambda),
        ))
    })
}

pub fn laplace_method() -> CriterionOutcome {
    timed("9", "Morse-Bott Laplace method", secs(5), || {
        let f = |y: f64| -(1.0 - y.cos());
        let data = MorseBottData::locate(f, CIRCLE)?;
        let mut errs = Vec::new();
        for tau in [50.0, 100.0, 200.0] {
            let l = laplace_morse_bott(&data, |_| 1.0, tau)?;
            let q = laplace_quadrature(f, |_| 1.0, tau, CIRCLE, 0.0, 0.0);
            errs.push((l - q).abs() / q);
        }
        let ok = errs[0] <= 0.01
            && errs[1] <= 0.005
            && errs[2] <= 0.0025
            && errs[1] < errs[0]
            && errs[2] < errs[1];
        Ok((
            ok,
            format!(
                "rel errors {:.2e}, {:.2e}, {:.2e}",
                errs[0], errs[1], errs[2]
            ),
        ))
    })
}

pub fn hardy_floor() -> CriterionOutcome {
    timed("10", "Hardy floor", secs(10), || {
        let mut ok = true;
        let mut parts = Vec::new();
        for beta in [0.0, 2.0] {
            let d = hardy_floor_ratio(beta, 1, 1.0, 1e4, RightBc::Dirichlet)?;
            let n = hardy_floor_ratio(beta, 1, 1.0, 1e4, RightBc::Neumann)?;
            ok &= d >= PI * PI * 0.99 && n >= PI * PI / 4.0 * 0.99;
            parts.push(format!("beta={beta}: D {d:.4}, N {n:.4}"));
        }
        Ok((ok, parts.join("; ")))
    })
}

pub fn quasi_isometry_squeeze() -> CriterionOutcome {
    timed("11", "quasi-isometry squeeze", secs(600), || {
        let eps = 0.1;
        let profile = ExponentProfile::cosine_well(3.0, 1.0, 0.0)?;
        let mesh = MeshSpec2D::graded(0.05, 1.0, 0.02, 1.1, 0.05, 16, CIRCLE)?;
        let g1 = assemble_2d(&profile, &mesh, Bc2D::Dirichlet, Bc2D::Neumann)?;
        let samples: Vec<f64> = (1..=10).map(|i| 25.0 * i as f64).collect();
        let mut violations = 0;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for trial in 0..100u64 {
            let rho = random_conformal_factor(eps, trial, CIRCLE);
            let g2 = assemble_2d_conformal(&profile, &mesh, Bc2D::Dirichlet, Bc2D::Neumann, rho)?;
            let r = quasi_isometry_check(&g1, &g2, eps, 2, &samples)?;
            violations += usize::from(!r.holds);
            lo = lo.min(r.min_ratio);
            hi = hi.max(r.max_ratio);
        }
        Ok((
            violations == 0,
            format!(
                "{violations} violations in 100 trials; eigenvalue ratios in [{lo:.4}, {hi:.4}]"
            ),
        ))
    })
}

pub fn bracketing() -> CriterionOutcome {
    timed("12", "Dirichlet-Neumann bracketing", secs(600), || {
        let samples: Vec<f64> = (1..=10).map(|i| 20.0 * i as f64).collect();
        let mut violations = 0;
        let mut rows = 0;
        for (beta, b) in [(0.0, 1.0), (2.0, 2.0)] {
            let profile = ExponentProfile::constant(beta)?;
            let mesh = MeshSpec2D::uniform(40, 16, 0.0, b, CIRCLE)?;
            for right in [Bc2D::Dirichlet, Bc2D::Neumann] {
                let r = bracketing_check(&profile, &mesh, right, 0.5, &samples)?;
                violations += r
                    .rows
                    .iter()
                    .filter(|row| !(row.dirichlet <= row.whole && row.whole <= row.neumann))
                    .count();
                rows += r.rows.len();
            }
        }
        Ok((
            violations == 0,
            format!("{violations} violations in {rows} samples"),
        ))
    })
}

pub fn run_check(check: ReportCheck) -> CriterionOutcome {
    match check {
        ReportCheck::RadialOracle => radial_oracle(),
        ReportCheck::ZetaExactness => zeta_exactness(),
        ReportCheck::BoundaryDistance => boundary_distance_check(),
        ReportCheck::Laplace => laplace_method(),
        ReportCheck::HardyFloor => hardy_floor(),
    }
}

pub type CriterionFn = fn() -> CriterionOutcome;

/// Every acceptance criterion, in order.
pub const ALL: [CriterionFn; 12] = [
    radial_oracle,
    zeta_exactness,
    pole_of_weyl_coefficient,
    boundary_distance_check,
    constant_cell_cross_check,
    critical_logarithm,
    supercritical_variable,
    subcritical_constant,
    laplace_method,
    hardy_floor,
    quasi_isometry_squeeze,
    bracketing,
];
