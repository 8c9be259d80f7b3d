use std::f64::consts::PI;

use proptest::prelude::*;
use weylab_core::constants::ExponentProfile;
use weylab_core::direct2d::*;
use weylab_core::quadrature::adaptive_simpson_rel;
use weylab_core::radial1d::{eigenvalues_below, LeftBc, RadialOperatorSpec, RightBc};

const CIRCLE: f64 = 2.0 * PI;

fn constant(beta: f64) -> ExponentProfile {
    ExponentProfile::constant(beta).unwrap()
}

fn merged_sectors(beta: f64, (a, b): (f64, f64), left: LeftBc, top: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for j in 0..=(top.sqrt() as usize + 1) {
        let spec =
            RadialOperatorSpec::new(beta, 1, (j * j) as f64, (a, b), left, RightBc::Dirichlet)
                .unwrap();
        for v in eigenvalues_below(&spec, top, 1e-12).unwrap().eigenvalues {
            out.push(v);
            if j > 0 {
                out.push(v);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn flat_cylinder_product_spectrum() {
    let mesh = MeshSpec2D::uniform(64, 64, 0.0, 1.0, CIRCLE).unwrap();
    let p = assemble_2d(&constant(0.0), &mesh, Bc2D::Dirichlet, Bc2D::Dirichlet).unwrap();
    let eigs = lowest_eigenvalues_2d(&p, 20, 1e-10).unwrap();
    let mut exact = Vec::new();
    for k in 1..6i64 {
        for j in -8..=8i64 {
            exact.push(PI * PI * (k * k) as f64 + (j * j) as f64);
        }
    }
    exact.sort_by(f64::total_cmp);
    for (e, x) in eigs.iter().zip(&exact) {
        assert!((e - x).abs() <= 1e-3 * x, "{e} vs {x}");
    }
    assert_eq!(inertia_count(&p, 50.0).count, 20);
    assert_eq!(inertia_count(&p, 0.0).count, 0);
    assert_eq!(inertia_count(&p, eigs[0] * (1.0 + 1e-9)).count, 1);
}

#[test]
fn fourier_sectors_decouple() {
    // beta = 2: the j = +-1 sector has the oscillator ground state 4.
    let (x_min, b) = (0.01, 6.0);
    let mesh = MeshSpec2D::graded(x_min, b, 0.005, 1.05, 0.02, 32, CIRCLE).unwrap();
    let p = assemble_2d(&constant(2.0), &mesh, Bc2D::Dirichlet, Bc2D::Dirichlet).unwrap();
    let eigs = lowest_eigenvalues_2d(&p, 20, 1e-9).unwrap();
    let radial = merged_sectors(2.0, (x_min, b), LeftBc::DirichletAtA, 40.0);
    for (k, (e, r)) in eigs.iter().zip(&radial).enumerate() {
        assert!((e - r).abs() <= 1e-3 * r, "k={k}: {e} vs {r}");
    }
    let near_four = eigs.iter().filter(|&&e| (e - 4.0).abs() < 1e-3).count();
    assert_eq!(near_four, 2);
}

#[test]
fn mass_total_matches_weighted_area() {
    let profile = ExponentProfile::cosine_well(3.0, 1.0, 0.0).unwrap();
    let mesh = MeshSpec2D::graded(0.05, 1.0, 0.01, 1.1, 0.05, 64, CIRCLE).unwrap();
    let p = assemble_2d(&profile, &mesh, Bc2D::Neumann, Bc2D::Neumann).unwrap();
    let hy = CIRCLE / 64.0;
    let x = mesh.x_nodes();
    let mut midpoint = 0.0;
    for w in x.windows(2) {
        let xc = 0.5 * (w[0] + w[1]);
        for ey in 0..64 {
            midpoint += (w[1] - w[0]) * hy * xc.powf(-0.5 * profile.eval((ey as f64 + 0.5) * hy));
        }
    }
    let total = p.full_mass_sum();
    assert!((total - midpoint).abs() <= 1e-10 * midpoint);
    let exact = adaptive_simpson_rel(
        |y: f64| {
            // (1 - a^s) / s, finite at s = 0.
            let s = 1.0 - 0.5 * profile.eval(y);
            let t = s * 0.05f64.ln();
            if t.abs() < 1e-12 {
                -0.05f64.ln()
            } else {
                -t.exp_m1() / s
            }
        },
        0.0,
        CIRCLE,
        1e-12,
    );
    assert!((total - exact).abs() <= 5e-3 * exact);
}

#[test]
fn weight_overflow_is_rejected() {
    let mesh = MeshSpec2D::uniform(32, 16, 0.0, 1e-300, CIRCLE).unwrap();
    assert!(assemble_2d(&constant(4.0), &mesh, Bc2D::Dirichlet, Bc2D::Dirichlet).is_err());
}

#[test]
fn inertia_matches_bisection() {
    let profile = ExponentProfile::cosine_well(3.0, 1.0, 0.0).unwrap();
    let mesh = MeshSpec2D::graded(0.02, 1.0, 0.01, 1.1, 0.05, 32, CIRCLE).unwrap();
    for right in [Bc2D::Dirichlet, Bc2D::Neumann] {
        let p = assemble_2d(&profile, &mesh, Bc2D::Dirichlet, right).unwrap();
        let (eigs, _) = eigenvalues_below_2d(&p, 150.0, 1e-10);
        for lam in [20.0, 60.0, 100.0, 150.0] {
            let by_bisection = eigs.iter().filter(|&&e| e < lam).count();
            assert_eq!(by_bisection, inertia_count(&p, lam).count);
        }
        let mut prev = 0;
        for i in 0..40 {
            let n = inertia_count(&p, 5.0 * i as f64).count;
            assert!(n >= prev);
            prev = n;
        }
    }
}

#[test]
fn hardy_truncation_is_inert() {
    let profile = ExponentProfile::cosine_well(3.0, 1.0, 0.0).unwrap();
    let domain = Domain2D {
        b: 1.0,
        circumference: CIRCLE,
        right_bc: Bc2D::Dirichlet,
    };
    let ladder = MeshLadder::Adaptive(AdaptiveMesh::default());
    let (a, ra) = counting_curve_2d(&profile, &domain, &ladder, &[400.0], 0.1).unwrap();
    let (b, rb) = counting_curve_2d(&profile, &domain, &ladder, &[400.0], 0.05).unwrap();
    assert!(ra[0].accepted && rb[0].accepted);
    let (na, nb) = (a.samples[0].count, b.samples[0].count);
    assert!((na - nb).abs() <= 0.005 * na, "{na} vs {nb}");
}

#[test]
fn flat_curve_has_classical_slope() {
    // A Neumann end cancels the Dirichlet boundary term at x_min.
    let domain = Domain2D {
        b: 1.0,
        circumference: CIRCLE,
        right_bc: Bc2D::Neumann,
    };
    let lambdas: Vec<f64> = (0..6).map(|i| 200.0 * 10f64.powf(i as f64 / 5.0)).collect();
    let ladder = MeshLadder::Adaptive(AdaptiveMesh::default());
    let (curve, records) =
        counting_curve_2d(&constant(0.0), &domain, &ladder, &lambdas, 0.1).unwrap();
    // A sample on a degenerate cluster may be rejected by the level gate.
    assert!(
        records.iter().filter(|r| r.accepted).count() >= 5,
        "{records:?}"
    );
    assert!(records[0].accepted && records[5].accepted);
    let c = curve.counts();
    let slope = (c[5] / c[0]).ln() / 10f64.ln();
    assert!((slope - 1.0).abs() <= 0.05, "slope {slope}");
}

#[test]
fn quasi_isometry_examples() {
    let profile = ExponentProfile::cosine_well(3.0, 1.0, 0.0).unwrap();
    let mesh = MeshSpec2D::graded(0.05, 1.0, 0.02, 1.1, 0.05, 16, CIRCLE).unwrap();
    let g1 = assemble_2d(&profile, &mesh, Bc2D::Dirichlet, Bc2D::Neumann).unwrap();
    let samples: Vec<f64> = (1..=10).map(|i| 20.0 * i as f64).collect();

    let same = quasi_isometry_check(&g1, &g1, 0.0, 2, &samples).unwrap();
    assert!(same.holds && same.max_ratio == 1.0 && same.min_ratio == 1.0);

    let eps = 0.1;
    let s = 1.0 + eps;
    let g2 =
        assemble_2d_conformal(&profile, &mesh, Bc2D::Dirichlet, Bc2D::Neumann, |_, _| s).unwrap();
    let r = quasi_isometry_check(&g1, &g2, eps, 2, &samples).unwrap();
    assert!(r.holds);
    assert!((r.max_ratio - 1.0 / s).abs() < 1e-9 && (r.min_ratio - 1.0 / s).abs() < 1e-9);

    let rho = random_conformal_factor(eps, 7, CIRCLE);
    for i in 0..50 {
        let y = CIRCLE * i as f64 / 50.0;
        let v = rho(0.5, y);
        assert!(v >= 1.0 / s - 1e-15 && v <= s + 1e-15);
    }
    let g3 = assemble_2d_conformal(&profile, &mesh, Bc2D::Dirichlet, Bc2D::Neumann, rho).unwrap();
    assert!(
        quasi_isometry_check(&g1, &g3, eps, 2, &samples)
            .unwrap()
            .holds
    );

    // A factor outside the declared ratio must be caught.
    let g4 =
        assemble_2d_conformal(&profile, &mesh, Bc2D::Dirichlet, Bc2D::Neumann, |_, _| 2.0).unwrap();
    let bad = quasi_isometry_check(&g1, &g4, eps, 0, &samples).unwrap();
    assert!(!bad.holds && bad.violating_index == Some(1));
}

#[test]
fn bracketing_examples() {
    let samples: Vec<f64> = (1..=10).map(|i| 15.0 * i as f64).collect();
    let flat = MeshSpec2D::uniform(40, 16, 0.0, 1.0, CIRCLE).unwrap();
    let r = bracketing_check(&constant(0.0), &flat, Bc2D::Dirichlet, 0.5, &samples).unwrap();
    assert!(r.holds);
    assert!(r.rows.iter().any(|row| row.neumann > row.dirichlet));

    let mesh = MeshSpec2D::uniform(40, 16, 0.0, 2.0, CIRCLE).unwrap();
    let r = bracketing_check(&constant(2.0), &mesh, Bc2D::Neumann, 0.5, &samples).unwrap();
    assert!(r.holds, "{:?}", r.violating_lambda);

    let r = bracketing_check(&constant(0.0), &flat, Bc2D::Dirichlet, 0.5, &[1.0]).unwrap();
    assert_eq!(
        (r.rows[0].dirichlet, r.rows[0].whole, r.rows[0].neumann),
        (0, 0, 0)
    );
    assert!(bracketing_check(&constant(0.0), &flat, Bc2D::Dirichlet, 0.51, &samples).is_err());
}

#[test]
fn refinement_doubles_resolution() {
    let mesh = MeshSpec2D::uniform(32, 16, 0.1, 1.0, CIRCLE).unwrap();
    let fine = mesh.refined();
    assert_eq!((fine.nx(), fine.ny), (64, 32));
    assert!(mesh.x_nodes().iter().all(|x| fine.x_nodes().contains(x)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn inertia_is_monotone(beta in 0.0..4.0f64, lam in 0.0..200.0f64, d in 0.0..50.0f64) {
        let mesh = MeshSpec2D::uniform(32, 16, 0.05, 1.0, CIRCLE).unwrap();
        let p = assemble_2d(&constant(beta), &mesh, Bc2D::Dirichlet, Bc2D::Neumann).unwrap();
        prop_assert!(inertia_count(&p, lam).count <= inertia_count(&p, lam + d).count);
    }

    #[test]
    fn dirichlet_counts_at_most_neumann(beta in 0.0..4.0f64, lam in 0.0..200.0f64) {
        let mesh = MeshSpec2D::uniform(32, 16, 0.05, 1.0, CIRCLE).unwrap();
        let d = assemble_2d(&constant(beta), &mesh, Bc2D::Dirichlet, Bc2D::Dirichlet).unwrap();
        let n = assemble_2d(&constant(beta), &mesh, Bc2D::Dirichlet, Bc2D::Neumann).unwrap();
        prop_assert!(inertia_count(&d, lam).count <= inertia_count(&n, lam).count);
    }
}
