use std::path::Path;
use std::process::{Command, Output};

fn weylab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylab"))
        .args(args)
        .current_dir(dir)
        .env_remove("WEYLAB_CACHE_DIR")
        .output()
        .unwrap()
}

fn run_config(kind: &str, json: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{kind}.json"));
    std::fs::write(&cfg, json).unwrap();
    let out = dir.join(format!("out-{kind}"));
    let mut args = vec![
        kind,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    weylab(&args, dir)
}

fn read(dir: &Path, kind: &str, file: &str) -> String {
    std::fs::read_to_string(dir.join(format!("out-{kind}")).join(file)).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(i).unwrap().to_string())
        .collect()
}

#[test]
fn geodesic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        "geodesic",
        r#"{"kind": "geodesic", "betas": [1, 2]}"#,
        dir.path(),
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "geodesic", "geodesic.csv");
    let c: Vec<f64> = column(&csv, "c_shooting")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert!((c[1] - (2.0 * std::f64::consts::PI).sqrt()).abs() <= 1e-6);
    assert!((c[0] - 2.08008).abs() <= 1e-5);
    let manifest = read(dir.path(), "geodesic", "manifest.json");
    assert!(manifest.contains("\"geodesic.csv\""));
}

#[test]
fn pole_csv_has_limit_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        "pole",
        r#"{"kind": "pole", "betas": [2.4, 2.2], "cutoff": 60}"#,
        dir.path(),
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "pole", "pole.csv");
    let rows = column(&csv, "row");
    assert_eq!(rows, ["sample", "sample", "limit"]);
    let limit: f64 = column(&csv, "normalized")[2].parse().unwrap();
    assert!((limit - 1.0).abs() < 0.1, "{limit}");
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        "zeta",
        r#"{"kind": "zeta", "betas": [1], "cutoff": 3}"#,
        dir.path(),
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("betas[0]") && err.contains("cutoff"), "{err}");

    let cfg = dir.path().join("geodesic.json");
    std::fs::write(&cfg, r#"{"kind": "geodesic", "betas": [1]}"#).unwrap();
    let o = weylab(&["cone", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = weylab(&["nothing", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = weylab(&["geodesic", "--config", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runs_are_deterministic() {
    let cfg = r#"{"kind": "cone", "profile": {"kind": "constant", "beta": 4},
        "schedule": {"spacing": "geometric", "count": 6, "min": 50, "max": 500},
        "fit": {"model": {"kind": "pure_power"}}}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_config("cone", cfg, a.path(), &["--jobs", "1"])
        .status
        .success());
    assert!(run_config("cone", cfg, b.path(), &[]).status.success());
    assert_eq!(
        read(a.path(), "cone", "curve.csv"),
        read(b.path(), "cone", "curve.csv")
    );
    assert_eq!(
        read(a.path(), "cone", "results.json"),
        read(b.path(), "cone", "results.json")
    );
    let csv = read(a.path(), "cone", "curve.csv");
    assert_eq!(column(&csv, "provenance")[0], "cone_separated");
    let expected =
        weylab_core::cone::cone_count(4.0, 1, &[2.0 * std::f64::consts::PI], 50.0).unwrap();
    assert_eq!(column(&csv, "count")[0], expected.to_string());
}

#[test]
fn cache_is_reused_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cfg = r#"{"kind": "zeta", "betas": [2.5], "cutoff": 40}"#;
    let args = ["--cache", cache.to_str().unwrap()];
    assert!(run_config("zeta", cfg, dir.path(), &args).status.success());
    let first = read(dir.path(), "zeta", "zeta.csv");
    assert!(read(dir.path(), "zeta", "manifest.json").contains("\"cache_misses\": 1"));
    assert!(run_config("zeta", cfg, dir.path(), &args).status.success());
    assert!(read(dir.path(), "zeta", "manifest.json").contains("\"cache_hits\": 1"));
    assert_eq!(first, read(dir.path(), "zeta", "zeta.csv"));
}

#[test]
fn report_runs_selected_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_config(
        "report",
        r#"{"kind": "report", "checks": ["laplace", "hardy_floor"]}"#,
        dir.path(),
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "report", "report.csv");
    assert_eq!(column(&csv, "check"), ["9", "10"]);
    assert_eq!(column(&csv, "passed"), ["true", "true"]);
}

#[test]
fn flat_corollary_overlay_matches() {
    // beta = 0 is subcritical; a Neumann end cancels the boundary term.
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"kind": "corollary", "profile": {"kind": "constant", "beta": 0},
        "model": {"n": 1, "collar_length": 1, "torus": [6.283185307179586]},
        "right_bc": "neumann",
        "schedule": {"spacing": "geometric", "count": 6, "min": 100, "max": 1000}}"#;
    let o = run_config("corollary", cfg, dir.path(), &["--svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "corollary", "comparison.csv");
    let lambdas: Vec<f64> = column(&csv, "lambda")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let ratios: Vec<f64> = column(&csv, "ratio")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let accepted = column(&csv, "accepted");
    let top = lambdas.last().unwrap() / 10f64.sqrt();
    let mut checked = 0;
    for ((l, r), a) in lambdas.iter().zip(&ratios).zip(&accepted) {
        if *l >= top && a == "true" {
            assert!((r - 1.0).abs() <= 0.05, "lambda {l}: ratio {r}");
            checked += 1;
        }
    }
    assert!(checked >= 2);
    let svg = read(dir.path(), "corollary", "overlay.svg");
    assert!(svg.starts_with("<svg") && svg.contains("asymptotic_formula"));
    let curve = read(dir.path(), "corollary", "curve.csv");
    assert!(column(&curve, "provenance")
        .iter()
        .any(|p| p == "direct_fem"));
}
