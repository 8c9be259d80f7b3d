//! Dispatch of an experiment config to its pipeline.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;
use weylab_core::asymptotics::{
    corollary_prediction_from, full_volume, integral_weyl_rhs, truncated_volume,
    AsymptoticPrediction, WeylTable,
};
use weylab_core::cone::{
    collar_curve, cone_curve, CollarSpec, CountingCurve, CountingSample, Provenance,
};
use weylab_core::constants::{critical_beta, gamma_weyl, ExponentProfile};
use weylab_core::direct2d::{counting_curve_2d, Domain2D, SampleRecord};
use weylab_core::geodesic::boundary_distance;
use weylab_core::radial1d::{model_spectrum, SolverOptions};
use weylab_core::zeta::{pole_probe_from, weyl_coefficient_from_eigenvalues, WeylCoefficient};

use crate::cache::{SpectrumCache, SpectrumKey};
use crate::config::{ExperimentConfig, Kind};
use crate::criteria::{self, CriterionOutcome};
use crate::error::Result;
use crate::fit::{fit_counting_curve, FitResult};
use crate::output::{curves_table, overlay_svg, real, Artifacts, Manifest, Series, Table};

pub struct RunOptions<'a> {
    pub out_dir: PathBuf,
    pub svg: bool,
    pub cache: Option<&'a SpectrumCache>,
}

pub struct RunOutcome {
    pub artifacts: Artifacts,
    pub manifest: Manifest,
    /// Failed checks in `report` mode.
    pub failures: Vec<String>,
    pub written: Vec<PathBuf>,
}

/// Runs the experiment and writes its artifacts and manifest.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    cfg.validate()?;
    let hash = cfg.hash();
    let (mut artifacts, failures) = execute(cfg, &hash, opts.cache, opts.svg)?;
    let manifest = Manifest {
        tool: "weylab",
        version: env!("CARGO_PKG_VERSION"),
        kind: cfg.kind.as_str().to_string(),
        config_hash: hash,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        cache_dir: opts.cache.map(|c| c.dir().display().to_string()),
        cache_hits: opts.cache.map_or(0, SpectrumCache::hits),
        cache_misses: opts.cache.map_or(0, SpectrumCache::misses),
        files: artifacts.names(),
    };
    artifacts.add_json("manifest.json", &manifest)?;
    let written = artifacts.write_all(&opts.out_dir)?;
    Ok(RunOutcome {
        artifacts,
        manifest,
        failures,
        written,
    })
}

/// Builds the artifacts without touching the filesystem (except the cache).
pub fn execute(
    cfg: &ExperimentConfig,
    hash: &str,
    cache: Option<&SpectrumCache>,
    svg: bool,
) -> Result<(Artifacts, Vec<String>)> {
    let mut art = Artifacts::default();
    let mut failures = Vec::new();
    match cfg.kind {
        Kind::Radial => radial(cfg, cache, &mut art)?,
        Kind::Zeta => zeta(cfg, cache, &mut art)?,
        Kind::Pole => pole(cfg, cache, &mut art)?,
        Kind::Cone | Kind::Collar | Kind::Direct2d | Kind::Corollary => {
            curve_kind(cfg, hash, cache, svg, &mut art)?
        }
        Kind::Volume => volume(cfg, &mut art)?,
        Kind::Geodesic => geodesic(cfg, &mut art)?,
        Kind::Report => failures = report(cfg, &mut art)?,
    }
    Ok((art, failures))
}

/// Lowest `count` eigenvalues of `P_1`, through the cache when present.
pub fn cached_model_spectrum(
    beta: f64,
    n: usize,
    count: usize,
    cache: Option<&SpectrumCache>,
) -> Result<Vec<f64>> {
    let compute = || -> Result<Vec<f64>> {
        let mut v = model_spectrum(beta, n, count)?.eigenvalues;
        v.truncate(count);
        Ok(v)
    };
    match cache {
        None => compute(),
        Some(c) => {
            let key = SpectrumKey {
                beta,
                n,
                mu_or_l: 1.0,
                left_bc: "friedrichs_limit".into(),
                right_bc: "dirichlet_surrogate".into(),
                level: SolverOptions::default().levels,
                count,
            };
            c.get_or_compute(&key, compute)
        }
    }
}

fn radial(
    cfg: &ExperimentConfig,
    cache: Option<&SpectrumCache>,
    art: &mut Artifacts,
) -> Result<()> {
    let n = cfg.model.n;
    let spectra = cfg
        .betas
        .par_iter()
        .map(|&b| cached_model_spectrum(b, n, cfg.cutoff, cache))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["beta", "n", "mu", "k", "nu"]);
    for (&beta, eigs) in cfg.betas.iter().zip(&spectra) {
        let scale = cfg.mu.powf(2.0 / (beta + 2.0));
        for (k, nu) in eigs.iter().enumerate() {
            t.push(vec![
                real(beta),
                n.to_string(),
                real(cfg.mu),
                (k + 1).to_string(),
                real(scale * nu),
            ]);
        }
    }
    art.add_table("radial.csv", &t);
    Ok(())
}

fn coefficients(
    cfg: &ExperimentConfig,
    cache: Option<&SpectrumCache>,
) -> Result<Vec<WeylCoefficient>> {
    let n = cfg.model.n;
    cfg.betas
        .par_iter()
        .map(|&b| {
            let eigs = cached_model_spectrum(b, n, cfg.cutoff, cache)?;
            Ok(weyl_coefficient_from_eigenvalues(b, n, &eigs)?)
        })
        .collect()
}

fn zeta(cfg: &ExperimentConfig, cache: Option<&SpectrumCache>, art: &mut Artifacts) -> Result<()> {
    let n = cfg.model.n;
    let coeffs = coefficients(cfg, cache)?;
    let mut t = Table::new(&[
        "beta",
        "n",
        "s",
        "partial_sum",
        "tail",
        "zeta",
        "error_bound",
        "weyl_coefficient",
    ]);
    for a in &coeffs {
        let z = &a.zeta;
        t.push(vec![
            real(a.beta),
            n.to_string(),
            real(z.s),
            real(z.partial_sum),
            real(z.tail_estimate),
            real(z.total),
            real(z.error_bound),
            real(a.value),
        ]);
    }
    art.add_table("zeta.csv", &t);
    art.add_json("results.json", &coeffs)?;
    Ok(())
}

fn pole(cfg: &ExperimentConfig, cache: Option<&SpectrumCache>, art: &mut Artifacts) -> Result<()> {
    let probe = pole_probe_from(cfg.model.n, &coefficients(cfg, cache)?)?;
    let mut t = Table::new(&["row", "beta", "coefficient", "error_bound", "normalized"]);
    for r in &probe.rows {
        t.push(vec![
            "sample".into(),
            real(r.beta),
            real(r.coefficient),
            real(r.error_bound),
            real(r.normalized),
        ]);
    }
    t.push(vec![
        "limit".into(),
        real(critical_beta(cfg.model.n)),
        String::new(),
        String::new(),
        real(probe.extrapolated),
    ]);
    art.add_table("pole.csv", &t);
    art.add_json("results.json", &probe)?;
    Ok(())
}

fn volume(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let profile = cfg.profile.as_ref().expect("validated");
    let full = full_volume(profile, &cfg.model)?;
    let mut t = Table::new(&["lambda", "truncated_volume", "full_volume"]);
    for lam in cfg.samples() {
        t.push(vec![
            real(lam),
            real(truncated_volume(profile, &cfg.model, lam.max(1.0))?),
            real(full),
        ]);
    }
    art.add_table("volume.csv", &t);
    Ok(())
}

fn geodesic(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let rows = cfg
        .betas
        .par_iter()
        .map(|&b| boundary_distance(b, 1.0))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut t = Table::new(&[
        "beta",
        "theta",
        "i0",
        "i1",
        "c_formula",
        "c_quadrature",
        "c_shooting",
        "max_rel_dev",
    ]);
    for r in &rows {
        t.push(vec![
            real(r.beta),
            real(r.theta),
            real(r.i0),
            real(r.i1),
            real(r.c_formula),
            real(r.c_quadrature),
            real(r.c_shooting),
            real(r.max_rel_dev()),
        ]);
    }
    art.add_table("geodesic.csv", &t);
    Ok(())
}

#[derive(Debug, Serialize)]
struct CurveResults<'a> {
    kind: &'static str,
    fit: Option<FitResult>,
    prediction: Option<AsymptoticPrediction>,
    overlay: Option<String>,
    direct_records: Option<&'a [SampleRecord]>,
}

/// The leading-order right-hand side used for overlays.
pub struct Overlay {
    pub description: String,
    pub prediction: Option<AsymptoticPrediction>,
    eval: Box<dyn Fn(f64) -> Result<f64> + Send + Sync>,
}

impl Overlay {
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        (self.eval)(lambda)
    }

    pub fn curve(&self, lambdas: &[f64]) -> Result<CountingCurve> {
        let samples = lambdas
            .iter()
            .map(|&l| {
                Ok(CountingSample {
                    lambda: l,
                    count: self.eval(l)?,
                    accepted: true,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CountingCurve::new(
            Provenance::AsymptoticFormula,
            samples,
            self.description.clone(),
        )?)
    }
}

/// Regime-appropriate right-hand side: the exponent-weighted Weyl integral
/// when `beta_max > beta_c`, the truncated-volume law below, and the
/// closed-form leading term at the critical exponent.
pub fn overlay_for(
    profile: &ExponentProfile,
    cfg: &ExperimentConfig,
    cache: Option<&SpectrumCache>,
) -> Result<Overlay> {
    let model = cfg.model.clone();
    let n = model.n;
    let bc = critical_beta(n);
    let bmax = profile.beta_max();
    if bmax > bc {
        if profile.is_constant() {
            let eigs = cached_model_spectrum(bmax, n, cfg.cutoff, cache)?;
            let a = weyl_coefficient_from_eigenvalues(bmax, n, &eigs)?.value;
            let pred = corollary_prediction_from(profile, &model, None, |_| Ok(a))?;
            let p2 = pred.clone();
            return Ok(Overlay {
                description: format!("A(beta, n) vol lambda^{}", pred.p),
                prediction: Some(pred),
                eval: Box::new(move |l| Ok(p2.eval(l))),
            });
        }
        let beta_bar = cfg.beta_bar.unwrap_or(0.5 * (bc + bmax));
        let table = WeylTable::for_profile(n, beta_bar, bmax)?;
        let p = profile.clone();
        return Ok(Overlay {
            description: format!("Weyl integral over beta >= {beta_bar}"),
            prediction: None,
            eval: Box::new(move |l| Ok(integral_weyl_rhs(&p, &model, beta_bar, l, &table)?)),
        });
    }
    if bmax < bc {
        let p = profile.clone();
        let g = gamma_weyl(n + 1);
        let e = 0.5 * (n as f64 + 1.0);
        return Ok(Overlay {
            description: "gamma lambda^{(n+1)/2} truncated volume".into(),
            prediction: None,
            eval: Box::new(move |l| Ok(g * l.powf(e) * truncated_volume(&p, &model, l.max(1.0))?)),
        });
    }
    let pred = corollary_prediction_from(profile, &model, None, |_| unreachable!())?;
    let p2 = pred.clone();
    Ok(Overlay {
        description: format!("{:?} leading term", pred.regime),
        prediction: Some(pred),
        eval: Box::new(move |l| Ok(p2.eval(l))),
    })
}

fn curve_kind(
    cfg: &ExperimentConfig,
    hash: &str,
    cache: Option<&SpectrumCache>,
    svg: bool,
    art: &mut Artifacts,
) -> Result<()> {
    let profile = cfg.profile.as_ref().expect("validated");
    let lambdas = cfg.samples();
    let model = &cfg.model;
    let mut records = None;
    let curve = match cfg.kind {
        Kind::Cone => cone_curve(profile.beta_max(), model.n, &model.torus, &lambdas)?,
        Kind::Collar => {
            let spec = CollarSpec {
                beta: profile.beta_max(),
                n: model.n,
                torus: model.torus.clone(),
                b: model.collar_length,
                right_bc: cfg.right_bc.radial(),
                x_min: 0.0,
            };
            collar_curve(&spec, &lambdas, cfg.truncation)?
        }
        _ => {
            let domain = Domain2D {
                b: model.collar_length,
                circumference: model.torus[0],
                right_bc: cfg.right_bc.direct(),
            };
            let (c, r) = counting_curve_2d(
                profile,
                &domain,
                &cfg.mesh,
                &lambdas,
                cfg.direct_truncation(),
            )?;
            records = Some(r);
            c
        }
    };
    let fit = match &cfg.fit {
        Some(f) => Some(fit_counting_curve(
            &curve,
            f.model,
            f.window.map(|w| (w[0], w[1])),
        )?),
        None => None,
    };
    let want_overlay = cfg.kind == Kind::Corollary || svg;
    let overlay = if want_overlay {
        Some(overlay_for(profile, cfg, cache)?)
    } else {
        None
    };
    let formula = match &overlay {
        Some(o) => Some(o.curve(&lambdas)?),
        None => None,
    };
    let mut curves = vec![&curve];
    if let Some(f) = &formula {
        curves.push(f);
    }
    art.add_table("curve.csv", &curves_table(&curves, hash));
    if let Some(r) = &records {
        let mut t = Table::new(&[
            "lambda",
            "coarse",
            "fine",
            "coarse_dim",
            "fine_dim",
            "relative_change",
            "accepted",
            "perturbed",
        ]);
        for s in r {
            t.push(vec![
                real(s.lambda),
                s.coarse.to_string(),
                s.fine.to_string(),
                s.coarse_dim.to_string(),
                s.fine_dim.to_string(),
                real(s.relative_change),
                s.accepted.to_string(),
                s.perturbed.to_string(),
            ]);
        }
        art.add_table("records.csv", &t);
    }
    if let Some(f) = &formula {
        let mut t = Table::new(&["lambda", "count", "rhs", "ratio", "accepted"]);
        for (s, r) in curve.samples.iter().zip(&f.samples) {
            t.push(vec![
                real(s.lambda),
                format!("{}", s.count.round() as u64),
                real(r.count),
                real(s.count / r.count),
                s.accepted.to_string(),
            ]);
        }
        art.add_table("comparison.csv", &t);
    }
    if svg {
        let pts = |c: &CountingCurve| {
            c.samples
                .iter()
                .map(|s| (s.lambda, s.count))
                .collect::<Vec<_>>()
        };
        let mut series = vec![Series {
            label: curve.provenance.as_str(),
            points: pts(&curve),
            color: "#1f4e9c",
        }];
        if let Some(f) = &formula {
            series.push(Series {
                label: "asymptotic_formula",
                points: pts(f),
                color: "#b22222",
            });
        }
        art.add_text(
            "overlay.svg",
            overlay_svg(
                &format!("{} counting function", cfg.kind.as_str()),
                "lambda",
                "N(lambda)",
                &series,
            ),
        );
    }
    let results = CurveResults {
        kind: cfg.kind.as_str(),
        fit,
        prediction: overlay.as_ref().and_then(|o| o.prediction.clone()),
        overlay: overlay.as_ref().map(|o| o.description.clone()),
        direct_records: records.as_deref(),
    };
    art.add_json("results.json", &results)?;
    Ok(())
}

fn report(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<Vec<String>> {
    let checks = cfg
        .checks
        .clone()
        .unwrap_or_else(|| crate::config::ReportCheck::ALL.to_vec());
    let outcomes: Vec<CriterionOutcome> = checks.iter().map(|&c| criteria::run_check(c)).collect();
    let mut t = Table::new(&["check", "passed", "detail"]);
    let mut failures = Vec::new();
    for o in &outcomes {
        t.push(vec![
            o.id.to_string(),
            o.passed.to_string(),
            csv_text(&o.detail),
        ]);
        if !o.passed {
            failures.push(format!("{}: {}", o.id, o.detail));
        }
    }
    art.add_table("report.csv", &t);
    art.add_json("results.json", &outcomes)?;
    Ok(failures)
}

fn csv_text(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Default output directory when neither the CLI nor the config names one.
pub fn default_out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir
        .clone()
        .unwrap_or_else(|| Path::new("weylab-out").join(cfg.kind.as_str()))
}
