//! Separated-variable counting for constant-exponent product cells over
//! flat tori: infinite cones, finite collars and wavelength-truncated
//! collars.
//!
//! On `(x_min, b) x T` with metric `dx^2 + x^{-beta} h0`, each tangential
//! eigenvalue `mu > 0` contributes the radial operator `P_mu`, which the
//! scaling `x = mu^{-1/(beta+2)} s` maps to `mu^{2/(beta+2)} P_1` on
//! `(x_min sigma, b sigma)` with `sigma = mu^{1/(beta+2)}`. Radial spectra
//! are tabulated once on a logarithmic `sigma` grid and interpolated.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{critical_beta, inverse_square_coeff};
use crate::error::{invalid, Result};
use crate::radial1d::{
    eigenvalues_below, eigenvalues_below_with, surrogate_length, LeftBc, RadialOperatorSpec,
    RightBc, SolverOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ConeSeparated,
    CollarSeparated,
    TruncatedCollar,
    DirectFem,
    AsymptoticFormula,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ConeSeparated => "cone_separated",
            Provenance::CollarSeparated => "collar_separated",
            Provenance::TruncatedCollar => "truncated_collar",
            Provenance::DirectFem => "direct_fem",
            Provenance::AsymptoticFormula => "asymptotic_formula",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingSample {
    pub lambda: f64,
    pub count: f64,
    /// False when a convergence check failed for this sample.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingCurve {
    pub provenance: Provenance,
    pub samples: Vec<CountingSample>,
    pub label: String,
}

impl CountingCurve {
    pub fn new(
        provenance: Provenance,
        samples: Vec<CountingSample>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].lambda > w[0].lambda)) {
            return Err(invalid("samples", "lambda must be strictly increasing"));
        }
        if provenance != Provenance::AsymptoticFormula
            && samples
                .windows(2)
                .any(|w| w[1].count < w[0].count && w[0].accepted && w[1].accepted)
        {
            return Err(invalid("samples", "counts must be nondecreasing"));
        }
        Ok(Self {
            provenance,
            samples,
            label: label.into(),
        })
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.lambda).collect()
    }

    pub fn counts(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.count).collect()
    }

    pub fn accepted(&self) -> impl Iterator<Item = &CountingSample> {
        self.samples.iter().filter(|s| s.accepted)
    }
}

/// Count of flat-torus Laplace eigenvalues `<= Lambda`, with multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeCount {
    pub total: u64,
    /// 1 when `Lambda >= 0` (the constant mode), else 0.
    pub zero_mode: u64,
}

impl LatticeCount {
    pub fn positive(&self) -> u64 {
        self.total - self.zero_mode
    }
}

/// Guards floor() against rounding at exact lattice values.
const LATTICE_EPS: f64 = 1e-12;

fn count_rec(sides: &[f64], lambda: f64) -> u64 {
    if lambda < 0.0 {
        return 0;
    }
    let l = sides[0];
    let jmax = (l * lambda.sqrt() / (2.0 * PI) * (1.0 + LATTICE_EPS)).floor() as i64;
    if sides.len() == 1 {
        return (2 * jmax + 1) as u64;
    }
    (-jmax..=jmax)
        .map(|j| {
            let mu = (2.0 * PI * j as f64 / l).powi(2);
            count_rec(&sides[1..], lambda - mu)
        })
        .sum()
}

/// Exact lattice count on the flat torus with the given side lengths.
pub fn lattice_count(torus: &[f64], lambda: f64) -> LatticeCount {
    assert!(!torus.is_empty() && torus.iter().all(|&l| l > 0.0));
    if lambda < 0.0 {
        return LatticeCount {
            total: 0,
            zero_mode: 0,
        };
    }
    LatticeCount {
        total: count_rec(torus, lambda),
        zero_mode: 1,
    }
}

/// Positive tangential eigenvalues of a flat torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentialSpectrum {
    pub sides: Vec<f64>,
}

impl TangentialSpectrum {
    pub fn new(sides: Vec<f64>) -> Result<Self> {
        if sides.is_empty() || sides.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(invalid("torus", "side lengths must be positive"));
        }
        Ok(Self { sides })
    }

    /// Smallest positive eigenvalue.
    pub fn first_positive(&self) -> f64 {
        let lmax = self.sides.iter().cloned().fold(0.0, f64::max);
        (2.0 * PI / lmax).powi(2)
    }

    /// Distinct positive eigenvalues `<= bound` with multiplicities, ascending.
    pub fn positive_modes(&self, bound: f64) -> Vec<(f64, u64)> {
        if self.sides.len() == 1 {
            let l = self.sides[0];
            let jmax =
                (l * bound.max(0.0).sqrt() / (2.0 * PI) * (1.0 + LATTICE_EPS)).floor() as u64;
            return (1..=jmax)
                .map(|j| ((2.0 * PI * j as f64 / l).powi(2), 2))
                .collect();
        }
        let mut values = Vec::new();
        collect_modes(&self.sides, bound, 0.0, &mut values);
        values.retain(|&v| v > 0.0);
        values.sort_by(f64::total_cmp);
        let mut out: Vec<(f64, u64)> = Vec::new();
        for v in values {
            match out.last_mut() {
                Some((last, m)) if (v - *last).abs() <= 1e-12 * v => *m += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }
}

fn collect_modes(sides: &[f64], bound: f64, acc: f64, out: &mut Vec<f64>) {
    let l = sides[0];
    let rest = bound - acc;
    if rest < 0.0 {
        return;
    }
    let jmax = (l * rest.sqrt() / (2.0 * PI) * (1.0 + LATTICE_EPS)).floor() as i64;
    for j in -jmax..=jmax {
        let v = acc + (2.0 * PI * j as f64 / l).powi(2);
        if sides.len() == 1 {
            if v <= bound * (1.0 + LATTICE_EPS) {
                out.push(v);
            }
        } else {
            collect_modes(&sides[1..], bound, v, out);
        }
    }
}

/// Sum over radial eigenvalues of positive-mode lattice counts at
/// `Lambda = (lambda / nu_k)^{(beta + 2)/2}`.
///
/// `eigs` must list every `nu_k` below `complete_below`; an error is raised
/// if the count could involve eigenvalues beyond it.
pub fn cone_count_from_eigenvalues(
    beta: f64,
    torus: &[f64],
    lambda: f64,
    eigs: &[f64],
    complete_below: f64,
) -> Result<u64> {
    let tangential = TangentialSpectrum::new(torus.to_vec())?;
    let needed = lambda / tangential.first_positive().powf(2.0 / (beta + 2.0));
    if needed >= complete_below {
        return Err(invalid(
            "eigenvalues",
            format!("radial spectrum complete below {complete_below}, need {needed}"),
        ));
    }
    Ok(eigs
        .iter()
        .take_while(|&&nu| nu <= needed)
        .map(|&nu| lattice_count(torus, (lambda / nu).powf(0.5 * (beta + 2.0))).positive())
        .sum())
}

/// Radial spectrum of `P_1` on the half-line, complete below `nu_max`.
pub fn cone_radial_spectrum(beta: f64, n: usize, nu_max: f64) -> Result<Vec<f64>> {
    let l = surrogate_length(beta, 1.0, nu_max)?;
    let spec = RadialOperatorSpec::model(beta, n, 1.0, l, RightBc::Dirichlet)?;
    Ok(eigenvalues_below(&spec, nu_max, 1e-12)?.eigenvalues)
}

fn check_supercritical(beta: f64, n: usize) -> Result<()> {
    if !(beta > critical_beta(n)) {
        return Err(invalid(
            "beta",
            format!("the cone model needs beta > 2/n = {}", critical_beta(n)),
        ));
    }
    Ok(())
}

/// Separated count on the infinite cone `(0, inf) x T`, positive modes only.
pub fn cone_count(beta: f64, n: usize, torus: &[f64], lambda: f64) -> Result<u64> {
    Ok(cone_curve(beta, n, torus, &[lambda])?.samples[0].count as u64)
}

pub fn cone_curve(beta: f64, n: usize, torus: &[f64], lambdas: &[f64]) -> Result<CountingCurve> {
    check_supercritical(beta, n)?;
    if torus.len() != n {
        return Err(invalid(
            "torus",
            "need one side length per boundary dimension",
        ));
    }
    let top = lambdas.iter().cloned().fold(0.0, f64::max);
    let first = TangentialSpectrum::new(torus.to_vec())?.first_positive();
    let nu_max = 1.02 * top / first.powf(2.0 / (beta + 2.0)) + 1.0;
    let eigs = cone_radial_spectrum(beta, n, nu_max)?;
    let samples = lambdas
        .iter()
        .map(|&lam| {
            Ok(CountingSample {
                lambda: lam,
                count: cone_count_from_eigenvalues(beta, torus, lam, &eigs, nu_max)? as f64,
                accepted: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CountingCurve::new(
        Provenance::ConeSeparated,
        samples,
        format!("cone beta={beta}"),
    )
}

/// A constant-exponent collar `(x_min, b) x T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollarSpec {
    pub beta: f64,
    pub n: usize,
    pub torus: Vec<f64>,
    pub b: f64,
    pub right_bc: RightBc,
    /// Left end; `0` selects the Friedrichs realization.
    pub x_min: f64,
}

impl CollarSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(invalid("beta", "must be finite and >= 0"));
        }
        if self.torus.len() != self.n || self.n == 0 {
            return Err(invalid(
                "torus",
                "need one side length per boundary dimension",
            ));
        }
        if !(self.b > 0.0 && self.x_min >= 0.0 && self.x_min < self.b) {
            return Err(invalid("b", "need 0 <= x_min < b"));
        }
        Ok(())
    }

    fn radial(&self, mu: f64, sigma: f64) -> Result<RadialOperatorSpec> {
        RadialOperatorSpec::new(
            self.beta,
            self.n,
            mu,
            (self.x_min * sigma, self.b * sigma),
            left_condition(self.x_min),
            self.right_bc,
        )
    }
}

/// Initial number of `sigma` columns per decade.
pub const COLUMNS_PER_DECADE: f64 = 40.0;

/// Relative interpolation error accepted before an interval is bisected.
pub const TABLE_TOL: f64 = 1e-4;

/// Bisection rounds of the adaptive `sigma` grid.
const MAX_REFINEMENTS: usize = 4;

/// Two Richardson levels already sit far below the table tolerance.
fn table_solver() -> SolverOptions {
    SolverOptions {
        levels: 2,
        ..SolverOptions::default()
    }
}

const TABLE_EIG_TOL: f64 = 1e-10;

/// Columns solve past their own threshold by this factor so that
/// interpolation between neighbours always sees both ends.
const COLUMN_MARGIN: f64 = 1.35;

/// Tabulated `nu_k(sigma)` of `P_1` on `(x_min sigma, b sigma)`, built for
/// counts up to `lambda_max`.
#[derive(Debug, Clone)]
pub struct CollarTable {
    pub spec: CollarSpec,
    pub lambda_max: f64,
    log_sigma: Vec<f64>,
    /// `ln nu_k` per column.
    columns: Vec<Vec<f64>>,
    modes: Vec<(f64, u64)>,
    zero_mode: Vec<f64>,
    /// Largest midpoint error seen in the last refinement round.
    pub validation_error: f64,
}

fn left_condition(x_min: f64) -> LeftBc {
    if x_min == 0.0 {
        LeftBc::FriedrichsLimit
    } else {
        LeftBc::DirichletAtA
    }
}

impl CollarTable {
    pub fn build(spec: &CollarSpec, lambda_max: f64) -> Result<Self> {
        spec.validate()?;
        if !(lambda_max > 0.0) {
            return Err(invalid("lambda", "must be positive"));
        }
        let tangential = TangentialSpectrum::new(spec.torus.clone())?;
        let exp = 1.0 / (spec.beta + 2.0);
        let lower = ground_state_floor(spec);
        let mu_bound = (lambda_max / lower).powf(0.5 * (spec.beta + 2.0));
        let modes = tangential.positive_modes(mu_bound);
        let zero = RadialOperatorSpec::new(
            spec.beta,
            spec.n,
            0.0,
            (spec.x_min, spec.b),
            left_condition(spec.x_min),
            spec.right_bc,
        )?;
        let zero_mode =
            eigenvalues_below_with(&zero, lambda_max * 1.001, TABLE_EIG_TOL, &table_solver())?
                .eigenvalues;
        let mut table = Self {
            spec: spec.clone(),
            lambda_max,
            log_sigma: Vec::new(),
            columns: Vec::new(),
            modes,
            zero_mode,
            validation_error: 0.0,
        };
        if table.modes.is_empty() {
            return Ok(table);
        }
        let s_lo = table.modes[0].0.powf(exp).ln();
        let s_hi = table.modes.last().unwrap().0.powf(exp).ln();
        let step = std::f64::consts::LN_10 / COLUMNS_PER_DECADE;
        let count = ((s_hi - s_lo) / step).ceil() as usize + 1;
        table.log_sigma = (0..=count).map(|i| s_lo - step + step * i as f64).collect();
        table.columns = table
            .log_sigma
            .par_iter()
            .map(|&ls| table.column(ls))
            .collect::<Result<Vec<_>>>()?;

        // Bisect intervals whose midpoint disagrees with the interpolant.
        let mut flagged: Vec<usize> = (0..table.log_sigma.len() - 1).collect();
        for _ in 0..MAX_REFINEMENTS {
            if flagged.is_empty() {
                break;
            }
            let mids: Vec<f64> = flagged
                .iter()
                .map(|&i| 0.5 * (table.log_sigma[i] + table.log_sigma[i + 1]))
                .collect();
            let fresh = mids
                .par_iter()
                .map(|&ls| table.column(ls))
                .collect::<Result<Vec<_>>>()?;
            let mut worst = 0.0f64;
            let mut next = Vec::new();
            for (&ls, col) in mids.iter().zip(&fresh) {
                let sigma = ls.exp();
                let needed = lambda_max / (sigma * sigma);
                let mut err = 0.0f64;
                for (k, &lv) in col.iter().enumerate() {
                    if lv.exp() > needed {
                        break;
                    }
                    if let Some(v) = table.nu(k, sigma) {
                        err = err.max((v.ln() - lv).abs());
                    }
                }
                worst = worst.max(err);
                if err > TABLE_TOL {
                    next.push(ls);
                }
            }
            table.validation_error = worst;
            let mut merged: Vec<(f64, Vec<f64>)> = table
                .log_sigma
                .drain(..)
                .zip(table.columns.drain(..))
                .chain(mids.into_iter().zip(fresh))
                .collect();
            merged.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (xs, cols): (Vec<f64>, Vec<Vec<f64>>) = merged.into_iter().unzip();
            table.log_sigma = xs;
            table.columns = cols;
            // Both halves of a failing interval are checked again.
            flagged = next
                .iter()
                .flat_map(|&ls| {
                    let j = table.log_sigma.partition_point(|&x| x < ls);
                    [j - 1, j]
                })
                .collect();
        }
        Ok(table)
    }

    fn column(&self, log_sigma: f64) -> Result<Vec<f64>> {
        let sigma = log_sigma.exp();
        let threshold = COLUMN_MARGIN * self.lambda_max / (sigma * sigma);
        let radial = self.spec.radial(1.0, sigma)?;
        let eigs =
            eigenvalues_below_with(&radial, threshold, TABLE_EIG_TOL, &table_solver())?.eigenvalues;
        Ok(eigs.iter().map(|e| e.ln()).collect())
    }

    /// Number of columns after refinement.
    pub fn columns(&self) -> usize {
        self.log_sigma.len()
    }

    /// Interpolated `nu_k(sigma)` (0-based `k`), or `None` if a bracketing
    /// column does not reach index `k`.
    pub fn nu(&self, k: usize, sigma: f64) -> Option<f64> {
        let xs = &self.log_sigma;
        let m = xs.len();
        if m < 2 {
            return None;
        }
        let ls = sigma.ln();
        let i = xs
            .partition_point(|&x| x <= ls)
            .saturating_sub(1)
            .min(m - 2);
        let get = |j: usize| self.columns.get(j).and_then(|c| c.get(k)).copied();
        let (y0, y1) = (get(i)?, get(i + 1)?);
        let (x0, x1) = (xs[i], xs[i + 1]);
        let h = x1 - x0;
        let del = (y1 - y0) / h;
        // Weighted centred slope, limited to keep the interpolant monotone.
        let slope_at = |j: usize, left: Option<f64>, right: Option<f64>| -> f64 {
            let (Some(l), Some(r)) = (left, right) else {
                return del;
            };
            let (hl, hr) = (xs[j] - xs[j - 1], xs[j + 1] - xs[j]);
            let dl = (self.columns[j][k] - l) / hl;
            let dr = (r - self.columns[j][k]) / hr;
            if dl * dr <= 0.0 {
                return 0.0;
            }
            let d = (hr * dl + hl * dr) / (hl + hr);
            d.signum() * d.abs().min(3.0 * dl.abs().min(dr.abs()))
        };
        let d0 = slope_at(i, i.checked_sub(1).and_then(get), Some(y1));
        let d1 = slope_at(i + 1, Some(y0), get(i + 2));
        let t = ((ls - x0) / h).clamp(0.0, 1.0);
        let (t2, t3) = (t * t, t * t * t);
        let y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * d1;
        Some(y.exp())
    }

    fn check_range(&self, lambda: f64) -> Result<()> {
        if lambda > self.lambda_max * (1.0 + 1e-12) {
            return Err(invalid(
                "lambda",
                format!("table built up to {}", self.lambda_max),
            ));
        }
        Ok(())
    }

    /// Number of `k` with `nu_k(sigma) <= threshold`.
    fn radial_count(&self, sigma: f64, threshold: f64) -> u64 {
        let below = |k: usize| self.nu(k, sigma).is_some_and(|v| v <= threshold);
        if !below(0) {
            return 0;
        }
        let (mut lo, mut hi) = (0usize, 1usize);
        while below(hi) {
            lo = hi;
            hi *= 2;
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + 1) as u64
    }

    /// Separated count `N(lambda)` including the zero mode.
    pub fn count(&self, lambda: f64) -> Result<u64> {
        Ok(self.zero_mode_count(lambda)? + self.positive_count(lambda)?)
    }

    /// Zero-mode eigenvalues `<= lambda` on `(x_min, b)`.
    pub fn zero_mode_count(&self, lambda: f64) -> Result<u64> {
        self.check_range(lambda)?;
        Ok(self.zero_mode.iter().filter(|&&e| e <= lambda).count() as u64)
    }

    /// Count over the positive tangential modes only.
    pub fn positive_count(&self, lambda: f64) -> Result<u64> {
        self.check_range(lambda)?;
        let exp = 1.0 / (self.spec.beta + 2.0);
        let mut total = 0;
        for &(mu, mult) in &self.modes {
            let sigma = mu.powf(exp);
            let c = self.radial_count(sigma, lambda / (sigma * sigma));
            // Ground states increase with mu: once a mode is empty, all larger ones are.
            if c == 0 {
                break;
            }
            total += mult * c;
        }
        Ok(total)
    }
}

/// A lower bound for `nu_1` of `P_1` on any subinterval: the Rayleigh
/// quotient is at least `inf_x (x^beta + C x^{-2})`.
fn ground_state_floor(spec: &CollarSpec) -> f64 {
    let c = inverse_square_coeff(spec.n, spec.beta);
    if spec.beta == 0.0 {
        return 1.0;
    }
    let x = (2.0 * c / spec.beta).powf(1.0 / (spec.beta + 2.0));
    x.powf(spec.beta) + c / (x * x)
}

/// Separated count on the collar at a single `lambda`.
pub fn collar_count(spec: &CollarSpec, lambda: f64) -> Result<u64> {
    CollarTable::build(spec, lambda)?.count(lambda)
}

/// Collar counting curve; one table serves all samples unless the
/// truncation `x_min = c lambda^{-1/2}` moves with `lambda`.
pub fn collar_curve(
    spec: &CollarSpec,
    lambdas: &[f64],
    truncation: Option<f64>,
) -> Result<CountingCurve> {
    let samples = match truncation {
        None => {
            let top = lambdas.iter().cloned().fold(0.0, f64::max);
            let table = CollarTable::build(spec, top)?;
            lambdas
                .iter()
                .map(|&lam| {
                    Ok(CountingSample {
                        lambda: lam,
                        count: table.count(lam)? as f64,
                        accepted: true,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        Some(c) => lambdas
            .iter()
            .map(|&lam| {
                let mut s = spec.clone();
                s.x_min = c / lam.sqrt();
                Ok(CountingSample {
                    lambda: lam,
                    count: collar_count(&s, lam)? as f64,
                    accepted: true,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let provenance = if truncation.is_some() {
        Provenance::TruncatedCollar
    } else {
        Provenance::CollarSeparated
    };
    CountingCurve::new(
        provenance,
        samples,
        format!("collar beta={} b={}", spec.beta, spec.b),
    )
}
