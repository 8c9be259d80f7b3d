//! Spectral zeta function of `P_1`, the Weyl coefficient `A(beta, n)` and
//! the probe of its pole at `beta_c = 2/n`.
//!
//! The partial sum runs over solver eigenvalues; the remainder integrates a
//! fitted Bohr-Sommerfeld model `nu_k ~ C k^p (1 + c1/k)` in closed form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constants::{critical_beta, gamma_weyl, half_hausdorff_dim};
use crate::error::{invalid, Result, WeylError};
use crate::radial1d::model_spectrum;

pub const DEFAULT_CUTOFF: usize = 200;

/// `log nu_k = log C + p log k + c1 / k`, fitted on `k in [K/2, K]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub c_bs: f64,
    pub p: f64,
    pub c1: f64,
    /// RMS residual of the fit in `log nu`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaResult {
    pub s: f64,
    pub beta: f64,
    pub n: usize,
    pub cutoff: usize,
    pub partial_sum: f64,
    pub tail_estimate: f64,
    pub tail_model: TailModel,
    pub total: f64,
    pub error_bound: f64,
}

/// Bohr-Sommerfeld exponent `2 beta / (beta + 2)`.
pub fn bs_exponent(beta: f64) -> f64 {
    2.0 * beta / (beta + 2.0)
}

fn lstsq(rows: &[Vec<f64>], rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = rows.len();
    let k = rows[0].len();
    let a = DMatrix::from_fn(m, k, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-13 * smax {
        return Err(invalid("fit", "rank-deficient least-squares system"));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| invalid("fit", e.to_string()))?;
    let r = &a * &x - b;
    Ok((
        x.iter().copied().collect(),
        (r.norm_squared() / m as f64).sqrt(),
    ))
}

/// Fits the tail model on the upper half of `eigs` (1-based indices).
pub fn fit_tail(eigs: &[f64]) -> Result<TailModel> {
    let k_max = eigs.len();
    if k_max < 12 {
        return Err(invalid(
            "cutoff",
            "need at least 12 eigenvalues for the tail fit",
        ));
    }
    let k_min = k_max / 2;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for k in k_min..=k_max {
        let kf = k as f64;
        rows.push(vec![1.0, kf.ln(), 1.0 / kf]);
        rhs.push(eigs[k - 1].ln());
    }
    let (x, residual) = lstsq(&rows, &rhs)?;
    Ok(TailModel {
        c_bs: x[0].exp(),
        p: x[1],
        c1: x[2],
        residual,
    })
}

/// `sum_{k > K} nu_k^{-s}` under the model, by the midpoint form of
/// Euler-Maclaurin starting at `K + 1/2`. Returns the estimate and the
/// magnitude of the neglected terms.
fn tail_sum(model: &TailModel, s: f64, cutoff: usize) -> (f64, f64) {
    let kp = cutoff as f64 + 0.5;
    let ps = model.p * s;
    let pre = model.c_bs.powf(-s);
    let integral = pre * (kp.powf(1.0 - ps) / (ps - 1.0) - s * model.c1 * kp.powf(-ps) / ps);
    let derivative = pre * ps * kp.powf(-ps - 1.0);
    let second_order =
        pre * 0.5 * s * (s + 1.0) * model.c1 * model.c1 * kp.powf(-ps - 1.0) / (ps + 1.0);
    (integral, derivative / 24.0 + second_order)
}

/// `zeta_{beta,n}(s)` from given eigenvalues `nu_1 <= nu_2 <= ...`.
pub fn zeta_from_eigenvalues(beta: f64, n: usize, s: f64, eigs: &[f64]) -> Result<ZetaResult> {
    let p_exact = bs_exponent(beta);
    let exponent = s * p_exact;
    if !(exponent > 1.0) {
        return Err(WeylError::Divergent { exponent });
    }
    let cutoff = eigs.len();
    let mut terms: Vec<f64> = eigs.iter().map(|nu| nu.powf(-s)).collect();
    // Summing from the small end limits rounding.
    terms.reverse();
    let partial_sum: f64 = terms.iter().sum();
    let model = fit_tail(eigs)?;
    let (tail_estimate, em_error) = tail_sum(&model, s, cutoff);
    // Model uncertainty: the same fit with the exact exponent.
    let fixed = {
        let k_min = cutoff / 2;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for k in k_min..=cutoff {
            let kf = k as f64;
            rows.push(vec![1.0, 1.0 / kf]);
            rhs.push(eigs[k - 1].ln() - p_exact * kf.ln());
        }
        let (x, residual) = lstsq(&rows, &rhs)?;
        TailModel {
            c_bs: x[0].exp(),
            p: p_exact,
            c1: x[1],
            residual,
        }
    };
    let (tail_fixed, _) = tail_sum(&fixed, s, cutoff);
    let error_bound = em_error.abs()
        + (tail_estimate - tail_fixed).abs()
        + s * model.residual * tail_estimate.abs()
        + f64::EPSILON * cutoff as f64 * partial_sum;
    Ok(ZetaResult {
        s,
        beta,
        n,
        cutoff,
        partial_sum,
        tail_estimate,
        tail_model: model,
        total: partial_sum + tail_estimate,
        error_bound,
    })
}

/// `zeta_{beta,n}(s)` with a cutoff of `K` solver eigenvalues.
pub fn zeta_value(beta: f64, n: usize, s: f64, cutoff: usize) -> Result<ZetaResult> {
    let exponent = s * bs_exponent(beta);
    if !(exponent > 1.0) {
        return Err(WeylError::Divergent { exponent });
    }
    let spectrum = model_spectrum(beta, n, cutoff)?;
    zeta_from_eigenvalues(beta, n, s, &spectrum.eigenvalues[..cutoff])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylCoefficient {
    pub beta: f64,
    pub n: usize,
    pub value: f64,
    pub error_bound: f64,
    pub zeta: ZetaResult,
}

/// `A(beta, n) = gamma_n zeta_{beta,n}(d_H / 2)` from given eigenvalues.
pub fn weyl_coefficient_from_eigenvalues(
    beta: f64,
    n: usize,
    eigs: &[f64],
) -> Result<WeylCoefficient> {
    if !(beta > critical_beta(n)) {
        return Err(invalid(
            "beta",
            format!("need beta > 2/n = {}", critical_beta(n)),
        ));
    }
    let zeta = zeta_from_eigenvalues(beta, n, half_hausdorff_dim(n, beta), eigs)?;
    let g = gamma_weyl(n);
    Ok(WeylCoefficient {
        beta,
        n,
        value: g * zeta.total,
        error_bound: g * zeta.error_bound,
        zeta,
    })
}

pub fn weyl_coefficient(beta: f64, n: usize) -> Result<WeylCoefficient> {
    weyl_coefficient_with_cutoff(beta, n, DEFAULT_CUTOFF)
}

pub fn weyl_coefficient_with_cutoff(beta: f64, n: usize, cutoff: usize) -> Result<WeylCoefficient> {
    if !(beta > critical_beta(n)) {
        return Err(invalid(
            "beta",
            format!("need beta > 2/n = {}", critical_beta(n)),
        ));
    }
    let spectrum = model_spectrum(beta, n, cutoff)?;
    weyl_coefficient_from_eigenvalues(beta, n, &spectrum.eigenvalues[..cutoff])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleRow {
    pub beta: f64,
    pub coefficient: f64,
    pub error_bound: f64,
    /// `(beta - beta_c) A(beta, n)`.
    pub rescaled: f64,
    /// `rescaled` divided by the predicted residue `(2/n) gamma_{n+1}`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleProbe {
    pub n: usize,
    pub residue: f64,
    pub rows: Vec<PoleRow>,
    /// Intercept of the least-squares line of `normalized` in `beta - beta_c`.
    pub extrapolated: f64,
    pub slope: f64,
}

/// Predicted residue `(2/n) gamma_{n+1}` of `A(., n)` at `beta_c`.
pub fn pole_residue(n: usize) -> f64 {
    2.0 / n as f64 * gamma_weyl(n + 1)
}

/// Linear extrapolation of `(beta - beta_c) A(beta, n)` to `beta_c`.
pub fn pole_probe_from(n: usize, coefficients: &[WeylCoefficient]) -> Result<PoleProbe> {
    if coefficients.len() < 2 {
        return Err(invalid("beta_sequence", "need at least two exponents"));
    }
    let bc = critical_beta(n);
    let residue = pole_residue(n);
    let rows: Vec<PoleRow> = coefficients
        .iter()
        .map(|a| {
            let rescaled = (a.beta - bc) * a.value;
            PoleRow {
                beta: a.beta,
                coefficient: a.value,
                error_bound: a.error_bound,
                rescaled,
                normalized: rescaled / residue,
            }
        })
        .collect();
    let design: Vec<Vec<f64>> = rows.iter().map(|r| vec![1.0, r.beta - bc]).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.normalized).collect();
    let (x, _) = lstsq(&design, &rhs)?;
    Ok(PoleProbe {
        n,
        residue,
        rows,
        extrapolated: x[0],
        slope: x[1],
    })
}

pub fn pole_probe(n: usize, betas: &[f64], cutoff: usize) -> Result<PoleProbe> {
    let bc = critical_beta(n);
    if let Some(b) = betas.iter().find(|&&b| !(b > bc)) {
        return Err(invalid(
            "beta_sequence",
            format!("{b} is not above beta_c = {bc}"),
        ));
    }
    let coefficients = betas
        .iter()
        .map(|&b| weyl_coefficient_with_cutoff(b, n, cutoff))
        .collect::<Result<Vec<_>>>()?;
    pole_probe_from(n, &coefficients)
}
