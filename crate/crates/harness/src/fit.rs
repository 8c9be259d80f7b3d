//! Least-squares fits of counting curves in each model's natural coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use weylab_core::cone::CountingCurve;

use crate::error::{HarnessError, Result};

pub const MIN_SAMPLES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FitModel {
    /// `C lambda^p`, fitted on log-log.
    PurePower,
    /// `C lambda^p ln lambda`.
    PowerLog,
    /// `c lambda ln lambda + c' lambda`, linear in both constants.
    LambdaLogLinear,
    /// `C lambda^p (ln lambda)^q` with `q` fixed.
    PowerLogQ { q: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// `C`, or `c` for [`FitModel::LambdaLogLinear`].
    pub constant: f64,
    /// `p`; fixed at 1 for [`FitModel::LambdaLogLinear`].
    pub exponent: f64,
    /// `c'` for [`FitModel::LambdaLogLinear`].
    pub secondary: Option<f64>,
    /// Euclidean norm of the residual in the fitted coordinates.
    pub residual_norm: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

impl FitResult {
    pub fn eval(&self, lambda: f64) -> f64 {
        let l = lambda.ln();
        match self.model {
            FitModel::PurePower => self.constant * lambda.powf(self.exponent),
            FitModel::PowerLog => self.constant * lambda.powf(self.exponent) * l,
            FitModel::LambdaLogLinear => {
                self.constant * lambda * l + self.secondary.unwrap_or(0.0) * lambda
            }
            FitModel::PowerLogQ { q } => self.constant * lambda.powf(self.exponent) * l.powf(q),
        }
    }
}

/// Least squares with an SVD rank check.
pub fn least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    if m < k || k == 0 {
        return Err(HarnessError::Fit("underdetermined system".into()));
    }
    let a = DMatrix::from_fn(m, k, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(svd.singular_values.min() > 1e-12 * smax) {
        return Err(HarnessError::Fit("rank-deficient design matrix".into()));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| HarnessError::Fit(e.to_string()))?;
    let r = &a * &x - b;
    Ok((x.iter().copied().collect(), r.norm()))
}

/// Fits `(lambda, count)` pairs with `lo <= lambda <= hi`.
pub fn fit_points(
    points: &[(f64, f64)],
    model: FitModel,
    window: Option<(f64, f64)>,
) -> Result<FitResult> {
    let (lo, hi) = window.unwrap_or_else(|| {
        let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    });
    let used: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|p| p.0 >= lo && p.0 <= hi)
        .collect();
    if used.len() < MIN_SAMPLES {
        return Err(HarnessError::Fit(format!(
            "{} samples in window [{lo}, {hi}], need at least {MIN_SAMPLES}",
            used.len()
        )));
    }
    let log_model = !matches!(model, FitModel::LambdaLogLinear);
    if log_model && used.iter().any(|p| !(p.1 > 0.0 && p.0 > 1.0)) {
        return Err(HarnessError::Fit(
            "log-log fits need counts > 0 and lambda > 1".into(),
        ));
    }
    let (constant, exponent, secondary, residual_norm) = match model {
        FitModel::LambdaLogLinear => {
            let rows: Vec<Vec<f64>> = used.iter().map(|p| vec![p.0 * p.0.ln(), p.0]).collect();
            let rhs: Vec<f64> = used.iter().map(|p| p.1).collect();
            let (x, r) = least_squares(&rows, &rhs)?;
            (x[0], 1.0, Some(x[1]), r)
        }
        _ => {
            let q = match model {
                FitModel::PurePower => 0.0,
                FitModel::PowerLog => 1.0,
                FitModel::PowerLogQ { q } => q,
                FitModel::LambdaLogLinear => unreachable!(),
            };
            let rows: Vec<Vec<f64>> = used.iter().map(|p| vec![1.0, p.0.ln()]).collect();
            let rhs: Vec<f64> = used.iter().map(|p| p.1.ln() - q * p.0.ln().ln()).collect();
            let (x, r) = least_squares(&rows, &rhs)?;
            (x[0].exp(), x[1], None, r)
        }
    };
    if !residual_norm.is_finite() {
        return Err(HarnessError::Fit("non-finite residual".into()));
    }
    Ok(FitResult {
        model,
        constant,
        exponent,
        secondary,
        residual_norm,
        window: (lo, hi),
        samples: used.len(),
    })
}

/// Fits the accepted samples of a curve.
pub fn fit_counting_curve(
    curve: &CountingCurve,
    model: FitModel,
    window: Option<(f64, f64)>,
) -> Result<FitResult> {
    let points: Vec<(f64, f64)> = curve.accepted().map(|s| (s.lambda, s.count)).collect();
    fit_points(&points, model, window)
}
