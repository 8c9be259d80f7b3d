//! Boundary-distance constant `c_beta` of `dx^2 + x^{-beta} dy^2`.
//!
//! Three independent routes: the Gamma closed form, Gauss-Jacobi quadrature
//! of the Beta integrals `I_0`, `I_1`, and shooting the raw geodesic flow.

use serde::{Deserialize, Serialize};

use crate::constants::gamma;
use crate::error::{invalid, Result, WeylError};
use crate::quadrature::gauss_jacobi;

const JACOBI_NODES: usize = 30;

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid(
            "beta",
            format!("{beta} must be positive and finite"),
        ));
    }
    Ok(())
}

/// `theta = 2 / (2 + beta)`.
pub fn theta(beta: f64) -> f64 {
    2.0 / (2.0 + beta)
}

/// `int_0^1 s^{q} (1 - s)^{-1/2} ds` for `q > -1`, split at `s = 1/2`.
///
/// Each half carries one endpoint singularity in its Jacobi weight; both
/// weight masses are elementary.
fn beta_like(q: f64) -> f64 {
    // [0, 1/2]: s = (1 + x)/4, weight (1 + x)^q with mass 2^{q+1}/(q+1).
    let (x, w) = gauss_jacobi(JACOBI_NODES, 0.0, q, 2f64.powf(q + 1.0) / (q + 1.0));
    let left: f64 = x
        .iter()
        .zip(&w)
        .map(|(x, w)| w * (1.0 - 0.25 * (1.0 + x)).powf(-0.5))
        .sum::<f64>()
        * 4f64.powf(-q - 1.0);
    // [1/2, 1]: s = (3 + x)/4, weight (1 - x)^{-1/2} with mass 2 sqrt(2).
    let (x, w) = gauss_jacobi(JACOBI_NODES, -0.5, 0.0, 2.0 * 2f64.sqrt());
    let right: f64 = x
        .iter()
        .zip(&w)
        .map(|(x, w)| w * (0.25 * (3.0 + x)).powf(q))
        .sum::<f64>()
        * 0.5;
    left + right
}

/// `I_0 = int_0^1 (1 - t^beta)^{-1/2} dt` and `I_1 = int_0^1 t^beta (1 - t^beta)^{-1/2} dt`.
pub fn beta_integrals(beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let q = 1.0 / beta - 1.0;
    Ok((beta_like(q) / beta, beta_like(q + 1.0) / beta))
}

/// Gamma closed form of `c_beta`.
pub fn c_beta_formula(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let th = theta(beta);
    let ib = 1.0 / beta;
    let i0 = std::f64::consts::PI.sqrt() / beta * gamma(ib) / gamma(ib + 0.5);
    Ok(2.0 * ((2.0 + beta) / 4.0).powf(th) * i0.powf(beta / (2.0 + beta)))
}

/// `c_beta = 2 I_0 (2 I_1)^{-theta}` from quadrature values.
pub fn c_beta_quadrature(beta: f64) -> Result<f64> {
    let (i0, i1) = beta_integrals(beta)?;
    Ok(2.0 * i0 * (2.0 * i1).powf(-theta(beta)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingRecord {
    pub x_max: f64,
    pub deltas: Vec<f64>,
    /// Arc length from the apex down to `x = delta`.
    pub half_lengths: Vec<f64>,
    /// `y`-displacement over the same arc.
    pub half_spans: Vec<f64>,
    pub half_length: f64,
    pub half_span: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy)]
struct State {
    x: f64,
    y: f64,
    px: f64,
    py: f64,
}

fn rhs(beta: f64, s: &State) -> State {
    let xb = s.x.powf(beta);
    State {
        x: s.px,
        y: xb * s.py,
        px: -0.5 * beta * xb / s.x * s.py * s.py,
        py: 0.0,
    }
}

fn axpy(s: &State, h: f64, d: &State) -> State {
    State {
        x: s.x + h * d.x,
        y: s.y + h * d.y,
        px: s.px + h * d.px,
        py: s.py + h * d.py,
    }
}

fn rk4(beta: f64, s: &State, h: f64) -> State {
    let k1 = rhs(beta, s);
    let k2 = rhs(beta, &axpy(s, 0.5 * h, &k1));
    let k3 = rhs(beta, &axpy(s, 0.5 * h, &k2));
    let k4 = rhs(beta, &axpy(s, h, &k3));
    State {
        x: s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
        y: s.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
        px: s.px + h / 6.0 * (k1.px + 2.0 * k2.px + 2.0 * k3.px + k4.px),
        py: s.py,
    }
}

/// Puts the state back on the unit-speed shell `p_x^2 + x^beta p_y^2 = 1`
/// by adjusting `p_x`, which keeps the conserved `p_y` exact.
fn renormalize(beta: f64, s: &mut State) {
    let rest = 1.0 - s.x.powf(beta) * s.py * s.py;
    if rest > 1e-6 {
        s.px = -rest.sqrt();
    }
}

/// Integrates from the apex to `x = delta`, returning `(time, y, steps)`.
fn shoot_to(beta: f64, x_max: f64, delta: f64, tol: f64) -> Result<(f64, f64, usize)> {
    let mut s = State {
        x: x_max,
        y: 0.0,
        px: 0.0,
        py: x_max.powf(-0.5 * beta),
    };
    let mut t = 0.0;
    let mut h = 1e-3 * x_max;
    let mut steps = 0;
    loop {
        if steps > 5_000_000 {
            return Err(WeylError::Integration(format!(
                "too many steps before x = {delta}"
            )));
        }
        // Never step past the target by more than a fraction of the gap.
        let gap = s.x - delta;
        let h_try = h.min(0.5 * gap.max(0.0) + 0.5 * delta).min(4.0 * x_max);
        let full = rk4(beta, &s, h_try);
        let half = rk4(beta, &rk4(beta, &s, 0.5 * h_try), 0.5 * h_try);
        let err = (full.x - half.x)
            .abs()
            .max((full.y - half.y).abs())
            .max((full.px - half.px).abs());
        let scale = tol * (1.0 + half.x.abs().min(x_max));
        if !(err.is_finite()) || half.x <= 0.0 {
            h = 0.25 * h_try;
            if h < 1e-18 * x_max {
                return Err(WeylError::Integration(
                    "step underflow near the boundary".into(),
                ));
            }
            continue;
        }
        if err > scale {
            h = 0.9 * h_try * (scale / err).powf(0.2);
            continue;
        }
        steps += 1;
        let mut next = half;
        if next.x <= delta {
            // Land on x = delta by secant iteration on the step length.
            let (mut h_lo, mut x_lo) = (0.0, s.x);
            let (mut h_hi, mut x_hi) = (h_try, next.x);
            let mut landed = next;
            let mut h_land = h_try;
            for _ in 0..60 {
                let h_mid = h_lo + (x_lo - delta) / (x_lo - x_hi) * (h_hi - h_lo);
                let h_mid = h_mid.clamp(h_lo + 1e-3 * (h_hi - h_lo), h_hi - 1e-3 * (h_hi - h_lo));
                let st = rk4(beta, &rk4(beta, &s, 0.5 * h_mid), 0.5 * h_mid);
                landed = st;
                h_land = h_mid;
                if (st.x - delta).abs() <= 1e-15 * delta.max(1e-300) * 8.0 {
                    break;
                }
                if st.x > delta {
                    h_lo = h_mid;
                    x_lo = st.x;
                } else {
                    h_hi = h_mid;
                    x_hi = st.x;
                }
            }
            // Close the remaining sliver with the local slope dx/dt = p_x.
            let dt = (delta - landed.x) / landed.px;
            return Ok((
                t + h_land + dt,
                landed.y + dt * landed.x.powf(beta) * landed.py,
                steps,
            ));
        }
        renormalize(beta, &mut next);
        s = next;
        t += h_try;
        h = if err > 0.0 {
            (0.9 * h_try * (scale / err).powf(0.2)).min(4.0 * h_try)
        } else {
            4.0 * h_try
        };
    }
}

/// Default cutoffs for the `delta -> 0` extrapolation of the shooting route.
pub const DEFAULT_DELTAS: [f64; 3] = [1e-5, 5e-6, 2.5e-6];

/// Shooting estimate `2 L / (2 Delta_y)^theta` of `c_beta`.
///
/// Half-length and half-span are recorded at each `delta` (relative to
/// `x_max`) and extrapolated linearly to `delta = 0` by least squares.
pub fn c_beta_shooting(beta: f64, x_max: f64, deltas: &[f64]) -> Result<(f64, ShootingRecord)> {
    check_beta(beta)?;
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(invalid("x_max", "must be positive"));
    }
    if deltas.len() < 2 || deltas.iter().any(|&d| !(d > 0.0 && d < 0.1)) {
        return Err(invalid(
            "delta",
            "need at least two cutoffs in (0, 0.1) x_max",
        ));
    }
    let mut record = ShootingRecord {
        x_max,
        deltas: deltas.iter().map(|d| d * x_max).collect(),
        half_lengths: Vec::new(),
        half_spans: Vec::new(),
        half_length: 0.0,
        half_span: 0.0,
        steps: 0,
    };
    for &d in &record.deltas.clone() {
        let (l, y, steps) = shoot_to(beta, x_max, d, 1e-14)?;
        record.half_lengths.push(l);
        record.half_spans.push(y);
        record.steps += steps;
    }
    record.half_length = linear_intercept(&record.deltas, &record.half_lengths);
    record.half_span = linear_intercept(&record.deltas, &record.half_spans);
    let c = 2.0 * record.half_length / (2.0 * record.half_span).powf(theta(beta));
    Ok((c, record))
}

fn linear_intercept(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    my - sxy / sxx * mx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDistanceResult {
    pub beta: f64,
    pub theta: f64,
    pub i0: f64,
    pub i1: f64,
    pub c_formula: f64,
    pub c_quadrature: f64,
    pub c_shooting: f64,
    pub shooting: ShootingRecord,
}

impl BoundaryDistanceResult {
    pub fn max_rel_dev(&self) -> f64 {
        let r1 = (self.c_quadrature - self.c_formula).abs() / self.c_formula;
        let r2 = (self.c_shooting - self.c_formula).abs() / self.c_formula;
        r1.max(r2)
    }
}

pub fn boundary_distance(beta: f64, x_max: f64) -> Result<BoundaryDistanceResult> {
    let (i0, i1) = beta_integrals(beta)?;
    let (c_shooting, shooting) = c_beta_shooting(beta, x_max, &DEFAULT_DELTAS)?;
    Ok(BoundaryDistanceResult {
        beta,
        theta: theta(beta),
        i0,
        i1,
        c_formula: c_beta_formula(beta)?,
        c_quadrature: 2.0 * i0 * (2.0 * i1).powf(-theta(beta)),
        c_shooting,
        shooting,
    })
}
