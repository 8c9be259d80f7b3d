//! Right-hand sides of the variable-exponent Weyl laws: the integral Weyl
//! law, truncated volumes, the Morse-Bott Laplace method and the leading
//! forms by regime.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{critical_beta, gamma_weyl, ExponentProfile, ModelConfig};
use crate::error::{invalid, Result, WeylError};
use crate::quadrature::{adaptive_simpson, adaptive_simpson_rel, Pchip};
use crate::zeta::{weyl_coefficient_with_cutoff, DEFAULT_CUTOFF};

/// Morse-Bott tolerance on `Q(w)`.
pub const MORSE_BOTT_TOL: f64 = 1e-8;

/// Step of the central second difference at a maximum.
const HESSIAN_STEP: f64 = 1e-4;

/// Per-component data of the maximum set `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximumComponent {
    /// Location on the circle, or `None` for declared higher-codimension data.
    pub at: Option<f64>,
    /// `det Q(w)`; for `d = 1` this is `Q(w) = -f''(w)`.
    pub det_q: f64,
    /// `h0`-volume of the component (1 for a point).
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseBottData {
    pub codimension: usize,
    pub f_max: f64,
    pub components: Vec<MaximumComponent>,
}

impl MorseBottData {
    /// `sum_w weight(w) / sqrt(det Q(w))`.
    pub fn inverse_root_sum(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight / c.det_q.sqrt())
            .sum()
    }

    /// Declared data for a maximum set of codimension `d`.
    pub fn declared(
        codimension: usize,
        f_max: f64,
        components: Vec<MaximumComponent>,
    ) -> Result<Self> {
        if codimension == 0 {
            return Err(invalid("codimension", "must be >= 1"));
        }
        if let Some(c) = components.iter().find(|c| !(c.det_q > MORSE_BOTT_TOL)) {
            return Err(WeylError::MorseBottViolation {
                at: c.at.unwrap_or(f64::NAN),
                q: c.det_q,
            });
        }
        Ok(Self {
            codimension,
            f_max,
            components,
        })
    }

    /// Locates the maxima of a smooth periodic `f` on `[0, period)`.
    ///
    /// A coarse scan brackets local maxima, golden-section search refines
    /// them, and every maximum within `1e-10` of the global one is kept.
    pub fn locate<F: Fn(f64) -> f64>(f: F, period: f64) -> Result<Self> {
        const SAMPLES: usize = 4096;
        let h = period / SAMPLES as f64;
        let vals: Vec<f64> = (0..SAMPLES).map(|i| f(i as f64 * h)).collect();
        let mut found: Vec<(f64, f64)> = Vec::new();
        for i in 0..SAMPLES {
            let prev = vals[(i + SAMPLES - 1) % SAMPLES];
            let next = vals[(i + 1) % SAMPLES];
            if vals[i] >= prev && vals[i] > next {
                let c = i as f64 * h;
                let (y, v) = golden_max(&f, c - h, c + h);
                found.push((y.rem_euclid(period), v));
            }
        }
        let f_max = found.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if !f_max.is_finite() {
            return Err(invalid(
                "profile",
                "no isolated maximum found (constant function?)",
            ));
        }
        let tol = 1e-10 * f_max.abs().max(1.0);
        let mut components = Vec::new();
        for (y, v) in found.into_iter().filter(|p| f_max - p.1 <= tol) {
            let _ = v;
            let q = -(f(y + HESSIAN_STEP) - 2.0 * f(y) + f(y - HESSIAN_STEP))
                / (HESSIAN_STEP * HESSIAN_STEP);
            if !(q > MORSE_BOTT_TOL) {
                return Err(WeylError::MorseBottViolation { at: y, q });
            }
            components.push(MaximumComponent {
                at: Some(y),
                det_q: q,
                weight: 1.0,
            });
        }
        Ok(Self {
            codimension: 1,
            f_max,
            components,
        })
    }

    /// Maximum data of `beta(.)` on the boundary circle.
    pub fn from_profile(profile: &ExponentProfile) -> Result<Self> {
        let points = profile.maximum_points();
        if points.is_empty() {
            return Err(invalid(
                "profile",
                "constant profiles have no isolated maxima",
            ));
        }
        let mut components = Vec::new();
        for y in points {
            let q = -profile.second_derivative(y);
            if !(q > MORSE_BOTT_TOL) {
                return Err(WeylError::MorseBottViolation { at: y, q });
            }
            components.push(MaximumComponent {
                at: Some(y),
                det_q: q,
                weight: 1.0,
            });
        }
        Ok(Self {
            codimension: 1,
            f_max: profile.beta_max(),
            components,
        })
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let y = 0.5 * (a + b);
    (y, f(y))
}

/// Laplace approximation `e^{tau f_max} (2 pi / tau)^{d/2} sum_w a(w) / sqrt(det Q(w))`
/// of `int a e^{tau f}`.
pub fn laplace_morse_bott<A: Fn(f64) -> f64>(
    data: &MorseBottData,
    amplitude: A,
    tau: f64,
) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(invalid("tau", "must be positive"));
    }
    let sum: f64 = data
        .components
        .iter()
        .map(|c| c.weight * c.at.map_or(1.0, &amplitude) / c.det_q.sqrt())
        .sum();
    Ok((tau * data.f_max).exp() * (2.0 * PI / tau).powf(0.5 * data.codimension as f64) * sum)
}

/// Quadrature oracle `int_0^period a(y) e^{tau f(y)} dy`, centred on the
/// maximum so the integrand peak is interior.
pub fn laplace_quadrature<F: Fn(f64) -> f64, A: Fn(f64) -> f64>(
    f: F,
    amplitude: A,
    tau: f64,
    period: f64,
    f_max: f64,
    center: f64,
) -> f64 {
    let g = |y: f64| amplitude(y) * (tau * (f(y) - f_max)).exp();
    let lo = center - 0.5 * period;
    adaptive_simpson_rel(g, lo, lo + period, 1e-12) * (tau * f_max).exp()
}

/// `A(beta, n)` on a Chebyshev grid, interpolated through the smooth
/// product `(beta - beta_c) A(beta, n)`.
#[derive(Debug, Clone)]
pub struct WeylTable {
    pub n: usize,
    pub betas: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    rescaled: Pchip,
}

impl WeylTable {
    /// Chebyshev-Lobatto nodes on `[lo, hi]`, endpoints included.
    pub fn chebyshev_nodes(lo: f64, hi: f64, points: usize) -> Vec<f64> {
        let m = (points - 1) as f64;
        let mut x: Vec<f64> = (0..points)
            .map(|i| 0.5 * (lo + hi) - 0.5 * (hi - lo) * (PI * i as f64 / m).cos())
            .collect();
        x[0] = lo;
        x[points - 1] = hi;
        x
    }

    pub fn from_values(
        n: usize,
        betas: Vec<f64>,
        values: Vec<f64>,
        errors: Vec<f64>,
    ) -> Result<Self> {
        let bc = critical_beta(n);
        if betas.len() < 2 || betas.len() != values.len() || errors.len() != values.len() {
            return Err(invalid(
                "table",
                "need matching beta/value/error columns of length >= 2",
            ));
        }
        if betas.iter().any(|&b| !(b > bc)) {
            return Err(invalid("table", "all exponents must exceed beta_c"));
        }
        let rescaled = Pchip::new(
            betas.clone(),
            betas
                .iter()
                .zip(&values)
                .map(|(b, a)| (b - bc) * a)
                .collect(),
        );
        Ok(Self {
            n,
            betas,
            values,
            errors,
            rescaled,
        })
    }

    /// Evaluates `A(beta, n)` from solver spectra at `points` Chebyshev nodes.
    pub fn build(n: usize, lo: f64, hi: f64, points: usize, cutoff: usize) -> Result<Self> {
        if !(lo > critical_beta(n) && hi > lo) || points < 2 {
            return Err(invalid("table", "need beta_c < lo < hi and >= 2 points"));
        }
        let betas = Self::chebyshev_nodes(lo, hi, points);
        let coeffs = betas
            .iter()
            .map(|&b| weyl_coefficient_with_cutoff(b, n, cutoff))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(
            n,
            betas,
            coeffs.iter().map(|c| c.value).collect(),
            coeffs.iter().map(|c| c.error_bound).collect(),
        )
    }

    /// Default table: 60 nodes on `[beta_bar, beta_max + 0.5]` with cutoff 200.
    pub fn for_profile(n: usize, beta_bar: f64, beta_max: f64) -> Result<Self> {
        Self::build(n, beta_bar, beta_max + 0.5, 60, DEFAULT_CUTOFF)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.rescaled.domain()
    }

    pub fn eval(&self, beta: f64) -> f64 {
        self.rescaled.eval(beta) / (beta - critical_beta(self.n))
    }
}

/// Subintervals of `[0, period)` where `beta >= beta_bar`.
fn superlevel_intervals(profile: &ExponentProfile, beta_bar: f64) -> Vec<(f64, f64)> {
    const SAMPLES: usize = 2048;
    let period = profile.period();
    let h = period / SAMPLES as f64;
    let g = |y: f64| profile.eval(y) - beta_bar;
    let root = |mut a: f64, mut b: f64| {
        let ga = g(a);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if (g(m) >= 0.0) == (ga >= 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut edges = Vec::new();
    for i in 0..SAMPLES {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        if (g(a) >= 0.0) != (g(b) >= 0.0) {
            edges.push((root(a, b), g(b) >= 0.0));
        }
    }
    if edges.is_empty() {
        return if g(0.0) >= 0.0 {
            vec![(0.0, period)]
        } else {
            Vec::new()
        };
    }
    // Rotate so that the list starts with an upward crossing.
    let start = edges.iter().position(|e| e.1).unwrap_or(0);
    edges.rotate_left(start);
    let mut out = Vec::new();
    for pair in edges.chunks(2) {
        if let [(up, true), (down, false)] = pair {
            let end = if down < up { down + period } else { *down };
            out.push((*up, end));
        }
    }
    out
}

/// `int_{beta(y) >= beta_bar} A(beta(y), n) lambda^{n (2 + beta(y)) / 4} dvol`.
///
/// The profile lives on the first torus factor; further factors contribute
/// their side lengths. Quadrature tolerance `1e-6` relative.
pub fn integral_weyl_rhs(
    profile: &ExponentProfile,
    model: &ModelConfig,
    beta_bar: f64,
    lambda: f64,
    table: &WeylTable,
) -> Result<f64> {
    let n = model.n;
    if table.n != n {
        return Err(invalid("table", "dimension mismatch"));
    }
    if !(beta_bar > critical_beta(n)) {
        return Err(invalid(
            "beta_bar",
            format!("must exceed beta_c = {}", critical_beta(n)),
        ));
    }
    if !(lambda > 1.0) {
        return Err(invalid("lambda", "must exceed 1"));
    }
    let (lo, hi) = table.domain();
    if beta_bar < lo - 1e-12 || profile.beta_max() > hi + 1e-12 {
        return Err(invalid(
            "table",
            format!(
                "table covers [{lo}, {hi}], need [{beta_bar}, {}]",
                profile.beta_max()
            ),
        ));
    }
    if beta_bar >= profile.beta_max() && !profile.is_constant() {
        log::warn!("beta_bar = {beta_bar} >= beta_max: empty integration set");
        return Ok(0.0);
    }
    let transverse: f64 = model.torus.iter().skip(1).product();
    let nf = n as f64;
    let p_max = nf * (2.0 + profile.beta_max()) / 4.0;
    let ln_l = lambda.ln();
    let integrand = |y: f64| {
        let b = profile.eval(y).max(beta_bar);
        table.eval(b) * (ln_l * (nf * (2.0 + b) / 4.0 - p_max)).exp()
    };
    let scaled = if profile.is_constant() {
        if profile.beta_max() < beta_bar {
            log::warn!("constant beta below beta_bar: empty integration set");
            return Ok(0.0);
        }
        integrand(0.0) * profile.period()
    } else {
        superlevel_intervals(profile, beta_bar)
            .into_iter()
            .map(|(a, b)| adaptive_simpson_rel(integrand, a, b, 1e-8))
            .sum()
    };
    Ok(scaled * transverse * (p_max * ln_l).exp())
}

/// `int_eps^b x^{-s} dx` with the logarithmic branch at `s = 1`.
pub fn radial_volume(s: f64, eps: f64, b: f64) -> f64 {
    if eps >= b {
        return 0.0;
    }
    let u = 1.0 - s;
    let (le, lb) = (eps.ln(), b.ln());
    if u == 0.0 {
        return lb - le;
    }
    let span = lb - le;
    (u * le).exp() * (u * span).exp_m1() / u
}

/// `vol_g({dist(., M) >= lambda^{-1/2}})` for the collar `(0, b) x M`.
pub fn truncated_volume(
    profile: &ExponentProfile,
    model: &ModelConfig,
    lambda: f64,
) -> Result<f64> {
    model.validate()?;
    if !(lambda >= 1.0) {
        return Err(invalid("lambda", "must be >= 1"));
    }
    let eps = lambda.powf(-0.5);
    let b = model.collar_length;
    let n = model.n as f64;
    let transverse: f64 = model.torus.iter().skip(1).product();
    let per_y = |y: f64| radial_volume(0.5 * n * profile.eval(y), eps, b);
    let circle = if profile.is_constant() {
        per_y(0.0) * profile.period()
    } else {
        let coarse = adaptive_simpson(per_y, 0.0, profile.period(), f64::INFINITY).abs();
        adaptive_simpson(per_y, 0.0, profile.period(), 1e-10 * coarse.max(1e-300))
    };
    Ok(circle * transverse)
}

/// `vol_g(X)` of the collar; infinite once `n beta_max / 2 >= 1`.
pub fn full_volume(profile: &ExponentProfile, model: &ModelConfig) -> Result<f64> {
    model.validate()?;
    let n = model.n as f64;
    if 0.5 * n * profile.beta_max() >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let b = model.collar_length;
    let transverse: f64 = model.torus.iter().skip(1).product();
    let per_y = |y: f64| {
        let u = 1.0 - 0.5 * n * profile.eval(y);
        b.powf(u) / u
    };
    let circle = if profile.is_constant() {
        per_y(0.0) * profile.period()
    } else {
        adaptive_simpson_rel(per_y, 0.0, profile.period(), 1e-10)
    };
    Ok(circle * transverse)
}

/// `(int_c^C x^{gamma-1} dx) / (int_c^{sqrt(lambda)} x^{gamma-1} dx)`.
pub fn truncated_ratio(gamma: f64, c: f64, big_c: f64, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(invalid("gamma", "must lie in [0, 1]"));
    }
    if !(0.0 < c && c < big_c) {
        return Err(invalid("c", "need 0 < c < C"));
    }
    if !(lambda.sqrt() > big_c) {
        return Err(invalid("lambda", "need sqrt(lambda) > C"));
    }
    let (num, den) = ((big_c / c).ln(), (lambda.sqrt() / c).ln());
    if gamma == 0.0 {
        return Ok(num / den);
    }
    Ok((gamma * num).exp_m1() / (gamma * den).exp_m1())
}

/// The explicit uniform bound `(C/c) ln(C/c) / ln(sqrt(lambda)/c)`.
pub fn truncated_ratio_bound(c: f64, big_c: f64, lambda: f64) -> f64 {
    let r = big_c / c;
    r * r.ln() / (lambda.sqrt() / c).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Supercritical,
    /// Constant exponent equal to `beta_c`: `lambda^{(n+1)/2} ln lambda`.
    CriticalConstant,
    CriticalD1,
    CriticalD2,
    CriticalDgt2,
    Subcritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadingForm {
    /// `C lambda^p (ln lambda)^q`.
    PowerLog,
    /// `C lambda^p ln ln lambda`.
    PowerLogLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub form: LeadingForm,
    pub constant: f64,
    pub p: f64,
    pub q: f64,
    pub regime: Regime,
}

impl AsymptoticPrediction {
    pub fn eval(&self, lambda: f64) -> f64 {
        let l = lambda.ln();
        match self.form {
            LeadingForm::PowerLog => self.constant * lambda.powf(self.p) * l.powf(self.q),
            LeadingForm::PowerLogLog => self.constant * lambda.powf(self.p) * l.ln(),
        }
    }
}

/// Gap under which `beta_max` is reported as near-critical.
pub const NEAR_CRITICAL: f64 = 1e-6;

/// Leading term by regime.
///
/// `weyl_at_max` supplies `A(beta_max, n)` and is only called in the
/// supercritical case. `data` is the maximum-set data for non-constant
/// profiles.
pub fn corollary_prediction_from<W: FnOnce(f64) -> Result<f64>>(
    profile: &ExponentProfile,
    model: &ModelConfig,
    data: Option<&MorseBottData>,
    weyl_at_max: W,
) -> Result<AsymptoticPrediction> {
    model.validate()?;
    let n = model.n;
    let nf = n as f64;
    let bc = critical_beta(n);
    let bmax = profile.beta_max();
    let g1 = gamma_weyl(n + 1);
    let vol_m = model.boundary_volume();
    let p_crit = 0.5 * (nf + 1.0);
    if (bmax - bc).abs() < NEAR_CRITICAL && bmax != bc {
        log::warn!("beta_max = {bmax} is within {NEAR_CRITICAL} of beta_c; classified by sign");
    }
    if profile.is_constant() {
        return Ok(if bmax > bc {
            AsymptoticPrediction {
                form: LeadingForm::PowerLog,
                constant: weyl_at_max(bmax)? * vol_m,
                p: 0.5 * nf + 0.25 * nf * bmax,
                q: 0.0,
                regime: Regime::Supercritical,
            }
        } else if bmax == bc {
            AsymptoticPrediction {
                form: LeadingForm::PowerLog,
                constant: 0.5 * g1 * vol_m,
                p: p_crit,
                q: 1.0,
                regime: Regime::CriticalConstant,
            }
        } else {
            AsymptoticPrediction {
                form: LeadingForm::PowerLog,
                constant: g1 * full_volume(profile, model)?,
                p: p_crit,
                q: 0.0,
                regime: Regime::Subcritical,
            }
        });
    }
    let owned;
    let data = match data {
        Some(d) => d,
        None => {
            owned = MorseBottData::from_profile(profile)?;
            &owned
        }
    };
    let d = data.codimension as f64;
    let sum = data.inverse_root_sum();
    if bmax > bc {
        let c = weyl_at_max(bmax)? * (2.0 * PI).powf(0.5 * d) * (0.25 * nf).powf(-0.5 * d) * sum;
        return Ok(AsymptoticPrediction {
            form: LeadingForm::PowerLog,
            constant: c * model.torus.iter().skip(1).product::<f64>(),
            p: 0.5 * nf + 0.25 * nf * bmax,
            q: -0.5 * d,
            regime: Regime::Supercritical,
        });
    }
    if bmax < bc {
        return Ok(AsymptoticPrediction {
            form: LeadingForm::PowerLog,
            constant: g1 * full_volume(profile, model)?,
            p: p_crit,
            q: 0.0,
            regime: Regime::Subcritical,
        });
    }
    let transverse: f64 = model.torus.iter().skip(1).product();
    Ok(match data.codimension {
        1 => AsymptoticPrediction {
            form: LeadingForm::PowerLog,
            constant: g1 * 2.0 * (2.0 * PI / nf).sqrt() * sum * transverse,
            p: p_crit,
            q: 0.5,
            regime: Regime::CriticalD1,
        },
        2 => AsymptoticPrediction {
            form: LeadingForm::PowerLogLog,
            constant: g1 * 4.0 * PI / nf * sum * transverse,
            p: p_crit,
            q: 0.0,
            regime: Regime::CriticalD2,
        },
        _ => AsymptoticPrediction {
            form: LeadingForm::PowerLog,
            constant: g1 * full_volume(profile, model)?,
            p: p_crit,
            q: 0.0,
            regime: Regime::CriticalDgt2,
        },
    })
}

/// [`corollary_prediction_from`] with `A(beta_max, n)` from solver spectra.
pub fn corollary_prediction(
    profile: &ExponentProfile,
    model: &ModelConfig,
) -> Result<AsymptoticPrediction> {
    corollary_prediction_from(profile, model, None, |b| {
        Ok(weyl_coefficient_with_cutoff(b, model.n, DEFAULT_CUTOFF)?.value)
    })
}
