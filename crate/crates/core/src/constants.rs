//! Semiclassical constants, exponent maps and the model configuration shared
//! by every other module.
//!
//! The model collar is `(0, b) x M` with metric `dx^2 + x^{-beta(y)} h0`,
//! where `M` is a flat torus (a circle when `n = 1`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments (Lanczos, g = 7, nine terms).
///
/// Uses the reflection formula below 1/2. Poles return `NaN`.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        if x == x.floor() {
            return f64::NAN;
        }
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Volume of the unit ball in `R^d`, via `b_d = (2 pi / d) b_{d-2}`.
pub fn ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * ball_volume(d - 2),
    }
}

/// Semiclassical Weyl constant `gamma_d = b_d / (2 pi)^d`.
pub fn gamma_weyl(d: usize) -> f64 {
    ball_volume(d) / (2.0 * PI).powi(d as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalConstants {
    pub dimension: usize,
    pub ball_volume: f64,
    pub gamma: f64,
}

impl SemiclassicalConstants {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("dimension", "must be positive"));
        }
        Ok(Self {
            dimension,
            ball_volume: ball_volume(dimension),
            gamma: gamma_weyl(dimension),
        })
    }
}

/// `beta = 2 alpha / (2 - alpha)`.
pub fn alpha_to_beta(alpha: f64) -> Result<f64> {
    if !(0.0..2.0).contains(&alpha) {
        return Err(invalid("alpha", format!("{alpha} is outside [0, 2)")));
    }
    Ok(2.0 * alpha / (2.0 - alpha))
}

/// Inverse of [`alpha_to_beta`]: `alpha = 2 beta / (2 + beta)`.
pub fn beta_to_alpha(beta: f64) -> Result<f64> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("{beta} must be finite and >= 0")));
    }
    Ok(2.0 * beta / (2.0 + beta))
}

/// Exponent of the Grushin operator `-d_x^2 - x^{2k} Delta_y` seen as a metric exponent.
pub fn grushin_alpha(k: f64) -> f64 {
    2.0 * k / (k + 1.0)
}

/// Critical exponent `beta_c = 2 / n`.
pub fn critical_beta(n: usize) -> f64 {
    2.0 / n as f64
}

/// Critical value of alpha, `2 / (n + 1)`.
pub fn critical_alpha(n: usize) -> f64 {
    2.0 / (n as f64 + 1.0)
}

/// Coefficient of the inverse-square term, `beta n (beta n + 4) / 16`.
pub fn inverse_square_coeff(n: usize, beta: f64) -> f64 {
    let bn = beta * n as f64;
    bn * (bn + 4.0) / 16.0
}

/// Hausdorff dimension `n (1 + beta / 2)` of the model collar.
pub fn hausdorff_dim(n: usize, beta: f64) -> f64 {
    n as f64 * (1.0 + beta / 2.0)
}

/// `d_H / 2 = n/2 + n beta / 4`, the supercritical growth exponent.
pub fn half_hausdorff_dim(n: usize, beta: f64) -> f64 {
    0.5 * hausdorff_dim(n, beta)
}

/// Frobenius index `l` with `l (l + 1) = C(n, beta)`: near the origin the
/// Friedrichs solution behaves like `x^{l+1}`.
pub fn frobenius_index(n: usize, beta: f64) -> f64 {
    -0.5 + (0.25 + inverse_square_coeff(n, beta)).sqrt()
}

/// Boundary dimension, collar length and flat-torus side lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub collar_length: f64,
    pub torus: Vec<f64>,
}

impl ModelConfig {
    pub fn circle(collar_length: f64, circumference: f64) -> Self {
        Self {
            n: 1,
            collar_length,
            torus: vec![circumference],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "boundary dimension must be >= 1"));
        }
        if !(self.collar_length > 0.0 && self.collar_length.is_finite()) {
            return Err(invalid("collar_length", "must be positive"));
        }
        if self.torus.len() != self.n {
            return Err(invalid(
                "torus",
                format!("expected {} side lengths, got {}", self.n, self.torus.len()),
            ));
        }
        if self.torus.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(invalid("torus", "side lengths must be positive"));
        }
        Ok(())
    }

    /// `vol_{h0}(M)`.
    pub fn boundary_volume(&self) -> f64 {
        self.torus.iter().product()
    }
}

/// Shape of the exponent profile on the boundary circle.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape {
    Constant {
        beta: f64,
    },
    /// `beta_max - amplitude * (1 - cos(2 pi (y - center) / period))`, clamped at 0.
    CosineWell {
        beta_max: f64,
        amplitude: f64,
        center: f64,
    },
    /// Values on a uniform periodic grid, linearly interpolated.
    Sampled {
        values: Vec<f64>,
    },
}

fn default_period() -> f64 {
    2.0 * PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ProfileRepr {
    Constant {
        beta: f64,
        #[serde(default = "default_period")]
        period: f64,
    },
    CosineWell {
        beta_max: f64,
        amplitude: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "default_period")]
        period: f64,
    },
    Sampled {
        values: Vec<f64>,
        #[serde(default = "default_period")]
        period: f64,
    },
}

/// The exponent `beta(y)` on a circle of circumference `period`, with cached extrema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct ExponentProfile {
    shape: ProfileShape,
    period: f64,
    beta_max: f64,
    beta_min: f64,
}

impl TryFrom<ProfileRepr> for ExponentProfile {
    type Error = crate::error::WeylError;

    fn try_from(repr: ProfileRepr) -> Result<Self> {
        match repr {
            ProfileRepr::Constant { beta, period } => {
                Self::new(ProfileShape::Constant { beta }, period)
            }
            ProfileRepr::CosineWell {
                beta_max,
                amplitude,
                center,
                period,
            } => Self::new(
                ProfileShape::CosineWell {
                    beta_max,
                    amplitude,
                    center,
                },
                period,
            ),
            ProfileRepr::Sampled { values, period } => {
                Self::new(ProfileShape::Sampled { values }, period)
            }
        }
    }
}

impl From<ExponentProfile> for ProfileRepr {
    fn from(p: ExponentProfile) -> Self {
        let period = p.period;
        match p.shape {
            ProfileShape::Constant { beta } => ProfileRepr::Constant { beta, period },
            ProfileShape::CosineWell {
                beta_max,
                amplitude,
                center,
            } => ProfileRepr::CosineWell {
                beta_max,
                amplitude,
                center,
                period,
            },
            ProfileShape::Sampled { values } => ProfileRepr::Sampled { values, period },
        }
    }
}

impl ExponentProfile {
    pub fn new(shape: ProfileShape, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(invalid("period", "must be positive"));
        }
        let (beta_max, beta_min) = match &shape {
            ProfileShape::Constant { beta } => {
                if !(*beta >= 0.0 && beta.is_finite()) {
                    return Err(invalid("beta", "must be finite and >= 0"));
                }
                (*beta, *beta)
            }
            ProfileShape::CosineWell {
                beta_max,
                amplitude,
                center,
            } => {
                if !(*beta_max >= 0.0 && beta_max.is_finite()) {
                    return Err(invalid("beta_max", "must be finite and >= 0"));
                }
                if !(*amplitude >= 0.0 && amplitude.is_finite()) || !center.is_finite() {
                    return Err(invalid("amplitude", "must be finite and >= 0"));
                }
                (*beta_max, (beta_max - 2.0 * amplitude).max(0.0))
            }
            ProfileShape::Sampled { values } => {
                if values.len() < 3 {
                    return Err(invalid("values", "need at least 3 samples"));
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(invalid("values", "samples must be finite and >= 0"));
                }
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
                (max, min)
            }
        };
        Ok(Self {
            shape,
            period,
            beta_max,
            beta_min,
        })
    }

    pub fn constant(beta: f64) -> Result<Self> {
        Self::new(ProfileShape::Constant { beta }, 2.0 * PI)
    }

    pub fn cosine_well(beta_max: f64, amplitude: f64, center: f64) -> Result<Self> {
        Self::new(
            ProfileShape::CosineWell {
                beta_max,
                amplitude,
                center,
            },
            2.0 * PI,
        )
    }

    pub fn sampled(values: Vec<f64>, period: f64) -> Result<Self> {
        Self::new(ProfileShape::Sampled { values }, period)
    }

    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_max
    }

    pub fn beta_min(&self) -> f64 {
        self.beta_min
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.shape, ProfileShape::Constant { .. }) || self.beta_max == self.beta_min
    }

    pub fn eval(&self, y: f64) -> f64 {
        match &self.shape {
            ProfileShape::Constant { beta } => *beta,
            ProfileShape::CosineWell {
                beta_max,
                amplitude,
                center,
            } => {
                let phase = 2.0 * PI * (y - center) / self.period;
                (beta_max - amplitude * (1.0 - phase.cos())).max(0.0)
            }
            ProfileShape::Sampled { values } => {
                let m = values.len();
                let t = (y / self.period).rem_euclid(1.0) * m as f64;
                let i = (t.floor() as usize).min(m - 1);
                let frac = t - i as f64;
                values[i] * (1.0 - frac) + values[(i + 1) % m] * frac
            }
        }
    }

    /// Second derivative in `y`: central differences with step `1e-4`, or
    /// at the grid scale for sampled profiles.
    pub fn second_derivative(&self, y: f64) -> f64 {
        let h = match &self.shape {
            ProfileShape::Constant { .. } => return 0.0,
            ProfileShape::CosineWell { .. } => 1e-4,
            ProfileShape::Sampled { values } => self.period / values.len() as f64,
        };
        (self.eval(y + h) - 2.0 * self.eval(y) + self.eval(y - h)) / (h * h)
    }

    /// Points of the circle where `beta` attains its maximum (within `1e-10`).
    ///
    /// Empty for constant profiles, whose maximum set is the whole circle.
    pub fn maximum_points(&self) -> Vec<f64> {
        match &self.shape {
            ProfileShape::Constant { .. } => Vec::new(),
            ProfileShape::CosineWell { center, .. } => {
                if self.beta_max == self.beta_min {
                    Vec::new()
                } else {
                    vec![center.rem_euclid(self.period)]
                }
            }
            ProfileShape::Sampled { values } => {
                let h = self.period / values.len() as f64;
                values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| self.beta_max - **v <= 1e-10)
                    .map(|(i, _)| i as f64 * h)
                    .collect()
            }
        }
    }
}
