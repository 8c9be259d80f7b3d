//! Experiment configuration: one strict JSON document per experiment.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use weylab_core::constants::{critical_beta, ExponentProfile, ModelConfig};
use weylab_core::direct2d::{AdaptiveMesh, Bc2D, MeshLadder};
use weylab_core::radial1d::RightBc;

use crate::error::{HarnessError, Result};
use crate::fit::FitModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Radial,
    Zeta,
    Pole,
    Cone,
    Collar,
    Direct2d,
    Volume,
    Corollary,
    Geodesic,
    Report,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Radial,
        Kind::Zeta,
        Kind::Pole,
        Kind::Cone,
        Kind::Collar,
        Kind::Direct2d,
        Kind::Volume,
        Kind::Corollary,
        Kind::Geodesic,
        Kind::Report,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Radial => "radial",
            Kind::Zeta => "zeta",
            Kind::Pole => "pole",
            Kind::Cone => "cone",
            Kind::Collar => "collar",
            Kind::Direct2d => "direct2d",
            Kind::Volume => "volume",
            Kind::Corollary => "corollary",
            Kind::Geodesic => "geodesic",
            Kind::Report => "report",
        }
    }

    fn needs_schedule(&self) -> bool {
        matches!(
            self,
            Kind::Cone | Kind::Collar | Kind::Direct2d | Kind::Volume | Kind::Corollary
        )
    }

    fn needs_betas(&self) -> bool {
        matches!(
            self,
            Kind::Radial | Kind::Zeta | Kind::Pole | Kind::Geodesic
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Geometric,
    Linear,
}

/// Lambda samples `min..=max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    #[serde(default)]
    pub spacing: Spacing,
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

impl Schedule {
    pub fn samples(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.max];
        }
        let m = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / m;
                if i + 1 == self.count {
                    self.max
                } else {
                    match self.spacing {
                        Spacing::Geometric => self.min * (self.max / self.min).powf(t),
                        Spacing::Linear => self.min + (self.max - self.min) * t,
                    }
                }
            })
            .collect()
    }

    fn violations(&self, out: &mut Vec<String>) {
        if self.count == 0 {
            out.push("schedule.count: must be at least 1".into());
        }
        if !(self.min > 0.0 && self.min.is_finite()) {
            out.push(format!(
                "schedule.min: must be positive and finite, got {}",
                self.min
            ));
        }
        if !self.max.is_finite() {
            out.push(format!("schedule.max: must be finite, got {}", self.max));
        } else if self.count > 1 && !(self.max > self.min) {
            out.push(format!(
                "schedule.max: must exceed schedule.min ({} <= {})",
                self.max, self.min
            ));
        } else if self.count == 1 && !(self.max >= self.min) {
            out.push(format!(
                "schedule.max: must be >= schedule.min ({} < {})",
                self.max, self.min
            ));
        }
    }
}

/// Condition at the outer end `x = b` of the collar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Dirichlet,
    Neumann,
}

impl Boundary {
    pub fn radial(self) -> RightBc {
        match self {
            Boundary::Dirichlet => RightBc::Dirichlet,
            Boundary::Neumann => RightBc::Neumann,
        }
    }

    pub fn direct(self) -> Bc2D {
        match self {
            Boundary::Dirichlet => Bc2D::Dirichlet,
            Boundary::Neumann => Bc2D::Neumann,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub model: FitModel,
    /// `[lambda_lo, lambda_hi]`; the whole schedule when absent.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CachePolicy {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

impl Default for CachePolicy {
    fn default() -> Self {
        Self {
            enabled: true,
            dir: None,
        }
    }
}

fn yes() -> bool {
    true
}

/// Checks run by the `report` kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportCheck {
    RadialOracle,
    ZetaExactness,
    BoundaryDistance,
    Laplace,
    HardyFloor,
}

impl ReportCheck {
    pub const ALL: [ReportCheck; 5] = [
        ReportCheck::RadialOracle,
        ReportCheck::ZetaExactness,
        ReportCheck::BoundaryDistance,
        ReportCheck::Laplace,
        ReportCheck::HardyFloor,
    ];
}

fn default_model() -> ModelConfig {
    ModelConfig::circle(1.0, 2.0 * PI)
}

fn default_cutoff() -> usize {
    weylab_core::zeta::DEFAULT_CUTOFF
}

fn default_mu() -> f64 {
    1.0
}

fn default_truncation() -> f64 {
    0.1
}

fn default_mesh() -> MeshLadder {
    MeshLadder::Adaptive(AdaptiveMesh::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default = "default_model")]
    pub model: ModelConfig,
    #[serde(default)]
    pub profile: Option<ExponentProfile>,
    #[serde(default)]
    pub schedule: Option<Schedule>,
    /// Exponent list for `radial`, `zeta`, `pole` and `geodesic`.
    #[serde(default)]
    pub betas: Vec<f64>,
    /// Tangential eigenvalue for `radial`.
    #[serde(default = "default_mu")]
    pub mu: f64,
    /// Number of radial eigenvalues in spectral sums.
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default)]
    pub right_bc: Boundary,
    /// Wavelength truncation `x_min = c lambda^{-1/2}`. Collars default to
    /// none; direct counting always truncates and defaults to `0.1`.
    #[serde(default)]
    pub truncation: Option<f64>,
    #[serde(default = "default_mesh")]
    pub mesh: MeshLadder,
    /// Lower exponent cut of the variable-exponent Weyl integral.
    #[serde(default)]
    pub beta_bar: Option<f64>,
    #[serde(default)]
    pub fit: Option<FitSpec>,
    #[serde(default)]
    pub checks: Option<Vec<ReportCheck>>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub cache: CachePolicy,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| HarnessError::Validation(vec![format!("config: {e}")]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Validation(vec![format!("config: cannot read {}: {e}", path.display())])
        })?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn samples(&self) -> Vec<f64> {
        self.schedule
            .as_ref()
            .map(Schedule::samples)
            .unwrap_or_default()
    }

    pub fn direct_truncation(&self) -> f64 {
        self.truncation.unwrap_or_else(default_truncation)
    }

    /// Every violated precondition, or `Ok`.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if let Err(e) = self.model.validate() {
            v.push(format!("model: {e}"));
        }
        let n = self.model.n;
        let bc = critical_beta(n.max(1));
        if self.kind.needs_schedule() {
            match &self.schedule {
                None => v.push(format!(
                    "schedule: required for kind {}",
                    self.kind.as_str()
                )),
                Some(s) => s.violations(&mut v),
            }
        }
        if self.kind.needs_betas() && self.betas.is_empty() {
            v.push(format!("betas: required for kind {}", self.kind.as_str()));
        }
        for (i, &b) in self.betas.iter().enumerate() {
            if !(b.is_finite() && b >= 0.0) {
                v.push(format!("betas[{i}]: must be finite and >= 0, got {b}"));
            }
        }
        match self.kind {
            Kind::Zeta | Kind::Pole => {
                for (i, &b) in self.betas.iter().enumerate() {
                    if !(b > bc) {
                        v.push(format!("betas[{i}]: must exceed beta_c = {bc}, got {b}"));
                    }
                }
                if self.kind == Kind::Pole && self.betas.len() < 2 {
                    v.push("betas: the pole probe needs at least two exponents".into());
                }
            }
            Kind::Geodesic => {
                for (i, &b) in self.betas.iter().enumerate() {
                    if !(b > 0.0) {
                        v.push(format!("betas[{i}]: must be positive, got {b}"));
                    }
                }
            }
            Kind::Radial => {
                if !(self.mu >= 0.0 && self.mu.is_finite()) {
                    v.push(format!("mu: must be finite and >= 0, got {}", self.mu));
                }
            }
            _ => {}
        }
        if matches!(self.kind, Kind::Radial | Kind::Zeta | Kind::Pole) && self.cutoff < 12 {
            v.push(format!("cutoff: must be at least 12, got {}", self.cutoff));
        }
        let needs_profile = matches!(
            self.kind,
            Kind::Cone | Kind::Collar | Kind::Direct2d | Kind::Volume | Kind::Corollary
        );
        match (&self.profile, needs_profile) {
            (None, true) => v.push(format!("profile: required for kind {}", self.kind.as_str())),
            (Some(p), true) => {
                if matches!(self.kind, Kind::Cone | Kind::Collar) && !p.is_constant() {
                    v.push("profile: separated models need a constant exponent".into());
                }
                if self.kind == Kind::Cone && !(p.beta_max() > bc) {
                    v.push(format!("profile: the cone needs beta > beta_c = {bc}"));
                }
                if matches!(self.kind, Kind::Direct2d | Kind::Corollary | Kind::Volume)
                    && (p.period() - self.model.torus.first().copied().unwrap_or(0.0)).abs()
                        > 1e-12 * p.period()
                {
                    v.push("profile.period: must equal the first torus side".into());
                }
            }
            _ => {}
        }
        if matches!(self.kind, Kind::Direct2d | Kind::Corollary) && n != 1 {
            v.push(format!("model.n: direct counting needs n = 1, got {n}"));
        }
        if let Some(c) = self.truncation {
            if !(c > 0.0 && c < 0.5 * PI) {
                v.push(format!("truncation: must lie in (0, pi/2), got {c}"));
            }
        }
        if let MeshLadder::Adaptive(m) = &self.mesh {
            if !(m.theta_x > 0.0 && m.theta_y > 0.0 && m.ratio >= 1.0 && m.first > 0.0) {
                v.push(
                    "mesh: adaptive parameters need theta_x, theta_y, first > 0 and ratio >= 1"
                        .into(),
                );
            }
        }
        if let Some(bb) = self.beta_bar {
            if !(bb > bc) {
                v.push(format!("beta_bar: must exceed beta_c = {bc}, got {bb}"));
            }
            if let Some(p) = &self.profile {
                if !(bb <= p.beta_max()) {
                    v.push(format!(
                        "beta_bar: must not exceed beta_max = {}",
                        p.beta_max()
                    ));
                }
            }
        }
        if let (Some(fit), Some(s)) = (&self.fit, &self.schedule) {
            if let Some([lo, hi]) = fit.window {
                if !(lo < hi) {
                    v.push(format!("fit.window: need lo < hi, got [{lo}, {hi}]"));
                }
                if lo < s.min * (1.0 - 1e-12) || hi > s.max * (1.0 + 1e-12) {
                    v.push(format!(
                        "fit.window: [{lo}, {hi}] leaves the schedule [{}, {}]",
                        s.min, s.max
                    ));
                }
            }
            let (lo, hi) = fit.window.map_or((s.min, s.max), |w| (w[0], w[1]));
            let inside = s.samples().iter().filter(|&&l| l >= lo && l <= hi).count();
            if inside < crate::fit::MIN_SAMPLES {
                v.push(format!(
                    "fit.window: {inside} samples inside, at least {} required",
                    crate::fit::MIN_SAMPLES
                ));
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Validation(v))
        }
    }
}
