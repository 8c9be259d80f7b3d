//! One-dimensional model operators `P_mu = -d^2/dx^2 + C(n, beta) x^{-2} + mu x^beta`.
//!
//! Piecewise-linear Galerkin on a mesh graded toward the left end, eigenvalue
//! counting by Sturm sequences, localization by bisection and Romberg
//! extrapolation over uniformly halved meshes.

use serde::{Deserialize, Serialize};

use crate::constants::{frobenius_index, inverse_square_coeff};
use crate::error::{invalid, Result, WeylError};
use crate::quadrature::adaptive_simpson;
use crate::slicing::{bisect_all, jittered, romberg, ShiftCount, PIVOT_FLOOR};

/// Condition at the left end `x = a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeftBc {
    DirichletAtA,
    /// Neumann condition at `a > 0` (or at `0` when `C = 0`).
    NeumannAtA,
    /// The Friedrichs realization at `x = 0`; requires `a = 0`.
    FriedrichsLimit,
}

/// Condition at the right end `x = L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RightBc {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialOperatorSpec {
    pub beta: f64,
    pub n: usize,
    pub mu: f64,
    pub a: f64,
    pub l: f64,
    pub left_bc: LeftBc,
    pub right_bc: RightBc,
    inverse_square: f64,
}

impl RadialOperatorSpec {
    pub fn new(
        beta: f64,
        n: usize,
        mu: f64,
        (a, l): (f64, f64),
        left_bc: LeftBc,
        right_bc: RightBc,
    ) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(invalid("beta", "must be finite and >= 0"));
        }
        if n == 0 {
            return Err(invalid("n", "must be >= 1"));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(invalid("mu", "must be finite and >= 0"));
        }
        if !(a >= 0.0 && a < l && l.is_finite()) {
            return Err(invalid(
                "interval",
                format!("need 0 <= a < L < inf, got ({a}, {l})"),
            ));
        }
        let c = inverse_square_coeff(n, beta);
        match left_bc {
            LeftBc::DirichletAtA if a == 0.0 && c > 0.0 => {
                return Err(invalid("a", "dirichlet_at_a needs a > 0"));
            }
            LeftBc::NeumannAtA if a == 0.0 && c > 0.0 => {
                return Err(invalid("a", "neumann_at_a needs a > 0 unless C = 0"));
            }
            LeftBc::FriedrichsLimit if a != 0.0 => {
                return Err(invalid("a", "friedrichs_limit is taken at a = 0"));
            }
            _ => {}
        }
        Ok(Self {
            beta,
            n,
            mu,
            a,
            l,
            left_bc,
            right_bc,
            inverse_square: c,
        })
    }

    /// `P_1` on `(0, L)` with the Friedrichs condition at the origin.
    pub fn model(beta: f64, n: usize, mu: f64, l: f64, right_bc: RightBc) -> Result<Self> {
        Self::new(beta, n, mu, (0.0, l), LeftBc::FriedrichsLimit, right_bc)
    }

    pub fn inverse_square(&self) -> f64 {
        self.inverse_square
    }

    pub fn potential(&self, x: f64) -> f64 {
        let mut v = 0.0;
        if self.inverse_square > 0.0 {
            v += self.inverse_square / (x * x);
        }
        if self.mu > 0.0 {
            v += self.mu * x.powf(self.beta);
        }
        v
    }

    /// Same operator on a different interval and boundary conditions.
    pub fn with_interval(&self, a: f64, l: f64, left_bc: LeftBc) -> Result<Self> {
        Self::new(self.beta, self.n, self.mu, (a, l), left_bc, self.right_bc)
    }

    /// Left end actually used by the discretization.
    ///
    /// The Friedrichs realization is modeled by a Dirichlet condition at a
    /// point so close to the origin that the induced shift of the lowest
    /// eigenvalues below `lambda_max` is below `1e-14` relative.
    pub fn effective_left(&self, lambda_max: f64) -> f64 {
        match self.left_bc {
            LeftBc::FriedrichsLimit if self.inverse_square > 0.0 => {
                let ell = frobenius_index(self.n, self.beta);
                let scale = lambda_max.max(1.0).sqrt();
                (1e-14f64.powf(1.0 / (2.0 * ell + 1.0)) / scale).min(0.25 * self.l)
            }
            LeftBc::FriedrichsLimit => 0.0,
            _ => self.a,
        }
    }
}

/// Length `L` with `mu L^beta = 10 lambda_max`, beyond which eigenfunctions
/// below `lambda_max` are exponentially small.
pub fn surrogate_length(beta: f64, mu: f64, lambda_max: f64) -> Result<f64> {
    if !(beta > 0.0 && mu > 0.0) {
        return Err(invalid(
            "mu",
            "a confining potential needs beta > 0 and mu > 0",
        ));
    }
    Ok((10.0 * lambda_max.max(1.0) / mu).powf(1.0 / beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    Uniform,
    Geometric { ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    nodes: Vec<f64>,
    grading: Grading,
}

impl Grid1D {
    pub fn uniform(a: f64, l: f64, elements: usize) -> Result<Self> {
        if !(a < l) || elements == 0 {
            return Err(invalid("grid", "need a < L and at least one element"));
        }
        let h = (l - a) / elements as f64;
        let mut nodes: Vec<f64> = (0..=elements).map(|i| a + h * i as f64).collect();
        nodes[elements] = l;
        Ok(Self {
            nodes,
            grading: Grading::Uniform,
        })
    }

    /// Elements grow from `h0` at `a` by `ratio` until they reach `h_max`,
    /// then stay uniform up to `L`.
    pub fn geometric(a: f64, l: f64, h0: f64, ratio: f64, h_max: f64) -> Result<Self> {
        if !(ratio > 1.0 && ratio <= 1.2) {
            return Err(invalid("ratio", format!("{ratio} is outside (1, 1.2]")));
        }
        if !(a < l && h0 > 0.0 && h_max >= h0) {
            return Err(invalid("grid", "need a < L and 0 < h0 <= h_max"));
        }
        let mut nodes = vec![a];
        let mut x = a;
        let mut h = h0;
        while h < h_max && x + h < l {
            x += h;
            nodes.push(x);
            h *= ratio;
        }
        let rest = l - x;
        let m = (rest / h_max).ceil().max(1.0) as usize;
        let hu = rest / m as f64;
        if hu < 0.5 * nodes.windows(2).last().map_or(hu, |w| w[1] - w[0]) && nodes.len() > 1 {
            nodes.pop();
            x = *nodes.last().unwrap();
            let rest = l - x;
            let m = (rest / h_max).ceil().max(1.0) as usize;
            let hu = rest / m as f64;
            nodes.extend((1..=m).map(|i| x + hu * i as f64));
        } else {
            nodes.extend((1..=m).map(|i| x + hu * i as f64));
        }
        *nodes.last_mut().unwrap() = l;
        Ok(Self {
            nodes,
            grading: Grading::Geometric { ratio },
        })
    }

    pub fn from_nodes(nodes: Vec<f64>, grading: Grading) -> Result<Self> {
        if nodes.len() < 2 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid(
                "nodes",
                "must be strictly increasing with >= 2 entries",
            ));
        }
        if let Grading::Geometric { ratio } = grading {
            if !(ratio > 1.0 && ratio <= 1.2) {
                return Err(invalid("ratio", format!("{ratio} is outside (1, 1.2]")));
            }
        }
        Ok(Self { nodes, grading })
    }

    /// Splits every element in two.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(*self.nodes.last().unwrap());
        Self {
            nodes,
            grading: self.grading,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn max_step(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// Symmetric tridiagonal pencil `(K, M)` on the free nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagPencil {
    pub k_diag: Vec<f64>,
    pub k_off: Vec<f64>,
    pub m_diag: Vec<f64>,
    pub m_off: Vec<f64>,
}

impl TridiagPencil {
    pub fn dim(&self) -> usize {
        self.k_diag.len()
    }
}

/// Galerkin pencil of the quadratic form of `P_mu` on `grid`.
///
/// The left end of the grid is where the left condition is imposed; for
/// the Friedrichs limit the grid should start at
/// [`RadialOperatorSpec::effective_left`]. The potential is sampled at
/// element midpoints and integrated against the consistent mass.
pub fn assemble_pencil(spec: &RadialOperatorSpec, grid: &Grid1D) -> Result<TridiagPencil> {
    let x = grid.nodes();
    let ne = x.len() - 1;
    let first = usize::from(spec.left_bc != LeftBc::NeumannAtA);
    let last = if spec.right_bc == RightBc::Dirichlet {
        ne - 1
    } else {
        ne
    };
    let interior = ne.saturating_sub(1);
    if interior < 8 {
        return Err(WeylError::GridTooCoarse {
            interior,
            required: 8,
        });
    }
    if spec.left_bc == LeftBc::NeumannAtA && x[0] == 0.0 && spec.inverse_square > 0.0 {
        return Err(invalid("grid", "Neumann node at the origin with C > 0"));
    }
    let dim = last + 1 - first;
    let mut k_diag = vec![0.0; dim];
    let mut k_off = vec![0.0; dim.saturating_sub(1)];
    let mut m_diag = vec![0.0; dim];
    let mut m_off = vec![0.0; dim.saturating_sub(1)];
    for e in 0..ne {
        let h = x[e + 1] - x[e];
        let v = spec.potential(0.5 * (x[e] + x[e + 1]));
        let kd = 1.0 / h + v * h / 3.0;
        let ko = -1.0 / h + v * h / 6.0;
        let md = h / 3.0;
        let mo = h / 6.0;
        let free_l = e >= first && e <= last;
        let free_r = e + 1 >= first && e < last;
        if free_l {
            k_diag[e - first] += kd;
            m_diag[e - first] += md;
        }
        if free_r {
            k_diag[e + 1 - first] += kd;
            m_diag[e + 1 - first] += md;
        }
        if free_l && free_r {
            k_off[e - first] += ko;
            m_off[e - first] += mo;
        }
    }
    Ok(TridiagPencil {
        k_diag,
        k_off,
        m_diag,
        m_off,
    })
}

fn negative_pivots(p: &TridiagPencil, lambda: f64) -> Option<usize> {
    let mut count = 0;
    let mut d = p.k_diag[0] - lambda * p.m_diag[0];
    for i in 0..p.dim() {
        if i > 0 {
            let e = p.k_off[i - 1] - lambda * p.m_off[i - 1];
            d = p.k_diag[i] - lambda * p.m_diag[i] - e * e / d;
        }
        if d.abs() < PIVOT_FLOOR || d.is_nan() {
            return None;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    Some(count)
}

/// Number of generalized eigenvalues below `lambda` (Sylvester inertia of
/// `K - lambda M` through the tridiagonal pivot recursion).
pub fn sturm_count(pencil: &TridiagPencil, lambda: f64) -> ShiftCount {
    if let Some(count) = negative_pivots(pencil, lambda) {
        return ShiftCount {
            count,
            shift: lambda,
            perturbed: false,
        };
    }
    let mut shift = lambda;
    loop {
        shift = jittered(shift);
        if let Some(count) = negative_pivots(pencil, shift) {
            return ShiftCount {
                count,
                shift,
                perturbed: true,
            };
        }
    }
}

/// Mesh and extrapolation controls for [`eigenvalues_below`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Coarse-level `h * sqrt(lambda_max)` in the uniform part.
    pub theta: f64,
    pub ratio: f64,
    /// First element as a fraction of the distance of `a` from the origin.
    pub near_fraction: f64,
    pub levels: usize,
    /// Relative overshoot of the level-wise solves past `lambda_max`.
    pub slack: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            theta: 0.5,
            ratio: 1.05,
            near_fraction: 0.05,
            levels: 3,
            slack: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub nodes: usize,
    pub max_step: f64,
    pub count_at_max: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub spec: RadialOperatorSpec,
    pub lambda_max: f64,
    pub effective_left: f64,
    pub levels: Vec<LevelRecord>,
    /// Order of the leading error term removed by each Romberg column.
    pub richardson_order: usize,
    pub perturbed: bool,
}

/// Coarsest grid used by [`eigenvalues_below`] for `spec` at `lambda_max`.
pub fn base_grid(
    spec: &RadialOperatorSpec,
    lambda_max: f64,
    opts: &SolverOptions,
) -> Result<Grid1D> {
    let left = spec.effective_left(lambda_max);
    let span = spec.l - left;
    let h_max = (opts.theta / lambda_max.max(1e-12).sqrt()).min(span / 16.0);
    if left > 0.0 {
        let h0 = (opts.near_fraction * left).min(h_max);
        Grid1D::geometric(left, spec.l, h0, opts.ratio, h_max)
    } else {
        Grid1D::uniform(0.0, spec.l, (span / h_max).ceil() as usize)
    }
}

/// Eigenvalues below `lambda_max`, each localized to relative width `tol`
/// on every level and Romberg-extrapolated in `h^2`.
pub fn eigenvalues_below(spec: &RadialOperatorSpec, lambda_max: f64, tol: f64) -> Result<Spectrum> {
    eigenvalues_below_with(spec, lambda_max, tol, &SolverOptions::default())
}

pub fn eigenvalues_below_with(
    spec: &RadialOperatorSpec,
    lambda_max: f64,
    tol: f64,
    opts: &SolverOptions,
) -> Result<Spectrum> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(invalid("lambda_max", "must be positive and finite"));
    }
    if opts.levels == 0 {
        return Err(invalid("levels", "need at least one mesh level"));
    }
    let upper = lambda_max * (1.0 + opts.slack);
    let mut grid = base_grid(spec, upper, opts)?;
    let mut levels = Vec::with_capacity(opts.levels);
    let mut perturbed = false;
    for level in 0..opts.levels {
        if level > 0 {
            grid = grid.refined();
        }
        let pencil = assemble_pencil(spec, &grid)?;
        let (eigs, flag) = bisect_all(|x| sturm_count(&pencil, x), 0.0, upper, tol);
        let at_max = sturm_count(&pencil, lambda_max);
        perturbed |= flag | at_max.perturbed;
        levels.push(LevelRecord {
            nodes: grid.nodes().len(),
            max_step: grid.max_step(),
            count_at_max: at_max.count,
            eigenvalues: eigs,
        });
    }
    let common = levels
        .iter()
        .map(|l| l.eigenvalues.len())
        .min()
        .unwrap_or(0);
    let mut eigenvalues: Vec<f64> = (0..common)
        .map(|k| romberg(&levels.iter().map(|l| l.eigenvalues[k]).collect::<Vec<_>>()))
        .filter(|&e| e < lambda_max)
        .collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(Spectrum {
        eigenvalues,
        spec: spec.clone(),
        lambda_max,
        effective_left: spec.effective_left(upper),
        levels,
        richardson_order: 2,
        perturbed,
    })
}

/// Upper bound on `nu_k` from the coarse mesh, found by doubling.
fn bracket_index(spec: &RadialOperatorSpec, k: usize, opts: &SolverOptions) -> Result<f64> {
    let mut lam = 4.0f64.max(spec.potential(0.5 * (spec.a + spec.l)));
    for _ in 0..200 {
        let grid = base_grid(spec, lam, opts)?;
        let pencil = assemble_pencil(spec, &grid)?;
        if sturm_count(&pencil, lam).count >= k {
            return Ok(lam);
        }
        lam *= 2.0;
    }
    Err(invalid("k", "eigenvalue index out of reach"))
}

/// The `k`-th eigenvalue (1-based).
pub fn eigenvalue(spec: &RadialOperatorSpec, k: usize, tol: f64) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k", "indices start at 1"));
    }
    let opts = SolverOptions::default();
    let mut lam = bracket_index(spec, k, &opts)? * 1.05;
    loop {
        let s = eigenvalues_below_with(spec, lam, tol, &opts)?;
        if s.eigenvalues.len() >= k {
            return Ok(s.eigenvalues[k - 1]);
        }
        lam *= 1.5;
    }
}

/// Bohr-Sommerfeld estimate `nu_k ~ (pi k / I_beta)^{2 beta / (beta + 2)}`
/// with `I_beta = int_0^1 sqrt(1 - u^beta) du`.
pub fn bohr_sommerfeld_estimate(beta: f64, k: usize) -> f64 {
    let p = 2.0 * beta / (beta + 2.0);
    (std::f64::consts::PI * k as f64 / neumann_profile_integral(beta)).powf(p)
}

/// The lowest `count` eigenvalues of `P_1` on the half-line, Friedrichs at
/// the origin and the confining surrogate length on the right.
pub fn model_spectrum(beta: f64, n: usize, count: usize) -> Result<Spectrum> {
    if !(beta > 0.0) {
        return Err(invalid("beta", "the half-line model needs beta > 0"));
    }
    if count == 0 {
        return Err(invalid("count", "must be positive"));
    }
    let mut lam = 1.15 * bohr_sommerfeld_estimate(beta, count + 2) + 5.0;
    loop {
        let l = surrogate_length(beta, 1.0, lam)?;
        let spec = RadialOperatorSpec::model(beta, n, 1.0, l, RightBc::Dirichlet)?;
        let s = eigenvalues_below(&spec, lam, 1e-13)?;
        if s.eigenvalues.len() >= count {
            return Ok(s);
        }
        lam *= 1.25;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedrichsRecord {
    pub limit: f64,
    pub a_values: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub extrapolants: Vec<f64>,
}

/// `a -> 0` limit of the `k`-th Dirichlet-at-`a` eigenvalue along
/// `a_i = a0 2^{-i}`.
///
/// Aitken extrapolants are accepted once three successive ones agree to
/// `tol` relative. The raw sequence must decrease as `a` decreases.
pub fn friedrichs_extrapolate(
    spec: &RadialOperatorSpec,
    k: usize,
    tol: f64,
) -> Result<FriedrichsRecord> {
    if spec.left_bc != LeftBc::DirichletAtA {
        return Err(invalid(
            "left_bc",
            "friedrichs_extrapolate starts from dirichlet_at_a",
        ));
    }
    if spec.inverse_square <= 0.0 && spec.beta > 0.0 {
        return Err(invalid(
            "beta",
            "the limit-point regime needs C(n, beta) > 0",
        ));
    }
    const MAX_STEPS: usize = 40;
    let solve_tol = (tol * 1e-4).max(1e-14);
    let mut rec = FriedrichsRecord {
        limit: f64::NAN,
        a_values: Vec::new(),
        eigenvalues: Vec::new(),
        extrapolants: Vec::new(),
    };
    let mut a = spec.a;
    for _ in 0..MAX_STEPS {
        let s = spec.with_interval(a, spec.l, LeftBc::DirichletAtA)?;
        let v = eigenvalue(&s, k, solve_tol)?;
        if let Some(&prev) = rec.eigenvalues.last() {
            if v > prev * (1.0 + 1e-9) {
                return Err(WeylError::NonMonotone {
                    a,
                    previous: prev,
                    current: v,
                });
            }
        }
        rec.a_values.push(a);
        rec.eigenvalues.push(v);
        let m = rec.eigenvalues.len();
        if m >= 3 {
            let (x0, x1, x2) = (
                rec.eigenvalues[m - 3],
                rec.eigenvalues[m - 2],
                rec.eigenvalues[m - 1],
            );
            let denom = x2 - 2.0 * x1 + x0;
            let aitken = if denom.abs() > 1e-300 && (x2 - x1).abs() > 1e-15 * x2.abs() {
                x2 - (x2 - x1).powi(2) / denom
            } else {
                x2
            };
            rec.extrapolants.push(aitken);
        }
        let q = rec.extrapolants.len();
        if q >= 3 {
            let w = &rec.extrapolants[q - 3..];
            let scale = w[2].abs().max(1e-300);
            if (w[2] - w[1]).abs() <= tol * scale && (w[1] - w[0]).abs() <= tol * scale {
                rec.limit = w[2];
                return Ok(rec);
            }
        }
        a *= 0.5;
    }
    let q = rec.extrapolants.len();
    Err(WeylError::NotConverged {
        steps: MAX_STEPS,
        last_change: (rec.extrapolants[q - 1] - rec.extrapolants[q - 2]).abs(),
    })
}

/// Lowest eigenvalue of `-d^2 + C/x^2` on `(0, c lambda^{-1/2})`, Friedrichs at
/// the origin, divided by `lambda`.
///
/// `mu = 0` is the smallest tangential eigenvalue, so this bounds every
/// sector of the strip from below.
pub fn hardy_floor_ratio(
    beta: f64,
    n: usize,
    c: f64,
    lambda: f64,
    right_bc: RightBc,
) -> Result<f64> {
    if !(c > 0.0 && c < std::f64::consts::FRAC_PI_2) {
        return Err(invalid("c", "must lie in (0, pi/2)"));
    }
    if !(lambda > 0.0) {
        return Err(invalid("lambda", "must be positive"));
    }
    let width = c / lambda.sqrt();
    let spec = RadialOperatorSpec::model(beta, n, 0.0, width, right_bc)?;
    Ok(eigenvalue(&spec, 1, 1e-13)? / lambda)
}

/// `int_0^1 sqrt(1 - u^beta) du`.
pub fn neumann_profile_integral(beta: f64) -> f64 {
    adaptive_simpson(
        |u: f64| (1.0 - u.powf(beta)).max(0.0).sqrt(),
        0.0,
        1.0,
        1e-12,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannBoundReport {
    pub holds: bool,
    pub count: usize,
    pub count_bound: f64,
    pub constant: f64,
    pub eigen_constant: f64,
    pub violating_index: Option<usize>,
}

/// Checks the interval-uniform Neumann Weyl bound for `P_1` on `(a, L)`.
///
/// The constant follows unit-interval Neumann bracketing:
/// `N(E) <= E^{1/beta} + 1 + (sqrt(E) + E^{1/beta + 1/2} I_beta) / pi`, which
/// is at most `C E^q` with `C = 2 + (1 + I_beta)/pi` for `E >= 1`, where
/// `q = (beta + 2)/(2 beta)`. The eigenvalue form uses
/// `C_eig = C^{1/q} max(1, 1/nu_1)`.
pub fn uniform_neumann_bound_check(
    beta: f64,
    n: usize,
    (a, l): (f64, f64),
    energy: f64,
) -> Result<NeumannBoundReport> {
    if !(beta > 2.0 / n as f64) {
        return Err(invalid(
            "beta",
            format!("need beta > 2/n = {}", 2.0 / n as f64),
        ));
    }
    if !(energy >= 1.0) {
        return Err(invalid("energy", "the bound is stated for E >= 1"));
    }
    let left = if a == 0.0 {
        LeftBc::FriedrichsLimit
    } else {
        LeftBc::NeumannAtA
    };
    let spec = RadialOperatorSpec::new(beta, n, 1.0, (a, l), left, RightBc::Neumann)?;
    let spectrum = eigenvalues_below(&spec, energy, 1e-12)?;
    let q = (beta + 2.0) / (2.0 * beta);
    let constant = 2.0 + (1.0 + neumann_profile_integral(beta)) / std::f64::consts::PI;
    let count_bound = constant * energy.powf(q);
    let count = spectrum.eigenvalues.len();
    let nu1 = spectrum.eigenvalues.first().copied().unwrap_or(energy);
    let eigen_constant = constant.powf(1.0 / q) * (1.0f64).max(1.0 / nu1);
    let violating_index = spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .find(|(i, &nu)| nu < ((i + 1) as f64).powf(1.0 / q) / eigen_constant)
        .map(|(i, _)| i + 1);
    let holds = (count as f64) <= count_bound && violating_index.is_none();
    Ok(NeumannBoundReport {
        holds,
        count,
        count_bound,
        constant,
        eigen_constant,
        violating_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplacian(right: RightBc) -> RadialOperatorSpec {
        RadialOperatorSpec::new(0.0, 1, 0.0, (0.0, 1.0), LeftBc::DirichletAtA, right).unwrap()
    }

    #[test]
    fn dirichlet_laplacian_sturm_counts() {
        let spec = laplacian(RightBc::Dirichlet);
        let grid = Grid1D::uniform(0.0, 1.0, 999).unwrap();
        let p = assemble_pencil(&spec, &grid).unwrap();
        assert_eq!(sturm_count(&p, 50.0).count, 2);
        assert_eq!(sturm_count(&p, 1000.0).count, 10);
        assert_eq!(sturm_count(&p, -1.0).count, 0);
        let (eigs, _) = bisect_all(|x| sturm_count(&p, x), 0.0, 20.0, 1e-14);
        assert!(((eigs[0] - PI * PI) / (PI * PI)).abs() < 1e-4);
    }

    #[test]
    fn quarter_wave_and_mass_rows() {
        let spec = laplacian(RightBc::Neumann);
        let grid = Grid1D::uniform(0.0, 1.0, 999).unwrap();
        let p = assemble_pencil(&spec, &grid).unwrap();
        let (eigs, _) = bisect_all(|x| sturm_count(&p, x), 0.0, 5.0, 1e-14);
        assert!(((eigs[0] - PI * PI / 4.0) / (PI * PI / 4.0)).abs() < 1e-4);

        let free = RadialOperatorSpec::new(
            0.0,
            1,
            0.0,
            (0.0, 1.0),
            LeftBc::NeumannAtA,
            RightBc::Neumann,
        )
        .unwrap();
        let g = Grid1D::geometric(0.0, 1.0, 0.001, 1.1, 0.05).unwrap();
        let p = assemble_pencil(&free, &g).unwrap();
        let x = g.nodes();
        for i in 0..p.dim() {
            let mut row = p.m_diag[i];
            if i > 0 {
                row += p.m_off[i - 1];
            }
            if i + 1 < p.dim() {
                row += p.m_off[i];
            }
            let left = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
            let right = if i + 1 < x.len() {
                x[i + 1] - x[i]
            } else {
                0.0
            };
            assert!((row - 0.5 * (left + right)).abs() < 1e-15);
        }
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let spec = laplacian(RightBc::Dirichlet);
        let grid = Grid1D::uniform(0.0, 1.0, 8).unwrap();
        assert!(matches!(
            assemble_pencil(&spec, &grid),
            Err(WeylError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn geometric_grid_shape() {
        let g = Grid1D::geometric(1e-3, 5.0, 5e-5, 1.05, 0.02).unwrap();
        let x = g.nodes();
        assert_eq!(x[0], 1e-3);
        assert_eq!(*x.last().unwrap(), 5.0);
        assert!(x.windows(2).all(|w| w[1] > w[0]));
        assert!(g.max_step() <= 0.02 * (1.0 + 1e-12));
        assert!(Grid1D::geometric(0.0, 1.0, 0.01, 1.3, 0.1).is_err());
        let r = g.refined();
        assert_eq!(r.elements(), 2 * g.elements());
    }

    #[test]
    fn oscillator_ground_state() {
        let spec = RadialOperatorSpec::model(2.0, 1, 1.0, 12.0, RightBc::Dirichlet).unwrap();
        let s = eigenvalues_below(&spec, 13.0, 1e-13).unwrap();
        let expect = [4.0, 8.0, 12.0];
        assert_eq!(s.eigenvalues.len(), 3);
        for (e, x) in s.eigenvalues.iter().zip(expect) {
            assert!(((e - x) / x).abs() < 1e-8, "{e} vs {x}");
        }
    }

    #[test]
    fn shifted_interval_friedrichs_sequence() {
        let spec = RadialOperatorSpec::new(
            0.0,
            1,
            0.0,
            (0.1, 1.0),
            LeftBc::DirichletAtA,
            RightBc::Dirichlet,
        )
        .unwrap();
        let rec = friedrichs_extrapolate(&spec, 1, 1e-7).unwrap();
        for (a, v) in rec.a_values.iter().zip(&rec.eigenvalues) {
            let exact = PI * PI / (1.0 - a).powi(2);
            assert!(((v - exact) / exact).abs() < 1e-9);
        }
        assert!(((rec.limit - PI * PI) / (PI * PI)).abs() < 1e-7);
    }

    #[test]
    fn neumann_precondition() {
        assert!(uniform_neumann_bound_check(2.0, 1, (0.0, 20.0), 100.0).is_err());
        assert!((neumann_profile_integral(2.0) - PI / 4.0).abs() < 1e-10);
    }
}
