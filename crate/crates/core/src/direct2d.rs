//! Direct finite-element counting for `g0 = dx^2 + x^{-beta(y)} dy^2` on
//! `(x_min, b) x S^1`.
//!
//! Bilinear elements on a tensor grid, periodic in `y`. The energy density is
//! `(d_x u)^2 + x^beta (d_y u)^2` against the volume weight `x^{-beta/2}`,
//! with coefficients sampled at element centres. Both 1D mass factors are the
//! average of the consistent and lumped matrices, which makes the tensor
//! scheme fourth order in the dispersion of plane waves. Counts come from
//! the inertia of a banded `LDL^T` factorization of `K - lambda M`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{CountingCurve, CountingSample, Provenance};
use crate::constants::ExponentProfile;
use crate::error::{invalid, Result, WeylError};
use crate::radial1d::model_spectrum;
use crate::slicing::{bisect_all, jittered, ShiftCount};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bc2D {
    Dirichlet,
    Neumann,
}

/// Tensor mesh: explicit `x` nodes and a uniform periodic `y` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec2D {
    x_nodes: Vec<f64>,
    pub ny: usize,
    pub circumference: f64,
}

pub const MIN_NX: usize = 32;
pub const MIN_NY: usize = 16;

impl MeshSpec2D {
    pub fn from_nodes(x_nodes: Vec<f64>, ny: usize, circumference: f64) -> Result<Self> {
        if x_nodes.len() < MIN_NX + 1 {
            return Err(invalid("nx", format!("need at least {MIN_NX} elements")));
        }
        if ny < MIN_NY {
            return Err(invalid("ny", format!("need at least {MIN_NY} elements")));
        }
        if x_nodes[0] < 0.0 || x_nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid(
                "x_nodes",
                "must be increasing and start at x_min >= 0",
            ));
        }
        if !(circumference > 0.0) {
            return Err(invalid("circumference", "must be positive"));
        }
        Ok(Self {
            x_nodes,
            ny,
            circumference,
        })
    }

    pub fn uniform(nx: usize, ny: usize, x_min: f64, b: f64, circumference: f64) -> Result<Self> {
        if !(b > x_min) {
            return Err(invalid("b", "need x_min < b"));
        }
        let h = (b - x_min) / nx as f64;
        let nodes = (0..=nx)
            .map(|i| if i == nx { b } else { x_min + h * i as f64 })
            .collect();
        Self::from_nodes(nodes, ny, circumference)
    }

    /// Nodes graded geometrically away from `x_min`, starting at `first`
    /// and growing by `ratio` until the step reaches `h_max`, uniform beyond.
    /// `nx` is raised to [`MIN_NX`] by shrinking `h_max` if needed.
    pub fn graded(
        x_min: f64,
        b: f64,
        first: f64,
        ratio: f64,
        h_max: f64,
        ny: usize,
        circumference: f64,
    ) -> Result<Self> {
        if !(b > x_min && x_min >= 0.0) {
            return Err(invalid("b", "need 0 <= x_min < b"));
        }
        if !(ratio >= 1.0 && first > 0.0 && h_max > 0.0) {
            return Err(invalid("grading", "need ratio >= 1 and positive steps"));
        }
        let mut h_max = h_max.min((b - x_min) / MIN_NX as f64);
        loop {
            let mut nodes = vec![x_min];
            let mut h = first.min(h_max);
            let mut x = x_min;
            while x + 1.5 * h.min(h_max) < b {
                x += h.min(h_max);
                nodes.push(x);
                h *= ratio;
            }
            nodes.push(b);
            if nodes.len() > MIN_NX {
                return Self::from_nodes(nodes, ny, circumference);
            }
            h_max *= 0.9;
        }
    }

    /// Bisects every element and doubles `ny`.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.x_nodes.len());
        for w in self.x_nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(*self.x_nodes.last().unwrap());
        Self {
            x_nodes: nodes,
            ny: 2 * self.ny,
            circumference: self.circumference,
        }
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn nx(&self) -> usize {
        self.x_nodes.len() - 1
    }

    pub fn x_min(&self) -> f64 {
        self.x_nodes[0]
    }

    pub fn b(&self) -> f64 {
        *self.x_nodes.last().unwrap()
    }

    /// Mesh restricted to `[x_min, x0]` or `[x0, b]`; `x0` must be a node.
    pub fn split(&self, x0: f64) -> Result<(Self, Self)> {
        let i = self
            .x_nodes
            .iter()
            .position(|&x| (x - x0).abs() <= 1e-12 * x0.abs().max(1.0))
            .ok_or_else(|| invalid("interface", "x0 must be a mesh node"))?;
        let left = self.x_nodes[..=i].to_vec();
        let right = self.x_nodes[i..].to_vec();
        if left.len() < 3 || right.len() < 3 {
            return Err(invalid("interface", "x0 too close to an end"));
        }
        let mk = |nodes: Vec<f64>| Self {
            x_nodes: nodes,
            ny: self.ny,
            circumference: self.circumference,
        };
        Ok((mk(left), mk(right)))
    }
}

/// Unknown ordering. `XInner` runs over `x` fastest with the `y` index
/// folded (0, 1, ny-1, 2, ny-2, ...) so periodic neighbours stay two slabs
/// apart; `YInner` runs over folded `y` fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    XInner,
    YInner,
}

fn fold(iy: usize, ny: usize) -> usize {
    if iy == 0 {
        0
    } else if iy <= ny - iy {
        2 * iy - 1
    } else {
        2 * (ny - iy)
    }
}

/// Generalized pencil `(K, M)`; rows are generated from the stencil on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pencil {
    mesh: MeshSpec2D,
    /// Per element `(x-stiffness, y-stiffness, mass)` coefficients, `ex * ny + ey`.
    coeffs: Vec<[f64; 3]>,
    pub left_bc: Bc2D,
    pub right_bc: Bc2D,
    pub ordering: Ordering,
    x_lo: usize,
    m: usize,
    pub dim: usize,
    pub half_bandwidth: usize,
}

/// 1D stiffness and blended mass on an element of length `h`.
fn element_1d(h: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let k = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
    let (d, o) = (5.0 * h / 12.0, h / 12.0);
    (k, [[d, o], [o, d]])
}

pub fn assemble_2d(
    profile: &ExponentProfile,
    mesh: &MeshSpec2D,
    left_bc: Bc2D,
    right_bc: Bc2D,
) -> Result<Pencil> {
    assemble_2d_conformal(profile, mesh, left_bc, right_bc, |_, _| 1.0)
}

/// As [`assemble_2d`], for the conformal metric `rho(x, y) g0`. In two
/// dimensions the energy is conformally invariant, so only the mass scales.
pub fn assemble_2d_conformal(
    profile: &ExponentProfile,
    mesh: &MeshSpec2D,
    left_bc: Bc2D,
    right_bc: Bc2D,
    rho: impl Fn(f64, f64) -> f64,
) -> Result<Pencil> {
    let nx = mesh.nx();
    let ny = mesh.ny;
    let hy = mesh.circumference / ny as f64;
    let betas: Vec<f64> = (0..ny)
        .map(|ey| profile.eval((ey as f64 + 0.5) * hy))
        .collect();
    let mut coeffs = Vec::with_capacity(nx * ny);
    for ex in 0..nx {
        let xc = 0.5 * (mesh.x_nodes[ex] + mesh.x_nodes[ex + 1]);
        for (ey, &beta) in betas.iter().enumerate() {
            let w = xc.powf(-0.5 * beta);
            if !(w.is_finite() && w < 1e300) {
                return Err(WeylError::WeightOverflow { x: xc });
            }
            let r = rho(xc, (ey as f64 + 0.5) * hy);
            coeffs.push([w, xc.powf(0.5 * beta), w * r]);
        }
    }
    let x_lo = usize::from(left_bc == Bc2D::Dirichlet);
    let x_hi = if right_bc == Bc2D::Dirichlet {
        nx - 1
    } else {
        nx
    };
    let m = x_hi + 1 - x_lo;
    let (ordering, half_bandwidth) = if 2 * m < ny + 2 {
        (Ordering::XInner, 2 * m + 1)
    } else {
        (Ordering::YInner, ny + 2)
    };
    Ok(Pencil {
        mesh: mesh.clone(),
        coeffs,
        left_bc,
        right_bc,
        ordering,
        x_lo,
        m,
        dim: m * ny,
        half_bandwidth,
    })
}

impl Pencil {
    pub fn mesh(&self) -> &MeshSpec2D {
        &self.mesh
    }

    fn index(&self, ix: usize, iy: usize) -> Option<usize> {
        if ix < self.x_lo || ix >= self.x_lo + self.m {
            return None;
        }
        let p = fold(iy, self.mesh.ny);
        Some(match self.ordering {
            Ordering::XInner => p * self.m + (ix - self.x_lo),
            Ordering::YInner => (ix - self.x_lo) * self.mesh.ny + p,
        })
    }

    fn node(&self, i: usize) -> (usize, usize) {
        let ny = self.mesh.ny;
        let (p, ix) = match self.ordering {
            Ordering::XInner => (i / self.m, i % self.m + self.x_lo),
            Ordering::YInner => (i % ny, i / ny + self.x_lo),
        };
        // Invert the fold.
        let iy = if p == 0 {
            0
        } else if p % 2 == 1 {
            p.div_ceil(2)
        } else {
            ny - p / 2
        };
        (ix, iy)
    }

    /// Entries `(col, K, M)` of row `i` with `col >= i`.
    pub fn row_upper(&self, i: usize) -> Vec<(usize, f64, f64)> {
        let (ix, iy) = self.node(i);
        let ny = self.mesh.ny;
        let nx = self.mesh.nx();
        let hy = self.mesh.circumference / ny as f64;
        let (ky, my) = element_1d(hy);
        let mut out: Vec<(usize, f64, f64)> = Vec::with_capacity(9);
        for ex in [ix.wrapping_sub(1), ix] {
            if ex >= nx {
                continue;
            }
            let hx = self.mesh.x_nodes[ex + 1] - self.mesh.x_nodes[ex];
            let (kx, mx) = element_1d(hx);
            let lx0 = ix - ex;
            for ey in [(iy + ny - 1) % ny, iy] {
                let ly0 = (iy + ny - ey) % ny;
                let [a, c, w] = self.coeffs[ex * ny + ey];
                for lx in 0..2 {
                    for ly in 0..2 {
                        let Some(col) = self.index(ex + lx, (ey + ly) % ny) else {
                            continue;
                        };
                        if col < i {
                            continue;
                        }
                        let k = a * kx[lx0][lx] * my[ly0][ly] + c * mx[lx0][lx] * ky[ly0][ly];
                        let mm = w * mx[lx0][lx] * my[ly0][ly];
                        match out.iter_mut().find(|e| e.0 == col) {
                            Some(e) => {
                                e.1 += k;
                                e.2 += mm;
                            }
                            None => out.push((col, k, mm)),
                        }
                    }
                }
            }
        }
        out
    }

    /// Sum of all element mass entries, boundary nodes included.
    pub fn full_mass_sum(&self) -> f64 {
        let ny = self.mesh.ny;
        let hy = self.mesh.circumference / ny as f64;
        (0..self.mesh.nx())
            .map(|ex| {
                let hx = self.mesh.x_nodes[ex + 1] - self.mesh.x_nodes[ex];
                (0..ny).map(|ey| self.coeffs[ex * ny + ey][2]).sum::<f64>() * hx * hy
            })
            .sum()
    }
}

/// Negative pivots of `K - lambda M`, or `None` on a vanishing pivot.
fn ldl_inertia(pencil: &Pencil, lambda: f64) -> Option<usize> {
    let n = pencil.dim;
    let w = pencil.half_bandwidth.min(n.saturating_sub(1));
    let width = w + 1;
    let mut buf = vec![0.0f64; width * width];
    // Scale of the unfactored diagonal, for the vanishing-pivot test.
    let mut scale = vec![0.0f64; width];
    let load = |buf: &mut [f64], scale: &mut [f64], r: usize| {
        let slot = &mut buf[(r % width) * width..(r % width + 1) * width];
        slot.fill(0.0);
        for (col, k, m) in pencil.row_upper(r) {
            slot[col - r] += k - lambda * m;
            if col == r {
                scale[r % width] = k.abs() + lambda.abs() * m.abs();
            }
        }
    };
    for r in 0..width.min(n) {
        load(&mut buf, &mut scale, r);
    }
    let mut pivot = vec![0.0f64; width];
    let mut negative = 0;
    for i in 0..n {
        let s = i % width;
        pivot.copy_from_slice(&buf[s * width..(s + 1) * width]);
        let d = pivot[0];
        if !(d.abs() > 1e-13 * scale[s]) {
            return None;
        }
        if d < 0.0 {
            negative += 1;
        }
        let reach = w.min(n - 1 - i);
        for p in 1..=reach {
            let lp = pivot[p] / d;
            if lp == 0.0 {
                continue;
            }
            let t = ((i + p) % width) * width;
            let target = &mut buf[t..t + width - p];
            for (a, &u) in target.iter_mut().zip(&pivot[p..]) {
                *a -= lp * u;
            }
        }
        if i + width < n {
            load(&mut buf, &mut scale, i + width);
        }
    }
    Some(negative)
}

/// Number of generalized eigenvalues below `lambda`.
pub fn inertia_count(pencil: &Pencil, lambda: f64) -> ShiftCount {
    let mut shift = lambda;
    for attempt in 0..8 {
        if let Some(count) = ldl_inertia(pencil, shift) {
            return ShiftCount {
                count,
                shift,
                perturbed: attempt > 0,
            };
        }
        shift = jittered(shift);
    }
    panic!("no regular shift found near {lambda}");
}

/// Eigenvalues below `lambda_max` by bisection on inertia counts.
pub fn eigenvalues_below_2d(pencil: &Pencil, lambda_max: f64, tol: f64) -> (Vec<f64>, bool) {
    bisect_all(|l| inertia_count(pencil, l), 0.0, lambda_max, tol)
}

/// The lowest `k` eigenvalues.
pub fn lowest_eigenvalues_2d(pencil: &Pencil, k: usize, tol: f64) -> Result<Vec<f64>> {
    if k > pencil.dim {
        return Err(invalid("k", "exceeds the pencil dimension"));
    }
    let mut hi = 1.0;
    while inertia_count(pencil, hi).count < k {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(invalid("pencil", "could not bracket the eigenvalues"));
        }
    }
    let (mut eigs, _) = eigenvalues_below_2d(pencil, hi, tol);
    eigs.truncate(k);
    Ok(eigs)
}

/// Mesh sizing per sample: `h_x = theta_x / sqrt(lambda)` away from
/// `x_min`, and `ny` resolving the largest contributing tangential
/// frequency `j` with `2 pi j / ny <= theta_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptiveMesh {
    pub theta_x: f64,
    pub theta_y: f64,
    pub ratio: f64,
    /// First element as a fraction of `x_min`.
    pub first: f64,
}

impl Default for AdaptiveMesh {
    fn default() -> Self {
        Self {
            theta_x: 0.9,
            theta_y: 1.2,
            ratio: 1.1,
            first: 0.5,
        }
    }
}

/// Mesh policy for counting curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshLadder {
    /// One coarse mesh for all samples; the fine level is its refinement.
    Fixed(MeshSpec2D),
    /// A coarse mesh sized for each sample.
    Adaptive(AdaptiveMesh),
}

/// Geometry for direct counting on `(x_min, b) x S^1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain2D {
    pub b: f64,
    pub circumference: f64,
    pub right_bc: Bc2D,
}

/// Highest tangential frequency `j` whose mode can have energy `<= lambda`.
pub fn tangential_cutoff(
    profile: &ExponentProfile,
    circumference: f64,
    lambda: f64,
) -> Result<f64> {
    let lo = profile.beta_min();
    let hi = profile.beta_max();
    let steps = if hi > lo { 8 } else { 0 };
    let mut mu_max: f64 = 0.0;
    for i in 0..=steps {
        let beta = if steps == 0 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / steps as f64
        };
        let nu1 = if beta == 0.0 {
            1.0
        } else {
            model_spectrum(beta, 1, 1)?.eigenvalues[0]
        };
        mu_max = mu_max.max((lambda / nu1).max(0.0).powf(0.5 * (beta + 2.0)));
    }
    Ok(circumference * mu_max.sqrt() / (2.0 * PI))
}

impl AdaptiveMesh {
    pub fn mesh_for(
        &self,
        profile: &ExponentProfile,
        domain: &Domain2D,
        x_min: f64,
        lambda: f64,
    ) -> Result<MeshSpec2D> {
        let h_max = self.theta_x / lambda.sqrt();
        let first = if x_min > 0.0 {
            self.first * x_min
        } else {
            h_max
        };
        let j_max = tangential_cutoff(profile, domain.circumference, lambda)?;
        let ny = ((2.0 * PI * j_max / self.theta_y).ceil() as usize).max(MIN_NY);
        MeshSpec2D::graded(
            x_min,
            domain.b,
            first,
            self.ratio,
            h_max,
            ny,
            domain.circumference,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub lambda: f64,
    pub coarse: usize,
    pub fine: usize,
    pub coarse_dim: usize,
    pub fine_dim: usize,
    pub relative_change: f64,
    pub accepted: bool,
    pub perturbed: bool,
}

/// Relative count change between mesh levels accepted for a sample.
pub const LEVEL_TOL: f64 = 0.02;

/// Two-level direct counting curve with `x_min = c (max lambda)^{-1/2}`.
pub fn counting_curve_2d(
    profile: &ExponentProfile,
    domain: &Domain2D,
    ladder: &MeshLadder,
    lambdas: &[f64],
    c: f64,
) -> Result<(CountingCurve, Vec<SampleRecord>)> {
    if !(c > 0.0 && c < 0.5 * PI) {
        return Err(invalid("c", "must lie in (0, pi/2)"));
    }
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(invalid("lambda", "need positive samples"));
    }
    let top = lambdas.iter().cloned().fold(0.0, f64::max);
    let x_min = c / top.sqrt();
    let mut records = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let coarse = match ladder {
            MeshLadder::Fixed(mesh) => {
                let mut nodes = mesh.x_nodes.clone();
                nodes[0] = x_min;
                MeshSpec2D::from_nodes(nodes, mesh.ny, mesh.circumference)?
            }
            MeshLadder::Adaptive(policy) => policy.mesh_for(profile, domain, x_min, lam)?,
        };
        let fine = coarse.refined();
        let pc = assemble_2d(profile, &coarse, Bc2D::Dirichlet, domain.right_bc)?;
        let pf = assemble_2d(profile, &fine, Bc2D::Dirichlet, domain.right_bc)?;
        let nc = inertia_count(&pc, lam);
        let nf = inertia_count(&pf, lam);
        let change = (nf.count as f64 - nc.count as f64).abs() / (nf.count.max(1) as f64);
        log::info!(
            "direct2d lambda={lam}: {} -> {} (dims {} / {})",
            nc.count,
            nf.count,
            pc.dim,
            pf.dim
        );
        records.push(SampleRecord {
            lambda: lam,
            coarse: nc.count,
            fine: nf.count,
            coarse_dim: pc.dim,
            fine_dim: pf.dim,
            relative_change: change,
            accepted: change <= LEVEL_TOL,
            perturbed: nc.perturbed || nf.perturbed,
        });
    }
    let samples = records
        .iter()
        .map(|r| CountingSample {
            lambda: r.lambda,
            count: r.fine as f64,
            accepted: r.accepted,
        })
        .collect();
    let curve = CountingCurve::new(Provenance::DirectFem, samples, "direct2d")?;
    Ok((curve, records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiIsometryReport {
    pub holds: bool,
    /// 1-based index of the first violated eigenvalue inequality.
    pub violating_index: Option<usize>,
    /// First counting sample index that violated the squeeze.
    pub violating_sample: Option<usize>,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

/// Number of eigenvalues compared by [`quasi_isometry_check`].
pub const QUASI_EIGS: usize = 30;

/// Eigenvalue and counting squeezes between `g1` and `g2` whose pointwise
/// ratio lies in `[1/(1+eps), 1+eps]`.
pub fn quasi_isometry_check(
    g1: &Pencil,
    g2: &Pencil,
    eps: f64,
    d: i32,
    samples: &[f64],
) -> Result<QuasiIsometryReport> {
    let tie = 1e-12;
    let factor = (1.0 + eps).powi(1 + d);
    let e1 = lowest_eigenvalues_2d(g1, QUASI_EIGS, 1e-13)?;
    let e2 = lowest_eigenvalues_2d(g2, QUASI_EIGS, 1e-13)?;
    let mut violating_index = None;
    let (mut max_ratio, mut min_ratio) = (0.0f64, f64::INFINITY);
    for (j, (a, b)) in e1.iter().zip(&e2).enumerate() {
        let r = b / a;
        max_ratio = max_ratio.max(r);
        min_ratio = min_ratio.min(r);
        let ok = *b >= a / factor * (1.0 - tie) && *b <= a * factor * (1.0 + tie);
        if !ok && violating_index.is_none() {
            violating_index = Some(j + 1);
        }
    }
    // N_1(lambda / K) <= N_2(lambda) <= N_1(K lambda), counts at `<=` via a tie margin.
    let mut violating_sample = None;
    for (i, &lam) in samples.iter().enumerate() {
        let lower = inertia_count(g1, lam / factor * (1.0 - tie)).count;
        let mid = inertia_count(g2, lam).count;
        let upper = inertia_count(g1, lam * factor * (1.0 + tie)).count;
        if !(lower <= mid && mid <= upper) && violating_sample.is_none() {
            violating_sample = Some(i);
        }
    }
    Ok(QuasiIsometryReport {
        holds: violating_index.is_none() && violating_sample.is_none(),
        violating_index,
        violating_sample,
        max_ratio,
        min_ratio,
    })
}

/// A conformal factor `rho(y)` with values in `[1/(1+eps), 1+eps]`, built
/// from a few random Fourier modes.
pub fn random_conformal_factor(
    eps: f64,
    seed: u64,
    circumference: f64,
) -> impl Fn(f64, f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64)> = (1..=4)
        .map(|k| {
            (
                k as f64,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let norm: f64 = modes.iter().map(|m| m.1.abs()).sum::<f64>().max(1e-12);
    let lr = (1.0 + eps).ln();
    move |_x, y| {
        let s: f64 = modes
            .iter()
            .map(|&(k, a, ph)| a * (2.0 * PI * k * y / circumference + ph).sin())
            .sum();
        (lr * s / norm).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketRow {
    pub lambda: f64,
    pub dirichlet: usize,
    pub whole: usize,
    pub neumann: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub holds: bool,
    pub rows: Vec<BracketRow>,
    pub violating_lambda: Option<f64>,
}

/// `N^D(left) + N^D(right) <= N(whole) <= N^N(left) + N^N(right)` across the
/// interface `x0`, which must be a node of `mesh`.
pub fn bracketing_check(
    profile: &ExponentProfile,
    mesh: &MeshSpec2D,
    right_bc: Bc2D,
    x0: f64,
    samples: &[f64],
) -> Result<BracketReport> {
    if !(x0 > mesh.x_min() && x0 < mesh.b()) {
        return Err(invalid("interface", "need x_min < x0 < b"));
    }
    let (lm, rm) = mesh.split(x0)?;
    let whole = assemble_2d(profile, mesh, Bc2D::Dirichlet, right_bc)?;
    let ld = assemble_2d(profile, &lm, Bc2D::Dirichlet, Bc2D::Dirichlet)?;
    let rd = assemble_2d(profile, &rm, Bc2D::Dirichlet, right_bc)?;
    let ln = assemble_2d(profile, &lm, Bc2D::Dirichlet, Bc2D::Neumann)?;
    let rn = assemble_2d(profile, &rm, Bc2D::Neumann, right_bc)?;
    let mut rows = Vec::with_capacity(samples.len());
    let mut violating_lambda = None;
    for &lam in samples {
        let row = BracketRow {
            lambda: lam,
            dirichlet: inertia_count(&ld, lam).count + inertia_count(&rd, lam).count,
            whole: inertia_count(&whole, lam).count,
            neumann: inertia_count(&ln, lam).count + inertia_count(&rn, lam).count,
        };
        if !(row.dirichlet <= row.whole && row.whole <= row.neumann) && violating_lambda.is_none() {
            violating_lambda = Some(lam);
        }
        rows.push(row);
    }
    Ok(BracketReport {
        holds: violating_lambda.is_none(),
        rows,
        violating_lambda,
    })
}
