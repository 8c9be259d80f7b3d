//! Quadrature and interpolation utilities.

use nalgebra::{DMatrix, SymmetricEigen};

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    (a, fa): (f64, f64),
    (m, fm): (f64, f64),
    (b, fb): (f64, f64),
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // A NaN estimate stops refinement instead of recursing to full depth.
    if depth == 0 || !(delta.abs() > 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, (a, fa), (lm, flm), (m, fm), left, 0.5 * tol, depth - 1)
        + simpson_step(f, (m, fm), (rm, frm), (b, fb), right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Start from four panels so that symmetric integrands cannot fool the
    // first error estimate.
    let h = (b - a) / 4.0;
    (0..4)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i == 3 { b } else { lo + h };
            let mid = 0.5 * (lo + hi);
            let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
            let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
            simpson_step(&f, (lo, flo), (mid, fmid), (hi, fhi), whole, 0.25 * tol, 48)
        })
        .sum()
}

/// Adaptive Simpson with relative tolerance, using a coarse pass for scale.
pub fn adaptive_simpson_rel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let coarse = adaptive_simpson(&f, a, b, f64::INFINITY);
    let scale = coarse.abs().max(f64::MIN_POSITIVE);
    adaptive_simpson(&f, a, b, rel_tol * scale)
}

/// Nodes and weights of the `n`-point Gauss rule for the weight
/// `(1 - x)^alpha (1 + x)^beta` on `[-1, 1]`, by Golub-Welsch.
///
/// `mass` is the integral of the weight, supplied by the caller so that the
/// rule carries no dependence on a Gamma implementation.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64, mass: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let j = kf + 1.0;
            let s = 2.0 * j + ab;
            let b2 = if k == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            jac[(k, k + 1)] = b2.sqrt();
            jac[(k + 1, k)] = b2.sqrt();
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mass * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_jacobi(n, 0.0, 0.0, 2.0);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(x.len() == y.len() && x.len() >= 2);
        assert!(x.windows(2).all(|w| w[1] > w[0]), "abscissae must increase");
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = del[0];
            d[1] = del[0];
        } else {
            for i in 1..n - 1 {
                if del[i - 1] * del[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], del[0], del[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        Self { x, y, d }
    }

    /// Evaluates the interpolant, clamping outside the data range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= t) - 1;
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn simpson_handles_endpoint_singularity() {
        let v = adaptive_simpson(|u: f64| (1.0 - u * u).max(0.0).sqrt(), 0.0, 1.0, 1e-12);
        assert!((v - PI / 4.0).abs() < 1e-10);
        let r = adaptive_simpson_rel(|x: f64| x.exp(), 0.0, 3.0, 1e-10);
        assert!(((r - (3f64.exp() - 1.0)) / r).abs() < 1e-10);
    }

    #[test]
    fn gauss_jacobi_integrates_polynomials_and_weights() {
        let (x, w) = gauss_legendre(10, 0.0, 2.0);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(19)).sum();
        assert!((v - 2f64.powi(20) / 20.0).abs() < 1e-8);
        // Chebyshev weight (1 - x^2)^{-1/2} has mass pi.
        let (x, w) = gauss_jacobi(12, -0.5, -0.5, PI);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((v - PI / 2.0).abs() < 1e-13);
        // Weight (1 - x)^{-1/2}: int (1 + x) w = 8 sqrt(2) / 3.
        let (x, w) = gauss_jacobi(8, -0.5, 0.0, 2.0 * 2f64.sqrt());
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * (1.0 + x)).sum();
        assert!((v - 8.0 * 2f64.sqrt() / 3.0).abs() < 1e-13);
    }

    #[test]
    fn pchip_reproduces_monotone_data() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|t| t.exp()).collect();
        let p = Pchip::new(x.clone(), y.clone());
        for (a, b) in x.iter().zip(&y) {
            assert_eq!(p.eval(*a), *b);
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..1000 {
            let v = p.eval(i as f64 * 5.7 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
        assert!(((p.eval(1.05) - 1.05f64.exp()) / 1.05f64.exp()).abs() < 1e-3);
    }
}
