//! Adaptive Gauss-Legendre quadrature for vector-valued complex integrands.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default absolute/relative target for period integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

const PANEL_ORDER: usize = 20;
const MAX_DEPTH: usize = 40;
/// Panel evaluations allowed before giving up on a near-singular integrand.
const MAX_PANELS: usize = 100_000;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

fn panel<F>(f: &mut F, a: f64, b: f64, dim: usize) -> Vec<Complex64>
where
    F: FnMut(f64, &mut [Complex64]),
{
    let (nodes, weights) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    for (&t, &w) in nodes.iter().zip(weights) {
        f(mid + half * t, &mut buf);
        for (s, v) in acc.iter_mut().zip(&buf) {
            *s += v * (w * half);
        }
    }
    acc
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Integrates a `dim`-component integrand over `[a, b]`.
///
/// Panels are bisected until the panel estimate and the sum over its two
/// halves agree to within the panel's share of `tol * max(1, |I|)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, dim: usize, tol: f64) -> Result<Vec<Complex64>>
where
    F: FnMut(f64, &mut [Complex64]),
{
    let whole = panel(&mut f, a, b, dim);
    let scale = whole.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let budget = tol * scale;
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    let mut worst: f64 = 0.0;
    // Explicit stack keeps the summation order fixed (left to right).
    let mut stack = vec![(a, b, whole, 0usize)];
    let mut panels = 1;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        panels += 2;
        if panels > MAX_PANELS {
            return Err(Error::QuadratureNonConvergence { tol, estimate: f64::INFINITY });
        }
        let mid = 0.5 * (lo + hi);
        let left = panel(&mut f, lo, mid, dim);
        let right = panel(&mut f, mid, hi, dim);
        let refined: Vec<Complex64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
        let err = max_diff(&est, &refined);
        let share = budget * (hi - lo) / (b - a);
        if err <= share || depth >= MAX_DEPTH {
            if err > share {
                worst = worst.max(err);
            }
            for (t, v) in total.iter_mut().zip(&refined) {
                *t += v;
            }
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    if worst > budget || total.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::QuadratureNonConvergence { tol, estimate: worst });
    }
    Ok(total)
}
