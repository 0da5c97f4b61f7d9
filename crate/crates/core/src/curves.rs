//! Hyperelliptic and (n, s)-curve data.
//!
//! A hyperelliptic curve of genus `g` is stored as
//! `y^2 = 4 x^(2g+1) + lambda_(2g) x^(2g) + ... + lambda_0`, with the
//! coefficient vector padded so that `lambda_(2g+1) = 4` and
//! `lambda_(2g+2) = 0` are addressable.

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cr, CMatrix};

/// Relative separation below which two branch points are treated as equal.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-10;

const ROOT_RESIDUAL_TARGET: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct HyperellipticCurve {
    genus: usize,
    /// `lambda_0 ..= lambda_(2g+2)`; the last two entries are always 4 and 0.
    lambda: Vec<Complex64>,
    branch_points: Vec<Complex64>,
}

impl HyperellipticCurve {
    /// Builds `y^2 = 4 prod (x - e_i)` from 3 or 5 pairwise distinct branch points.
    pub fn from_branch_points(e: &[Complex64]) -> Result<Self> {
        Self::from_branch_points_with_tol(e, DEFAULT_DEGENERACY_TOL)
    }

    pub fn from_branch_points_with_tol(e: &[Complex64], tol: f64) -> Result<Self> {
        let genus = match e.len() {
            3 => 1,
            5 => 2,
            n => return Err(Error::InvalidInput(format!("expected 3 or 5 branch points, got {n}"))),
        };
        if e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite branch point".into()));
        }
        check_separation(e, tol)?;
        let mut poly = vec![cr(4.0)];
        for &root in e {
            poly = mul_linear(&poly, root);
        }
        // poly is descending; flip to lambda_0 first.
        poly.reverse();
        let mut lambda = poly;
        lambda.push(Complex64::new(0.0, 0.0));
        Ok(Self {
            genus,
            lambda,
            branch_points: e.to_vec(),
        })
    }

    /// Builds the curve from `lambda_0 ..= lambda_(2g)`; branch points are found numerically.
    pub fn from_lambda(genus: usize, lambda: &[Complex64]) -> Result<Self> {
        Self::from_lambda_with_tol(genus, lambda, DEFAULT_DEGENERACY_TOL)
    }

    pub fn from_lambda_with_tol(genus: usize, lambda: &[Complex64], tol: f64) -> Result<Self> {
        if genus != 1 && genus != 2 {
            return Err(Error::UnsupportedGenus(genus));
        }
        if lambda.len() != 2 * genus + 1 {
            return Err(Error::InvalidInput(format!(
                "genus {genus} needs {} lambda coefficients, got {}",
                2 * genus + 1,
                lambda.len()
            )));
        }
        if lambda.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        let mut padded = lambda.to_vec();
        padded.push(cr(4.0));
        padded.push(cr(0.0));
        let roots = polynomial_roots(&padded[..2 * genus + 2])?;
        check_separation(&roots, tol)?;
        Ok(Self {
            genus,
            lambda: padded,
            branch_points: roots,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// `lambda_k`, zero beyond the padded range.
    pub fn lambda(&self, k: usize) -> Complex64 {
        self.lambda.get(k).copied().unwrap_or_default()
    }

    /// `lambda_0 ..= lambda_(2g)`.
    pub fn lambda_free(&self) -> &[Complex64] {
        &self.lambda[..2 * self.genus + 1]
    }

    /// Branch points in the order they were supplied (or found).
    pub fn branch_points(&self) -> &[Complex64] {
        &self.branch_points
    }

    /// Branch points in canonical order: real part, then imaginary part.
    pub fn sorted_branch_points(&self) -> Vec<Complex64> {
        let mut e = self.branch_points.clone();
        sort_canonical(&mut e);
        e
    }

    pub fn degree(&self) -> usize {
        2 * self.genus + 1
    }

    /// `y^2` as a polynomial value.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        horner(&self.lambda[..self.degree() + 1], x)
    }

    pub fn eval_derivative(&self, x: Complex64) -> Complex64 {
        let d = self.degree();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..=d).rev() {
            acc = acc * x + self.lambda[k] * k as f64;
        }
        acc
    }

    pub fn eval_second_derivative(&self, x: Complex64) -> Complex64 {
        let d = self.degree();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (2..=d).rev() {
            acc = acc * x + self.lambda[k] * (k * (k - 1)) as f64;
        }
        acc
    }

    /// Residual `|y^2 - f(x)|` scaled by `1 + |x|^(2g+1)`.
    pub fn point_residual(&self, x: Complex64, y: Complex64) -> f64 {
        (y * y - self.eval(x)).norm() / (1.0 + x.norm().powi(self.degree() as i32))
    }

    /// The curve obtained by translating every branch point by `t`.
    pub fn translated(&self, t: Complex64) -> Result<Self> {
        let e: Vec<Complex64> = self.branch_points.iter().map(|z| z + t).collect();
        Self::from_branch_points(&e)
    }
}

fn check_separation(e: &[Complex64], tol: f64) -> Result<()> {
    let scale = e.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for i in 0..e.len() {
        for j in (i + 1)..e.len() {
            if (e[i] - e[j]).norm() <= tol * scale {
                return Err(Error::DegenerateCurve(i, j));
            }
        }
    }
    Ok(())
}

pub(crate) fn sort_canonical(e: &mut [Complex64]) {
    e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Multiplies a descending coefficient list by `(x - root)`.
fn mul_linear(p: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); p.len() + 1];
    for (k, &c) in p.iter().enumerate() {
        out[k] += c;
        out[k + 1] -= c * root;
    }
    out
}

/// Evaluates an ascending coefficient list.
pub(crate) fn horner(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Roots of the curve polynomial (ascending coefficients, nonzero leading term).
///
/// Companion-matrix eigenvalues, each polished by Newton steps on the
/// original polynomial, returned in canonical order.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    if lead.norm() == 0.0 {
        return Err(Error::InvalidInput("zero leading coefficient".into()));
    }
    let mut companion = CMatrix::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = cr(1.0);
    }
    for i in 0..n {
        companion[(i, n - 1)] = -coeffs[i] / lead;
    }
    let eig = Schur::try_new(companion, 1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or(Error::RootFindingFailure { residual: f64::INFINITY })?;

    let deriv: Vec<Complex64> = (1..=n).map(|k| coeffs[k] * k as f64).collect();
    let mut roots = Vec::with_capacity(n);
    let mut worst: f64 = 0.0;
    for &r0 in eig.iter() {
        let mut r = r0;
        for _ in 0..50 {
            let p = horner(coeffs, r);
            let dp = horner(&deriv, r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            r -= step;
            if step.norm() <= 1e-17 * (1.0 + r.norm()) {
                break;
            }
        }
        worst = worst.max(relative_residual(coeffs, r));
        roots.push(r);
    }
    if worst > ROOT_RESIDUAL_TARGET {
        return Err(Error::RootFindingFailure { residual: worst });
    }
    sort_canonical(&mut roots);
    Ok(roots)
}

fn relative_residual(coeffs: &[Complex64], x: Complex64) -> f64 {
    let scale: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm() * x.norm().powi(k as i32))
        .sum();
    horner(coeffs, x).norm() / scale.max(f64::MIN_POSITIVE)
}

/// Branch points of the curve recomputed from its coefficients.
pub fn branch_points(c: &HyperellipticCurve) -> Result<Vec<Complex64>> {
    polynomial_roots(&c.lambda[..c.degree() + 1])
}

/// Weierstrass gap sequence of the numerical semigroup generated by `n` and `s`.
pub fn gap_sequence(n: u32, s: u32) -> Result<Vec<u32>> {
    if n < 2 || s <= n || gcd(n, s) != 1 {
        return Err(Error::InvalidPair { n, s });
    }
    // Largest gap is the Frobenius number n s - n - s.
    let bound = n * s - n - s;
    let mut gaps = Vec::new();
    for k in 0..=bound {
        let representable = (0..=k / s).any(|beta| (k - beta * s) % n == 0);
        if !representable {
            gaps.push(k);
        }
    }
    Ok(gaps)
}

pub(crate) fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The Kleinian 2-polar `F(x, z)`; `F(x, x) = 2 y(x)^2`.
pub fn kleinian_polar(c: &HyperellipticCurve, x: Complex64, z: Complex64) -> Complex64 {
    (0..=c.genus())
        .map(|k| {
            let xz = (x * z).powi(k as i32);
            xz * (c.lambda(2 * k) * 2.0 + c.lambda(2 * k + 1) * (x + z))
        })
        .sum()
}

/// A point `(x, y)` on a curve, with the sign of `y` relative to the principal root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: Complex64,
    pub y: Complex64,
    pub sheet: i8,
}

impl CurvePoint {
    /// Point above `x` on sheet `+1` (principal square root) or `-1`.
    pub fn on_sheet(c: &HyperellipticCurve, x: Complex64, sheet: i8) -> Self {
        let y = c.eval(x).sqrt();
        let sheet = if sheet < 0 { -1 } else { 1 };
        Self {
            x,
            y: y * f64::from(sheet),
            sheet,
        }
    }

    /// Validates that `(x, y)` lies on `c`.
    pub fn new(c: &HyperellipticCurve, x: Complex64, y: Complex64) -> Result<Self> {
        let residual = c.point_residual(x, y);
        if !(residual < 1e-9) {
            return Err(Error::NotOnCurve {
                x: x.to_string(),
                y: y.to_string(),
                residual,
            });
        }
        let principal = c.eval(x).sqrt();
        let sheet = if (y - principal).norm() <= (y + principal).norm() { 1 } else { -1 };
        Ok(Self { x, y, sheet })
    }

    pub fn is_branch_point(&self, scale: f64) -> bool {
        self.y.norm() <= 1e-12 * scale.max(1.0)
    }
}

/// Integrand values of the holomorphic basis `x^(i-1)/y` and the Baker
/// second-kind basis at a point, both per unit `dx`.
pub fn differential_basis(
    c: &HyperellipticCurve,
    p: &CurvePoint,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if p.y.norm() == 0.0 || p.is_branch_point(1.0 + p.x.norm().powi(c.degree() as i32)) {
        return Err(Error::AtBranchPoint);
    }
    let g = c.genus();
    let u = (0..g).map(|i| p.x.powi(i as i32) / p.y).collect();
    let r = (1..=g).map(|j| baker_numerator(c, j, p.x) / (p.y * 4.0)).collect();
    Ok((u, r))
}

/// `sum_(k=j)^(2g+1-j) (k+1-j) lambda_(k+1+j) x^k`, the numerator of `r_j` before division by `4y`.
pub fn baker_numerator(c: &HyperellipticCurve, j: usize, x: Complex64) -> Complex64 {
    baker_coefficients(c, j)
        .iter()
        .map(|&(k, coef)| coef * x.powi(k as i32))
        .sum()
}

/// Nonzero `(power, coefficient)` pairs of the Baker numerator for `r_j`.
pub fn baker_coefficients(c: &HyperellipticCurve, j: usize) -> Vec<(usize, Complex64)> {
    let g = c.genus();
    (j..=(2 * g + 1 - j))
        .map(|k| (k, c.lambda(k + 1 + j) * (k + 1 - j) as f64))
        .filter(|(_, coef)| coef.norm() != 0.0)
        .collect()
}

/// Shape of an (n, s)-curve written as `y^n - a_(n-1)(x) y^(n-1) - ... - a_0(x) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NSCurveShape {
    pub n: u32,
    pub s: u32,
    /// `a[k]` holds the ascending coefficients of `a_k(x)`.
    pub a: Vec<Vec<Complex64>>,
}

impl NSCurveShape {
    pub fn new(n: u32, s: u32, a: Vec<Vec<Complex64>>) -> Result<Self> {
        if n < 2 || s <= n || gcd(n, s) != 1 {
            return Err(Error::InvalidPair { n, s });
        }
        if a.len() != n as usize {
            return Err(Error::InvalidInput(format!(
                "need {n} coefficient polynomials a_0..a_(n-1), got {}",
                a.len()
            )));
        }
        Ok(Self { n, s, a })
    }

    pub fn genus(&self) -> u32 {
        (self.n - 1) * (self.s - 1) / 2
    }

    /// `a_k^(d)(x)`, the `d`-th derivative of `a_k` at `x`.
    pub fn a_deriv(&self, k: usize, d: usize, x: Complex64) -> Complex64 {
        let coeffs = &self.a[k];
        let mut acc = Complex64::new(0.0, 0.0);
        for m in (d..coeffs.len()).rev() {
            let falling: f64 = (0..d).map(|t| (m - t) as f64).product();
            acc = acc * x + coeffs[m] * falling;
        }
        acc
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        let n = self.n as i32;
        let mut f = y.powi(n);
        for k in 0..self.n as usize {
            f -= self.a_deriv(k, 0, x) * y.powi(k as i32);
        }
        f
    }

    /// Partial derivative `d^(dx) / dx d^(dy) / dy` of `f` at `(x, y)`.
    pub fn partial(&self, dx: usize, dy: usize, x: Complex64, y: Complex64) -> Complex64 {
        let n = self.n as usize;
        let falling = |m: usize, d: usize| -> f64 { (0..d).map(|t| (m - t) as f64).product() };
        let mut f = Complex64::new(0.0, 0.0);
        if dx == 0 && dy <= n {
            f += y.powi((n - dy) as i32) * falling(n, dy);
        }
        for k in dy..n {
            f -= self.a_deriv(k, dx, x) * y.powi((k - dy) as i32) * falling(k, dy);
        }
        f
    }

    /// Implicit derivatives `(y', y'')` of `y(x)` along `f = 0`.
    pub fn implicit_derivatives(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let fx = self.partial(1, 0, x, y);
        let fy = self.partial(0, 1, x, y);
        let fxx = self.partial(2, 0, x, y);
        let fxy = self.partial(1, 1, x, y);
        let fyy = self.partial(0, 2, x, y);
        let y1 = -fx / fy;
        let y2 = -(fxx + fxy * y1 * 2.0 + fyy * y1 * y1) / fy;
        (y1, y2)
    }
}

/// `phi = (y^(n-1), ..., 1)` and `psi = (1, psi_1, ..., psi_(n-1))` with
/// `psi_k = (f / y^(n-k))_+`.
pub fn psi_phi_vectors(shape: &NSCurveShape, x: Complex64, y: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = shape.n as usize;
    let phi = (0..n).map(|k| y.powi((n - 1 - k) as i32)).collect();
    let mut psi = vec![Complex64::new(1.0, 0.0)];
    for k in 1..n {
        let mut v = y.powi(k as i32);
        for j in (n - k)..n {
            v -= shape.a_deriv(j, 0, x) * y.powi((j + k - n) as i32);
        }
        psi.push(v);
    }
    (phi, psi)
}

/// Coefficient of `dx^2` in the projective-connection term
/// `-(3 y'' f_yy + 2 y'^2 f_yyy + 6 y' f_yyx + 6 f_yxx) / (2 f_y)`.
pub fn projective_t(
    shape: &NSCurveShape,
    x: Complex64,
    y: Complex64,
    y1: Complex64,
    y2: Complex64,
) -> Result<Complex64> {
    if shape.n > 5 {
        return Err(Error::UnsupportedDegree(shape.n));
    }
    let fy = shape.partial(0, 1, x, y);
    let fyy = shape.partial(0, 2, x, y);
    let fyyy = shape.partial(0, 3, x, y);
    let fyyx = shape.partial(1, 2, x, y);
    let fyxx = shape.partial(2, 1, x, y);
    Ok(-(y2 * fyy * 3.0 + y1 * y1 * fyyy * 2.0 + y1 * fyyx * 6.0 + fyxx * 6.0) / (fy * 2.0))
}

/// The expanded per-degree forms of the same term for `n = 2..=5`.
///
/// The `n = 4` and `n = 5` forms carry the derivative orders that the
/// general expression produces (`2 a_2' y'` and `12 a_4' y^2 y'`), and the
/// `n = 3` form keeps the `-2 a_2'' y` term that vanishes for linear `a_2`.
pub fn projective_t_expanded(
    shape: &NSCurveShape,
    x: Complex64,
    y: Complex64,
    y1: Complex64,
    y2: Complex64,
) -> Result<Complex64> {
    let a = |k: usize, d: usize| shape.a_deriv(k, d, x);
    let fy = shape.partial(0, 1, x, y);
    let braces = match shape.n {
        2 => y2 - a(1, 2),
        3 => (y * 3.0 - a(2, 0)) * y2 + y1 * y1 * 2.0 - a(2, 1) * y1 * 2.0 - a(1, 2) - a(2, 2) * y * 2.0,
        4 => {
            (y * y * 6.0 - y * a(3, 0) * 3.0 - a(2, 0)) * y2 + (y * 8.0 - a(3, 0) * 2.0) * y1 * y1
                - (y * a(3, 1) * 6.0 + a(2, 1) * 2.0) * y1
                - y * y * a(3, 2) * 3.0
                - y * a(2, 2) * 2.0
                - a(1, 2)
        }
        5 => {
            (y.powi(3) * 10.0 - a(4, 0) * y * y * 6.0 - a(3, 0) * y * 3.0 - a(2, 0)) * y2
                + (y * y * 20.0 - a(4, 0) * y * 8.0 - a(3, 0) * 2.0) * y1 * y1
                - (a(4, 1) * y * y * 12.0 + y * a(3, 1) * 6.0 + a(2, 1) * 2.0) * y1
                - a(4, 2) * y.powi(3) * 4.0
                - y * y * a(3, 2) * 3.0
                - y * a(2, 2) * 2.0
                - a(1, 2)
        }
        n => return Err(Error::UnsupportedDegree(n)),
    };
    Ok(-braces * 3.0 / fy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn reals(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| cr(x)).collect()
    }

    #[test]
    fn cubic_from_branch_points() {
        let curve = HyperellipticCurve::from_branch_points(&reals(&[1.0, 0.0, -1.0])).unwrap();
        let lam = curve.lambda_free();
        assert!((lam[0] - cr(0.0)).norm() < 1e-15);
        assert!((lam[1] - cr(-4.0)).norm() < 1e-15);
        assert!((lam[2] - cr(0.0)).norm() < 1e-15);
        assert_eq!(curve.lambda(3), cr(4.0));
        assert_eq!(curve.lambda(4), cr(0.0));
    }

    #[test]
    fn quintic_from_branch_points() {
        let curve =
            HyperellipticCurve::from_branch_points(&reals(&[-2.0, -1.0, 0.0, 1.0, 2.0])).unwrap();
        // Convolution oracle: 4 x (x^2 - 1)(x^2 - 4) = 4x^5 - 20x^3 + 16x.
        let expected = [0.0, 16.0, 0.0, -20.0, 0.0];
        for (k, &v) in expected.iter().enumerate() {
            assert!((curve.lambda(k) - cr(v)).norm() < 1e-13, "lambda_{k}");
        }
    }

    #[test]
    fn repeated_root_is_degenerate() {
        let err = HyperellipticCurve::from_branch_points(&reals(&[0.0, 0.0, 1.0])).unwrap_err();
        assert_eq!(err.kind(), "DegenerateCurve");
    }

    #[test]
    fn degeneracy_tolerance_is_configurable() {
        let e = reals(&[0.0, 1e-6, 1.0]);
        assert!(HyperellipticCurve::from_branch_points(&e).is_ok());
        assert!(HyperellipticCurve::from_branch_points_with_tol(&e, 1e-5).is_err());
    }

    #[test]
    fn roots_of_factorable_cubic() {
        let curve = HyperellipticCurve::from_lambda(1, &reals(&[0.0, -4.0, 0.0])).unwrap();
        let e = branch_points(&curve).unwrap();
        for (got, want) in e.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - cr(want)).norm() < 1e-14);
        }
    }

    #[test]
    fn roots_of_4x3_plus_4_are_cube_roots_of_minus_one() {
        let curve = HyperellipticCurve::from_lambda(1, &reals(&[4.0, 0.0, 0.0])).unwrap();
        let e = curve.sorted_branch_points();
        let s3 = 3f64.sqrt() / 2.0;
        let expected = [cr(-1.0), c(0.5, -s3), c(0.5, s3)];
        for (got, want) in e.iter().zip(expected) {
            assert!((got - want).norm() < 1e-14, "{got} vs {want}");
        }
    }

    #[test]
    fn gap_sequences() {
        assert_eq!(gap_sequence(2, 3).unwrap(), vec![1]);
        assert_eq!(gap_sequence(2, 5).unwrap(), vec![1, 3]);
        assert_eq!(gap_sequence(3, 4).unwrap(), vec![1, 2, 5]);
        assert!(gap_sequence(2, 4).is_err());
        assert!(gap_sequence(5, 3).is_err());
        assert!(gap_sequence(1, 3).is_err());
    }

    #[test]
    fn kleinian_polar_genus_one_expansion() {
        let lam = [c(0.3, -0.1), c(-1.2, 0.5), c(0.7, 0.2)];
        let curve = HyperellipticCurve::from_lambda(1, &lam).unwrap();
        let x = c(0.4, 0.9);
        let z = c(-1.1, 0.3);
        let expected = lam[0] * 2.0 + lam[1] * (x + z) + lam[2] * 2.0 * x * z + x * z * (x + z) * 4.0;
        assert!((kleinian_polar(&curve, x, z) - expected).norm() < 1e-14);
        assert!((kleinian_polar(&curve, x, z) - kleinian_polar(&curve, z, x)).norm() < 1e-14);
    }

    #[test]
    fn baker_basis_genus_two_top_differential() {
        let curve =
            HyperellipticCurve::from_branch_points(&reals(&[-2.0, -1.0, 0.5, 1.0, 2.5])).unwrap();
        let p = CurvePoint::on_sheet(&curve, c(0.3, 0.7), 1);
        let (u, r) = differential_basis(&curve, &p).unwrap();
        assert!((u[0] - 1.0 / p.y).norm() < 1e-14);
        assert!((u[1] - p.x / p.y).norm() < 1e-14);
        assert!((r[1] - p.x * p.x / p.y).norm() < 1e-13);
        let r1 = (curve.lambda(3) * p.x + curve.lambda(4) * 2.0 * p.x * p.x + p.x.powi(3) * 12.0)
            / (p.y * 4.0);
        assert!((r[0] - r1).norm() < 1e-13);
    }

    #[test]
    fn baker_basis_genus_one_is_x_over_y() {
        let curve = HyperellipticCurve::from_lambda(1, &[cr(0.2), cr(-1.0), cr(0.4)]).unwrap();
        let p = CurvePoint::on_sheet(&curve, c(1.3, -0.2), -1);
        let (_, r) = differential_basis(&curve, &p).unwrap();
        assert!((r[0] - p.x / p.y).norm() < 1e-14);
    }

    #[test]
    fn differential_basis_rejects_branch_point() {
        let curve = HyperellipticCurve::from_branch_points(&reals(&[1.0, 0.0, -1.0])).unwrap();
        let p = CurvePoint { x: cr(1.0), y: cr(0.0), sheet: 1 };
        assert_eq!(differential_basis(&curve, &p).unwrap_err(), Error::AtBranchPoint);
    }

    #[test]
    fn curve_point_validation() {
        let curve = HyperellipticCurve::from_branch_points(&reals(&[1.0, 0.0, -1.0])).unwrap();
        let p = CurvePoint::on_sheet(&curve, c(2.0, 1.0), -1);
        let q = CurvePoint::new(&curve, p.x, p.y).unwrap();
        assert_eq!(q.sheet, -1);
        assert!(CurvePoint::new(&curve, p.x, p.y + 0.1).is_err());
    }

    fn quadratic_shape(a1: Vec<Complex64>, a0: Vec<Complex64>) -> NSCurveShape {
        NSCurveShape::new(2, 5, vec![a0, a1]).unwrap()
    }

    #[test]
    fn psi_phi_for_n_two() {
        let shape = quadratic_shape(vec![c(0.5, 0.1), c(1.0, 0.0)], vec![cr(1.0), cr(2.0)]);
        let (x, y) = (c(0.3, 0.2), c(-0.7, 1.1));
        let (phi, psi) = psi_phi_vectors(&shape, x, y);
        assert_eq!(phi, vec![y, cr(1.0)]);
        assert!((psi[1] - (y - shape.a_deriv(1, 0, x))).norm() < 1e-15);
    }

    #[test]
    fn projective_t_n_two_without_a1() {
        let shape = quadratic_shape(vec![cr(0.0)], vec![cr(1.0), cr(-2.0), cr(0.0), cr(0.5), cr(0.0), cr(4.0)]);
        let x = c(0.4, -0.3);
        let y = shape.a_deriv(0, 0, x).sqrt();
        let (y1, y2) = shape.implicit_derivatives(x, y);
        let t = projective_t(&shape, x, y, y1, y2).unwrap();
        assert!((t - (-y2 * 1.5 / y)).norm() < 1e-12 * t.norm().max(1.0));
    }

    #[test]
    fn projective_t_rejects_large_n() {
        let shape = NSCurveShape::new(6, 7, vec![vec![cr(1.0)]; 6]).unwrap();
        let err = projective_t(&shape, cr(0.1), cr(0.2), cr(0.0), cr(0.0)).unwrap_err();
        assert_eq!(err, Error::UnsupportedDegree(6));
    }

    #[test]
    fn implicit_derivatives_match_finite_differences() {
        let shape = quadratic_shape(vec![cr(0.0)], vec![cr(1.0), cr(-2.0), cr(0.0), cr(0.5), cr(0.0), cr(4.0)]);
        let x = c(0.8, 0.1);
        let y_of = |x: Complex64| shape.a_deriv(0, 0, x).sqrt();
        let h = 1e-4;
        let (y1, y2) = shape.implicit_derivatives(x, y_of(x));
        let fd1 = (y_of(x + h) - y_of(x - h)) / (2.0 * h);
        let fd2 = (y_of(x + h) - y_of(x) * 2.0 + y_of(x - h)) / (h * h);
        assert!((y1 - fd1).norm() < 1e-7);
        assert!((y2 - fd2).norm() < 1e-5);
    }
}
