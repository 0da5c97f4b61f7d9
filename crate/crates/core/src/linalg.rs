//! Small dense complex matrix helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone().try_inverse().ok_or(Error::SingularMatrix)
}

/// Max-norm of a complex matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn asymmetry(m: &CMatrix) -> f64 {
    max_abs(&(m - m.transpose()))
}

pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.transpose()).scale(0.5)
}

/// Eigenvalues of the imaginary part of a complex symmetric matrix, ascending.
pub fn imag_part_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let y = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        0.5 * (m[(i, j)].im + m[(j, i)].im)
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(y).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.im)
}

pub fn determinant(m: &CMatrix) -> Complex64 {
    m.determinant()
}

/// Standard symplectic matrix `[[0, -1], [1, 0]]` in `g x g` blocks.
pub fn symplectic(g: usize) -> CMatrix {
    let mut j = CMatrix::zeros(2 * g, 2 * g);
    for i in 0..g {
        j[(i, g + i)] = Complex64::new(-1.0, 0.0);
        j[(g + i, i)] = Complex64::new(1.0, 0.0);
    }
    j
}

/// Assemble `[[a, b], [c, d]]` from four `g x g` blocks.
pub fn block2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let g = a.nrows();
    let mut m = CMatrix::zeros(2 * g, 2 * g);
    m.view_mut((0, 0), (g, g)).copy_from(a);
    m.view_mut((0, g), (g, g)).copy_from(b);
    m.view_mut((g, 0), (g, g)).copy_from(c);
    m.view_mut((g, g), (g, g)).copy_from(d);
    m
}

/// Least-squares solution of `a x = b` via SVD; returns `(x, residual_norm)`.
pub fn least_squares(a: &CMatrix, b: &CVector) -> Result<(CVector, f64)> {
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(b, 1e-300)
        .map_err(|_| Error::SingularMatrix)?;
    let r = (a * &x - b).norm();
    Ok((x, r))
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
