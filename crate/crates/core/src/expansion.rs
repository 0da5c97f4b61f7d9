//! Projective connection at infinity in the local parameter `xi`, `x = xi^(-2)`.
//!
//! The algebraic form is affine in the entries of `kappa`; the theta-function
//! form is numeric. Equating their coefficients gives an overdetermined linear
//! system for `kappa`.

use num_complex::Complex64;

use crate::correspondence::{BranchMatching, GAMMA_THRESHOLD};
use crate::curves::{baker_coefficients, HyperellipticCurve};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix, CVector};
use crate::periods::PeriodBundle;
use crate::series::{schwarzian, TruncatedSeries};
use crate::theta::{Characteristic, ThetaTable};

pub const DEFAULT_ORDER: i32 = 12;
pub const MAX_ORDER: i32 = 40;

/// Largest accepted relative residual of the coefficient system.
pub const RESIDUAL_GATE: f64 = 1e-6;

/// Extra exponents carried through intermediate steps.
const MARGIN: i32 = 48;

/// Lowest exponent entering the coefficient system.
const FIRST_EXPONENT: i32 = -2;

fn check_order(order: i32) -> Result<()> {
    if !(2..=MAX_ORDER).contains(&order) {
        return Err(Error::InvalidInput(format!(
            "expansion order {order} outside [2, {MAX_ORDER}]"
        )));
    }
    Ok(())
}

fn genus_of(c: &HyperellipticCurve) -> Result<usize> {
    match c.genus() {
        g @ (1 | 2) => Ok(g),
        g => Err(Error::UnsupportedGenus(g)),
    }
}

/// Independent entries of a symmetric `g x g` matrix, row-major upper triangle.
pub fn kappa_unknowns(g: usize) -> Vec<(usize, usize)> {
    (0..g).flat_map(|i| (i..g).map(move |j| (i, j))).collect()
}

/// A series whose coefficients are affine in the independent `kappa` entries.
#[derive(Debug, Clone)]
pub struct AffineSeries {
    pub constant: TruncatedSeries,
    pub terms: Vec<((usize, usize), TruncatedSeries)>,
}

impl AffineSeries {
    pub fn evaluate(&self, kappa: &CMatrix) -> Result<TruncatedSeries> {
        let mut s = self.constant.clone();
        for ((i, j), t) in &self.terms {
            s = s.add(&t.scale(kappa[(*i, *j)]))?;
        }
        Ok(s)
    }

    /// Constant part and the coefficient of each unknown at `xi^k`.
    pub fn coeff(&self, k: i32) -> Option<(Complex64, Vec<Complex64>)> {
        let c0 = self.constant.coeff(k)?;
        let lin = self.terms.iter().map(|(_, t)| t.coeff(k)).collect::<Option<Vec<_>>>()?;
        Some((c0, lin))
    }
}

/// `sum_k coeffs[k] x^k` with `x = xi^(-2)`, exact below `xi^order`.
fn poly_in_x(coeffs: &[(usize, Complex64)], order: i32) -> Result<TruncatedSeries> {
    let top = coeffs.iter().map(|&(k, _)| k).max().unwrap_or(0) as i32;
    let mut s = TruncatedSeries::new(-2 * top, vec![cr(0.0)], order)?;
    for &(k, c) in coeffs {
        s = s.add_term(-2 * k as i32, c)?;
    }
    Ok(s)
}

fn dense(coeffs: &[Complex64]) -> Vec<(usize, Complex64)> {
    coeffs.iter().copied().enumerate().collect()
}

fn derivative_coeffs(p: &[Complex64]) -> Vec<Complex64> {
    p.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

/// The algebraic projective connection divided by `dxi^2`, affine in `kappa`.
pub fn skw_series(c: &HyperellipticCurve, order: i32) -> Result<AffineSeries> {
    check_order(order)?;
    let g = genus_of(c)?;
    let work = order + MARGIN;
    let p: Vec<Complex64> = (0..=2 * g + 1).map(|k| c.lambda(k)).collect();
    let p1 = derivative_coeffs(&p);
    let p2 = derivative_coeffs(&p1);
    let ps = poly_in_x(&dense(&p), work)?;
    let p1s = poly_in_x(&dense(&p1), work)?;
    let p2s = poly_in_x(&dense(&p2), work)?;
    let x = TruncatedSeries::monomial(-2, cr(1.0), work)?;
    // (dx/dxi)^2 = 4 xi^(-6)
    let dx2 = TruncatedSeries::monomial(-6, cr(4.0), work)?;
    let inv_p = ps.recip()?;

    // y''/y = (2 P P'' - P'^2) / (4 P^2)
    let ypp = ps
        .mul(&p2s)?
        .scale(cr(2.0))
        .sub(&p1s.mul(&p1s)?)?
        .mul(&inv_p)?
        .mul(&inv_p)?
        .scale(cr(0.25));
    // u^T r = sum x^(i-1) R_i / (4 P)
    let mut ur = TruncatedSeries::new(0, vec![cr(0.0)], work)?;
    for i in 1..=g {
        let mut coeffs = baker_coefficients(c, i);
        for entry in &mut coeffs {
            entry.0 += i - 1;
        }
        if coeffs.is_empty() {
            continue;
        }
        ur = ur.add(&poly_in_x(&coeffs, work)?)?;
    }
    let ur = ur.mul(&inv_p)?.scale(cr(0.25));

    let bracket = ypp.scale(cr(-1.5)).add(&ur.scale(cr(6.0)))?;
    let constant = schwarzian(&x)?.add(&bracket.mul(&dx2)?)?.truncate(order + 1)?;

    let mut terms = Vec::new();
    for (i, j) in kappa_unknowns(g) {
        let weight = if i == j { 12.0 } else { 24.0 };
        let mono = poly_in_x(&[(i + j, cr(weight))], work)?;
        let t = mono.mul(&inv_p)?.mul(&dx2)?.truncate(order + 1)?;
        terms.push(((i, j), t));
    }
    Ok(AffineSeries { constant, terms })
}

/// `v_i / dxi` for the normalized holomorphic differentials.
fn normalized_differentials(c: &HyperellipticCurve, b: &PeriodBundle, work: i32) -> Result<Vec<TruncatedSeries>> {
    let g = c.genus();
    // s^2 = 1 + sum lambda_k xi^(2(2g+1-k)) / 4
    let mut s2 = TruncatedSeries::new(0, vec![cr(1.0)], work)?;
    for k in 0..=2 * g {
        s2 = s2.add_term(2 * (2 * g + 1 - k) as i32, c.lambda(k) / 4.0)?;
    }
    let inv_s = s2.sqrt()?.recip()?;
    let u: Vec<TruncatedSeries> = (1..=g)
        .map(|k| TruncatedSeries::monomial((2 * g - 2 * k) as i32, cr(-1.0), work)?.mul(&inv_s))
        .collect::<Result<_>>()?;
    let w = b.inv_two_omega();
    (0..g)
        .map(|i| {
            let mut v = TruncatedSeries::new(0, vec![cr(0.0)], work)?;
            for (k, uk) in u.iter().enumerate() {
                v = v.add(&uk.scale(w[(i, k)]))?;
            }
            Ok(v)
        })
        .collect()
}

/// The theta-function projective connection divided by `dxi^2`, built on
/// the odd characteristic `ch`.
pub fn sfw_series(
    c: &HyperellipticCurve,
    b: &PeriodBundle,
    tt: &ThetaTable,
    ch: &Characteristic,
    order: i32,
) -> Result<TruncatedSeries> {
    check_order(order)?;
    let g = genus_of(c)?;
    if !ch.is_odd() || ch.genus() != g {
        return Err(Error::InvalidInput(format!("{ch} is not an odd genus-{g} characteristic")));
    }
    let work = order + MARGIN;
    let v = normalized_differentials(c, b, work)?;
    let jet = &tt.entry(ch).jet;

    // Value of H at infinity, compared with its size over all odd characteristics.
    let lead = |grad: &[Complex64]| -> Complex64 {
        (0..g).map(|i| grad[i] * v[i].coeff(0).unwrap_or_default()).sum()
    };
    let scale = tt.odd().map(|t| lead(&t.jet.grad).norm()).fold(0.0, f64::max);
    if lead(&jet.grad).norm() <= GAMMA_THRESHOLD * scale {
        return Err(Error::GammaCharacteristic);
    }

    let zero = || TruncatedSeries::new(0, vec![cr(0.0)], work);
    let mut h = zero()?;
    let mut q = zero()?;
    let mut t = zero()?;
    for i in 0..g {
        h = h.add(&v[i].scale(jet.grad[i]))?;
        for j in 0..g {
            let vij = v[i].mul(&v[j])?;
            q = q.add(&vij.scale(jet.hessian(i, j)))?;
            for k in 0..g {
                t = t.add(&vij.mul(&v[k])?.scale(jet.third(i, j, k)))?;
            }
        }
    }
    let qh = q.div(&h)?;
    schwarzian(&h.integrate()?)?
        .add(&qh.mul(&qh)?.scale(cr(1.5)))?
        .sub(&t.div(&h)?.scale(cr(2.0)))?
        .truncate(order + 1)
}

/// Rows of the coefficient system for one characteristic.
fn system_rows(skw: &AffineSeries, sfw: &TruncatedSeries, order: i32) -> Result<(Vec<Vec<Complex64>>, Vec<Complex64>)> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for k in FIRST_EXPONENT..=order {
        let (c0, lin) = skw.coeff(k).ok_or(Error::OrderUnderflow)?;
        let f = sfw.coeff(k).ok_or(Error::OrderUnderflow)?;
        rows.push(lin);
        rhs.push(f - c0);
    }
    Ok((rows, rhs))
}

fn solve(rows: &[Vec<Complex64>], rhs: &[Complex64], g: usize) -> Result<(CMatrix, f64)> {
    let n = kappa_unknowns(g).len();
    let a = CMatrix::from_fn(rows.len(), n, |r, k| rows[r][k]);
    let bvec = CVector::from_column_slice(rhs);
    let (x, res) = linalg::least_squares(&a, &bvec)?;
    let relative = res / bvec.norm().max(1.0);
    let mut kappa = CMatrix::zeros(g, g);
    for (k, (i, j)) in kappa_unknowns(g).into_iter().enumerate() {
        kappa[(i, j)] = x[k];
        kappa[(j, i)] = x[k];
    }
    Ok((kappa, relative))
}

#[derive(Debug, Clone)]
pub struct CharacteristicFit {
    pub ch: Characteristic,
    pub sfw: TruncatedSeries,
    pub kappa: CMatrix,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub order: i32,
    pub skw: AffineSeries,
    pub fits: Vec<CharacteristicFit>,
    /// Least-squares solution over all admissible characteristics together.
    pub kappa: CMatrix,
    pub residual: f64,
}

/// Odd characteristics usable on the theta side.
fn admissible(tt: &ThetaTable, m: Option<&BranchMatching>) -> Result<Vec<Characteristic>> {
    match (tt.genus(), m) {
        (1, _) => Ok(tt.odd().map(|t| t.ch).collect()),
        (2, Some(m)) => Ok(m.pairs.iter().map(|p| p.ch).collect()),
        (2, None) => Err(Error::InvalidInput("genus 2 needs a branch matching".into())),
        (g, _) => Err(Error::UnsupportedGenus(g)),
    }
}

/// Recovers `kappa` by matching the two series coefficient by coefficient.
pub fn kappa_from_expansion(
    c: &HyperellipticCurve,
    b: &PeriodBundle,
    tt: &ThetaTable,
    m: Option<&BranchMatching>,
    order: i32,
) -> Result<ExpansionReport> {
    let g = genus_of(c)?;
    let skw = skw_series(c, order)?;
    let mut fits = Vec::new();
    let mut all_rows = Vec::new();
    let mut all_rhs = Vec::new();
    for ch in admissible(tt, m)? {
        let sfw = sfw_series(c, b, tt, &ch, order)?;
        let (rows, rhs) = system_rows(&skw, &sfw, order)?;
        let (kappa, residual) = solve(&rows, &rhs, g)?;
        all_rows.extend(rows);
        all_rhs.extend(rhs);
        fits.push(CharacteristicFit { ch, sfw, kappa, residual });
    }
    let (kappa, residual) = solve(&all_rows, &all_rhs, g)?;
    if !(residual < RESIDUAL_GATE) {
        return Err(Error::IncompatibleSystem(residual));
    }
    Ok(ExpansionReport { order, skw, fits, kappa, residual })
}

/// `kappa` from a single odd characteristic.
pub fn kappa_from_single(
    c: &HyperellipticCurve,
    b: &PeriodBundle,
    tt: &ThetaTable,
    ch: &Characteristic,
    order: i32,
) -> Result<(CMatrix, f64)> {
    let g = genus_of(c)?;
    let skw = skw_series(c, order)?;
    let sfw = sfw_series(c, b, tt, ch, order)?;
    let (rows, rhs) = system_rows(&skw, &sfw, order)?;
    let (kappa, residual) = solve(&rows, &rhs, g)?;
    if !(residual < RESIDUAL_GATE) {
        return Err(Error::IncompatibleSystem(residual));
    }
    Ok((kappa, residual))
}
