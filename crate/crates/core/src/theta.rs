//! Riemann theta functions with half-integer characteristics, genus 1 and 2.
//!
//! `theta[eps](z) = sum_n exp(i pi (n+eps)^T tau (n+eps) + 2 pi i (n+eps)^T (z + eps'))`.
//! Derivatives are taken term by term, so every partial of order up to three
//! comes out of the same lattice sum.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::{Serialize, SerializeSeq, Serializer};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMatrix};
use crate::periods::PeriodBundle;

pub const DEFAULT_THETA_TOL: f64 = 1e-14;

/// Below this smallest eigenvalue of `Im tau` the table carries a conditioning warning.
pub const CONDITIONING_WARNING: f64 = 0.05;

/// A half-integer characteristic, stored as the bits `2 eps` and `2 eps'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Characteristic {
    genus: u8,
    eps: [u8; 2],
    eps_prime: [u8; 2],
}

impl Characteristic {
    /// Builds from `2 eps` and `2 eps'`, each entry 0 or 1.
    pub fn new(eps: &[u8], eps_prime: &[u8]) -> Result<Self> {
        let g = eps.len();
        if g == 0 || g > 2 || eps_prime.len() != g {
            return Err(Error::InvalidInput(format!(
                "characteristic needs two rows of equal length 1 or 2, got {} and {}",
                eps.len(),
                eps_prime.len()
            )));
        }
        if eps.iter().chain(eps_prime).any(|&b| b > 1) {
            return Err(Error::InvalidInput(
                "characteristic entries must be 0 or 1 (twice 0 or 1/2)".into(),
            ));
        }
        let mut ch = Self { genus: g as u8, eps: [0; 2], eps_prime: [0; 2] };
        ch.eps[..g].copy_from_slice(eps);
        ch.eps_prime[..g].copy_from_slice(eps_prime);
        Ok(ch)
    }

    pub fn zero(g: usize) -> Self {
        Self::new(&vec![0; g], &vec![0; g]).expect("genus 1 or 2")
    }

    /// All `4^g` characteristics, ordered by their code.
    pub fn all(g: usize) -> Vec<Self> {
        (0..1u32 << (2 * g))
            .map(|code| {
                let bit = |k: usize| ((code >> (2 * g - 1 - k)) & 1) as u8;
                let eps: Vec<u8> = (0..g).map(bit).collect();
                let eps_p: Vec<u8> = (g..2 * g).map(bit).collect();
                Self::new(&eps, &eps_p).expect("valid bits")
            })
            .collect()
    }

    pub fn genus(&self) -> usize {
        self.genus as usize
    }

    pub fn eps_bits(&self) -> &[u8] {
        &self.eps[..self.genus()]
    }

    pub fn eps_prime_bits(&self) -> &[u8] {
        &self.eps_prime[..self.genus()]
    }

    pub fn eps(&self) -> Vec<f64> {
        self.eps_bits().iter().map(|&b| 0.5 * f64::from(b)).collect()
    }

    pub fn eps_prime(&self) -> Vec<f64> {
        self.eps_prime_bits().iter().map(|&b| 0.5 * f64::from(b)).collect()
    }

    /// `4 eps^T eps' mod 2`: 0 for even, 1 for odd.
    pub fn parity(&self) -> u8 {
        self.eps_bits()
            .iter()
            .zip(self.eps_prime_bits())
            .map(|(a, b)| a * b)
            .sum::<u8>()
            % 2
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == 1
    }

    /// Entrywise sum reduced mod 1.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.genus, other.genus, "characteristics of different genus");
        let mut out = *self;
        for k in 0..2 {
            out.eps[k] ^= other.eps[k];
            out.eps_prime[k] ^= other.eps_prime[k];
        }
        out
    }

    /// The integers `(2 eps | 2 eps')`.
    pub fn code(&self) -> Vec<u8> {
        self.eps_bits().iter().chain(self.eps_prime_bits()).copied().collect()
    }

    /// Half-period `tau eps + eps'` represented by this characteristic.
    pub fn half_period(&self, tau: &CMatrix) -> Vec<Complex64> {
        let e = self.eps();
        let ep = self.eps_prime();
        (0..self.genus())
            .map(|i| {
                (0..self.genus()).map(|j| tau[(i, j)] * e[j]).sum::<Complex64>() + ep[i]
            })
            .collect()
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |bits: &[u8]| bits.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "[{} | {}]", row(self.eps_bits()), row(self.eps_prime_bits()))
    }
}

impl FromStr for Characteristic {
    type Err = Error;

    /// Accepts `"1 1 | 0 1"`, `"[1,1|0,1]"` or the bare digits `"1101"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse characteristic {s:?}"));
        let body = s.trim().trim_start_matches('[').trim_end_matches(']');
        let digits = |part: &str| -> Result<Vec<u8>> {
            part.chars()
                .filter(|ch| !ch.is_whitespace() && *ch != ',')
                .map(|ch| ch.to_digit(10).map(|d| d as u8).ok_or_else(bad))
                .collect()
        };
        let (eps, eps_p) = match body.split_once('|') {
            Some((l, r)) => (digits(l)?, digits(r)?),
            None => {
                let all = digits(body)?;
                if all.len() % 2 != 0 {
                    return Err(bad());
                }
                let (l, r) = all.split_at(all.len() / 2);
                (l.to_vec(), r.to_vec())
            }
        };
        Self::new(&eps, &eps_p)
    }
}

impl Serialize for Characteristic {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let code = self.code();
        let mut seq = serializer.serialize_seq(Some(code.len()))?;
        for b in code {
            seq.serialize_element(&b)?;
        }
        seq.end()
    }
}

/// Odd and even characteristics of genus `g`.
pub fn classify_characteristics(g: usize) -> (Vec<Characteristic>, Vec<Characteristic>) {
    Characteristic::all(g).into_iter().partition(|ch| ch.is_odd())
}

fn check_siegel(tau: &CMatrix) -> Result<f64> {
    let ev = linalg::imag_part_eigenvalues(tau);
    let min = ev[0];
    if !(min > 0.0) {
        return Err(Error::NotSiegelPoint(min));
    }
    Ok(min)
}

fn imag_parts(tau: &CMatrix, z: &[Complex64]) -> (DMatrix<f64>, Vec<f64>) {
    let y = DMatrix::from_fn(tau.nrows(), tau.ncols(), |i, j| 0.5 * (tau[(i, j)].im + tau[(j, i)].im));
    let yinv = y.clone().try_inverse().expect("positive definite");
    let g = z.len();
    let center = (0..g)
        .map(|i| -(0..g).map(|j| yinv[(i, j)] * z[j].im).sum::<f64>())
        .collect();
    (y, center)
}

/// Radius (in the `Im tau` norm around the dominant lattice point) beyond which
/// the discarded tail, including third-derivative growth, is below `tol`
/// relative to the largest term.
pub fn lattice_radius(tau: &CMatrix, z: &[Complex64], tol: f64) -> Result<f64> {
    let lam = check_siegel(tau)?;
    let (_, center) = imag_parts(tau, z);
    let offset = center.iter().fold(0.0_f64, |m, c| m.max(c.abs())) + 1.0;
    let g = z.len() as i32;
    let mut r: f64 = 1.0;
    loop {
        let reach = r / lam.sqrt() + offset;
        let growth = (2.0 * PI * reach).powi(3).max(1.0);
        let count = (2.0 * reach + 3.0).powi(g) * 2.0;
        if (-PI * r * r).exp() * growth * count < tol || r > 60.0 {
            return Ok(r);
        }
        r += 0.25;
    }
}

/// Value and partials up to order three of one theta function at one point.
#[derive(Debug, Clone)]
pub struct ThetaJet {
    pub value: Complex64,
    pub grad: Vec<Complex64>,
    /// Row-major `g x g`.
    pub hess: Vec<Complex64>,
    /// Row-major `g x g x g`.
    pub third: Vec<Complex64>,
    pub radius: f64,
}

impl ThetaJet {
    pub fn hessian(&self, i: usize, j: usize) -> Complex64 {
        let g = self.grad.len();
        self.hess[i * g + j]
    }

    pub fn third(&self, i: usize, j: usize, k: usize) -> Complex64 {
        let g = self.grad.len();
        self.third[(i * g + j) * g + k]
    }

    pub fn partial(&self, deriv: &[usize]) -> Complex64 {
        match *deriv {
            [] => self.value,
            [i] => self.grad[i],
            [i, j] => self.hessian(i, j),
            [i, j, k] => self.third(i, j, k),
            _ => panic!("derivative order above three"),
        }
    }

    /// `a . grad`.
    pub fn d1(&self, a: &[Complex64]) -> Complex64 {
        a.iter().zip(&self.grad).map(|(x, y)| x * y).sum()
    }

    /// `a^T H b`.
    pub fn d2(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let g = a.len();
        let mut s = cr(0.0);
        for i in 0..g {
            for j in 0..g {
                s += a[i] * b[j] * self.hessian(i, j);
            }
        }
        s
    }

    /// Third-derivative tensor contracted with `a, b, d`.
    pub fn d3(&self, a: &[Complex64], b: &[Complex64], d: &[Complex64]) -> Complex64 {
        let g = a.len();
        let mut s = cr(0.0);
        for i in 0..g {
            for j in 0..g {
                for k in 0..g {
                    s += a[i] * b[j] * d[k] * self.third(i, j, k);
                }
            }
        }
        s
    }
}

/// Lattice sum for arbitrary real characteristic vectors.
///
/// `radius` overrides the automatic truncation radius.
pub fn theta_jet_general(
    z: &[Complex64],
    tau: &CMatrix,
    eps: &[f64],
    eps_prime: &[f64],
    radius: Option<f64>,
    tol: f64,
) -> Result<ThetaJet> {
    let g = z.len();
    if g == 0 || tau.nrows() != g || tau.ncols() != g || eps.len() != g || eps_prime.len() != g {
        return Err(Error::InvalidInput("theta argument dimensions disagree".into()));
    }
    check_siegel(tau)?;
    let r = match radius {
        Some(r) => r,
        None => lattice_radius(tau, z, tol)?,
    };
    let (y, center) = imag_parts(tau, z);
    let yinv = y.clone().try_inverse().expect("positive definite");

    // Box around the ellipsoid (m - c)^T Y (m - c) <= r^2 in the shifted lattice m = n + eps.
    let lo: Vec<i64> = (0..g)
        .map(|i| (center[i] - eps[i] - r * yinv[(i, i)].sqrt()).floor() as i64)
        .collect();
    let hi: Vec<i64> = (0..g)
        .map(|i| (center[i] - eps[i] + r * yinv[(i, i)].sqrt()).ceil() as i64)
        .collect();

    let shift: Vec<Complex64> = (0..g).map(|i| z[i] + eps_prime[i]).collect();
    let two_pi_i = c(0.0, 2.0 * PI);
    let mut value = cr(0.0);
    let mut grad = vec![cr(0.0); g];
    let mut hess = vec![cr(0.0); g * g];
    let mut third = vec![cr(0.0); g * g * g];
    let mut n = lo.clone();
    let mut m = vec![0.0; g];
    let mut f = vec![cr(0.0); g];
    'outer: loop {
        for i in 0..g {
            m[i] = n[i] as f64 + eps[i];
        }
        let mut q = 0.0;
        for i in 0..g {
            for j in 0..g {
                q += (m[i] - center[i]) * y[(i, j)] * (m[j] - center[j]);
            }
        }
        if q <= r * r {
            let mut phase = cr(0.0);
            for i in 0..g {
                for j in 0..g {
                    phase += tau[(i, j)] * (m[i] * m[j]);
                }
            }
            phase *= c(0.0, PI);
            for i in 0..g {
                phase += two_pi_i * m[i] * shift[i];
            }
            let t = phase.exp();
            for i in 0..g {
                f[i] = two_pi_i * m[i];
            }
            value += t;
            for i in 0..g {
                let ti = t * f[i];
                grad[i] += ti;
                for j in 0..g {
                    let tij = ti * f[j];
                    hess[i * g + j] += tij;
                    for k in 0..g {
                        third[(i * g + j) * g + k] += tij * f[k];
                    }
                }
            }
        }
        // Odometer over the box, last index fastest.
        let mut k = g;
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            if n[k] < hi[k] {
                n[k] += 1;
                for (nj, &lj) in n.iter_mut().zip(&lo).skip(k + 1) {
                    *nj = lj;
                }
                break;
            }
        }
    }
    Ok(ThetaJet { value, grad, hess, third, radius: r })
}

/// All partials up to order three of `theta[ch]` at `z`.
pub fn theta_jet(z: &[Complex64], tau: &CMatrix, ch: &Characteristic, tol: f64) -> Result<ThetaJet> {
    if ch.genus() != z.len() {
        return Err(Error::InvalidInput("characteristic genus differs from z".into()));
    }
    theta_jet_general(z, tau, &ch.eps(), &ch.eps_prime(), None, tol)
}

/// One partial derivative of `theta[ch]` at `z`; `deriv` lists the
/// differentiation indices (at most three).
pub fn theta_eval(
    z: &[Complex64],
    tau: &CMatrix,
    ch: &Characteristic,
    deriv: &[usize],
    tol: f64,
) -> Result<Complex64> {
    if deriv.len() > 3 || deriv.iter().any(|&i| i >= z.len()) {
        return Err(Error::InvalidInput(format!("unsupported derivative {deriv:?}")));
    }
    Ok(theta_jet(z, tau, ch, tol)?.partial(deriv))
}

/// Directional derivatives at zero along the winding vectors `U`, `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Directional {
    pub t1: Complex64,
    pub t2: Complex64,
    pub t11: Complex64,
    pub t12: Complex64,
    pub t22: Complex64,
    pub t112: Complex64,
    pub t122: Complex64,
    pub t222: Complex64,
}

impl Directional {
    fn from_jet(jet: &ThetaJet, u: &[Complex64], v: &[Complex64]) -> Self {
        Self {
            t1: jet.d1(u),
            t2: jet.d1(v),
            t11: jet.d2(u, u),
            t12: jet.d2(u, v),
            t22: jet.d2(v, v),
            t112: jet.d3(u, u, v),
            t122: jet.d3(u, v, v),
            t222: jet.d3(v, v, v),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThetaEntry {
    pub ch: Characteristic,
    pub jet: ThetaJet,
    /// Present for genus 2 only.
    pub directional: Option<Directional>,
}

impl ThetaEntry {
    /// Directional data; panics on genus 1, where no `V` exists.
    pub fn dir(&self) -> &Directional {
        self.directional.as_ref().expect("directional derivatives need genus 2")
    }
}

/// Theta constants and their partials at zero for every characteristic.
#[derive(Debug, Clone)]
pub struct ThetaTable {
    pub tau: CMatrix,
    pub winding: Vec<Vec<Complex64>>,
    pub entries: Vec<ThetaEntry>,
    pub lattice_radius: f64,
    pub tol: f64,
    pub im_tau_min_eigenvalue: f64,
    pub conditioning_warning: bool,
}

impl ThetaTable {
    pub fn genus(&self) -> usize {
        self.tau.nrows()
    }

    pub fn entry(&self, ch: &Characteristic) -> &ThetaEntry {
        self.entries
            .iter()
            .find(|e| e.ch == *ch)
            .expect("table holds every characteristic")
    }

    pub fn odd(&self) -> impl Iterator<Item = &ThetaEntry> {
        self.entries.iter().filter(|e| e.ch.is_odd())
    }

    pub fn even(&self) -> impl Iterator<Item = &ThetaEntry> {
        self.entries.iter().filter(|e| !e.ch.is_odd())
    }
}

/// Builds the table of theta constants for a period bundle.
pub fn theta_table(b: &PeriodBundle, tol: f64) -> Result<ThetaTable> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("theta tolerance {tol:e} must be positive")));
    }
    let g = b.genus();
    let tau = linalg::symmetrize(&b.tau);
    let lam = check_siegel(&tau)?;
    let zero = vec![cr(0.0); g];
    let radius = lattice_radius(&tau, &zero, tol)?;
    let mut entries = Vec::with_capacity(1 << (2 * g));
    for ch in Characteristic::all(g) {
        let jet = theta_jet_general(&zero, &tau, &ch.eps(), &ch.eps_prime(), Some(radius), tol)?;
        let directional = (g == 2).then(|| Directional::from_jet(&jet, &b.winding[0], &b.winding[1]));
        entries.push(ThetaEntry { ch, jet, directional });
    }
    Ok(ThetaTable {
        tau,
        winding: b.winding.clone(),
        entries,
        lattice_radius: radius,
        tol,
        im_tau_min_eigenvalue: lam,
        conditioning_warning: lam < CONDITIONING_WARNING,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau2() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.3, 1.1), c(0.2, 0.4), c(0.2, 0.4), c(-0.1, 0.9)])
    }

    #[test]
    fn counts_by_parity() {
        let (odd, even) = classify_characteristics(2);
        assert_eq!((odd.len(), even.len()), (6, 10));
        let (odd, even) = classify_characteristics(1);
        assert_eq!((odd.len(), even.len()), (1, 3));
        assert_eq!(odd[0].code(), vec![1, 1]);
    }

    #[test]
    fn addition_is_self_inverse() {
        for a in Characteristic::all(2) {
            assert_eq!(a.add(&a), Characteristic::zero(2));
        }
    }

    #[test]
    fn parse_forms() {
        let want = Characteristic::new(&[1, 1], &[0, 1]).unwrap();
        for s in ["1 1 | 0 1", "[1,1|0,1]", "1101", " [1 1|0 1] "] {
            assert_eq!(s.parse::<Characteristic>().unwrap(), want, "{s}");
        }
        for s in ["", "12", "111", "1 1 | 0", "a b", "2 0 | 0 0"] {
            assert!(s.parse::<Characteristic>().is_err(), "{s}");
        }
        assert_eq!(want.to_string().parse::<Characteristic>().unwrap(), want);
    }

    #[test]
    fn odd_genus_one_vanishes() {
        let tau = CMatrix::from_element(1, 1, c(0.0, 1.0));
        let ch = Characteristic::new(&[1], &[1]).unwrap();
        let v = theta_eval(&[cr(0.0)], &tau, &ch, &[], 1e-14).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn matches_wide_brute_force() {
        let tau = CMatrix::from_element(1, 1, c(0.0, 1.0));
        let ch = Characteristic::zero(1);
        let v = theta_eval(&[cr(0.0)], &tau, &ch, &[], 1e-14).unwrap();
        let brute: f64 = (-50..=50).map(|n: i32| (-PI * f64::from(n * n)).exp()).sum();
        assert!((v - brute).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_siegel() {
        let tau = CMatrix::from_element(1, 1, c(0.0, -1.0));
        let ch = Characteristic::zero(1);
        assert!(matches!(
            theta_eval(&[cr(0.0)], &tau, &ch, &[], 1e-14),
            Err(Error::NotSiegelPoint(_))
        ));
    }

    #[test]
    fn gradient_matches_central_difference() {
        let tau = tau2();
        let z = [c(0.1, -0.05), c(-0.2, 0.1)];
        let h = 1e-5;
        for ch in Characteristic::all(2) {
            let jet = theta_jet(&z, &tau, &ch, 1e-14).unwrap();
            for i in 0..2 {
                let mut zp = z;
                let mut zm = z;
                zp[i] += h;
                zm[i] -= h;
                let fd = (theta_eval(&zp, &tau, &ch, &[], 1e-14).unwrap()
                    - theta_eval(&zm, &tau, &ch, &[], 1e-14).unwrap())
                    / (2.0 * h);
                let scale = jet.grad[i].norm().max(1.0);
                assert!((fd - jet.grad[i]).norm() < 1e-8 * scale, "{ch} {i}");
            }
        }
    }

    #[test]
    fn mixed_partials_are_symmetric() {
        let tau = tau2();
        let z = [c(0.05, 0.02), c(0.3, -0.1)];
        let ch = Characteristic::new(&[1, 0], &[1, 1]).unwrap();
        let jet = theta_jet(&z, &tau, &ch, 1e-14).unwrap();
        assert!((jet.hessian(0, 1) - jet.hessian(1, 0)).norm() < 1e-12);
        assert!((jet.third(0, 0, 1) - jet.third(1, 0, 0)).norm() < 1e-12);
        assert!((jet.third(0, 1, 1) - jet.third(1, 1, 0)).norm() < 1e-12);
    }

    #[test]
    fn doubling_radius_is_invisible() {
        let tau = tau2();
        let z = [c(0.1, 0.2), c(-0.3, 0.1)];
        let ch = Characteristic::new(&[0, 1], &[1, 0]).unwrap();
        let tol = 1e-14;
        let a = theta_jet(&z, &tau, &ch, tol).unwrap();
        let b = theta_jet_general(&z, &tau, &ch.eps(), &ch.eps_prime(), Some(2.0 * a.radius), tol)
            .unwrap();
        assert!((a.value - b.value).norm() < tol * (1.0 + a.value.norm()));
        assert!((a.third(1, 1, 1) - b.third(1, 1, 1)).norm() < tol * (1.0 + a.third(1, 1, 1).norm()));
    }
}
