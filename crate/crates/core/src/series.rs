//! Truncated Laurent series `sum_(k >= lowest) c_k xi^k + O(xi^order)`.
//!
//! Every operation tracks the first unknown exponent exactly, so a
//! coefficient is only ever reported when it is determined by the inputs.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct TruncatedSeries {
    lowest: i32,
    coeffs: Vec<Complex64>,
    order: i32,
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series(")?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                write!(f, "{c} xi^{} + ", self.lowest + k as i32)?;
            }
        }
        write!(f, "O(xi^{}))", self.order)
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl TruncatedSeries {
    /// Coefficients of `xi^lowest, xi^(lowest+1), ...`, known below `xi^order`.
    ///
    /// Coefficients past `order` are dropped; missing ones up to `order` are zero.
    pub fn new(lowest: i32, coeffs: Vec<Complex64>, order: i32) -> Result<Self> {
        if order <= lowest {
            return Err(Error::OrderUnderflow);
        }
        let mut coeffs = coeffs;
        coeffs.resize((order - lowest) as usize, zero());
        Ok(Self { lowest, coeffs, order })
    }

    /// `c xi^k + O(xi^order)`.
    pub fn monomial(k: i32, c: Complex64, order: i32) -> Result<Self> {
        Self::new(k, vec![c], order)
    }

    /// `O(xi^order)`: nothing known yet except that no lower term exists.
    fn unknown_from(order: i32) -> Self {
        Self { lowest: order, coeffs: Vec::new(), order }
    }

    pub fn lowest(&self) -> i32 {
        self.lowest
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    /// Coefficient of `xi^k`; `None` when `k` is at or past the truncation order.
    pub fn coeff(&self, k: i32) -> Option<Complex64> {
        if k >= self.order {
            None
        } else if k < self.lowest {
            Some(zero())
        } else {
            Some(self.coeffs[(k - self.lowest) as usize])
        }
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, &c)| (self.lowest + k as i32, c))
    }

    /// Exponent of the first nonzero known coefficient, or `order` if none.
    pub fn valuation(&self) -> i32 {
        self.coefficients()
            .find(|(_, c)| *c != zero())
            .map_or(self.order, |(k, _)| k)
    }

    fn stripped(&self) -> Self {
        let v = self.valuation();
        if v >= self.order {
            return Self::unknown_from(self.order);
        }
        Self {
            lowest: v,
            coeffs: self.coeffs[(v - self.lowest) as usize..].to_vec(),
            order: self.order,
        }
    }

    /// Drops coefficients at or above `order`.
    pub fn truncate(&self, order: i32) -> Result<Self> {
        let order = order.min(self.order);
        let s = self.stripped();
        if order <= s.lowest {
            return Err(Error::OrderUnderflow);
        }
        Self::new(s.lowest, s.coeffs, order)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            lowest: self.lowest,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            order: self.order,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let order = self.order.min(other.order);
        let lowest = self.lowest.min(other.lowest);
        if order <= lowest {
            return Err(Error::OrderUnderflow);
        }
        let coeffs = (lowest..order)
            .map(|k| self.coeff(k).unwrap_or_default() + other.coeff(k).unwrap_or_default())
            .collect();
        Ok(Self { lowest, coeffs, order })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Adds `c xi^k`.
    pub fn add_term(&self, k: i32, c: Complex64) -> Result<Self> {
        self.add(&Self::monomial(k, c, self.order.max(k + 1))?)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = (self.stripped(), other.stripped());
        let (va, vb) = (a.valuation(), b.valuation());
        let order = (a.order + vb).min(b.order + va);
        let lowest = va + vb;
        if order <= lowest {
            return Err(Error::OrderUnderflow);
        }
        let n = (order - lowest) as usize;
        let mut coeffs = vec![zero(); n];
        for (i, ca) in a.coeffs.iter().enumerate().take(n) {
            for (j, cb) in b.coeffs.iter().enumerate().take(n - i) {
                coeffs[i + j] += ca * cb;
            }
        }
        Ok(Self { lowest, coeffs, order })
    }

    /// Multiplicative inverse; the leading known nonzero coefficient is the pivot.
    pub fn recip(&self) -> Result<Self> {
        let s = self.stripped();
        if s.coeffs.is_empty() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let n = s.coeffs.len();
        let c0 = s.coeffs[0];
        let mut out = vec![zero(); n];
        out[0] = c0.inv();
        for k in 1..n {
            let acc: Complex64 = (1..=k).map(|j| s.coeffs[j] * out[k - j]).sum();
            out[k] = -acc / c0;
        }
        Ok(Self {
            lowest: -s.lowest,
            coeffs: out,
            order: -s.lowest + n as i32,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.recip()?)
    }

    /// Square root with the principal root of the leading coefficient.
    pub fn sqrt(&self) -> Result<Self> {
        let s = self.stripped();
        if s.coeffs.is_empty() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        if s.lowest % 2 != 0 {
            return Err(Error::SeriesDomain("square root of a series with odd valuation"));
        }
        let n = s.coeffs.len();
        let mut out = vec![zero(); n];
        out[0] = s.coeffs[0].sqrt();
        for k in 1..n {
            let cross: Complex64 = (1..k).map(|j| out[j] * out[k - j]).sum();
            out[k] = (s.coeffs[k] - cross) / (out[0] * 2.0);
        }
        Ok(Self {
            lowest: s.lowest / 2,
            coeffs: out,
            order: s.lowest / 2 + n as i32,
        })
    }

    pub fn differentiate(&self) -> Self {
        Self {
            lowest: self.lowest - 1,
            coeffs: self
                .coefficients()
                .map(|(k, c)| c * f64::from(k))
                .collect(),
            order: self.order - 1,
        }
    }

    /// Antiderivative with zero constant term; fails on a nonzero `xi^(-1)` term.
    pub fn integrate(&self) -> Result<Self> {
        if self.coeff(-1).is_some_and(|c| c != zero()) {
            return Err(Error::SeriesDomain("integral of a series with a residue term"));
        }
        if self.order <= -1 {
            return Err(Error::SeriesDomain("residue term of the integrand is unknown"));
        }
        let coeffs = self
            .coefficients()
            .map(|(k, c)| if k == -1 { zero() } else { c / f64::from(k + 1) })
            .collect();
        Ok(Self {
            lowest: self.lowest + 1,
            coeffs,
            order: self.order + 1,
        })
    }

    /// `self(inner(xi))` for a power series `self` and `inner` with `inner(0) = 0`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let a = self;
        if a.lowest < 0 && a.coefficients().any(|(k, c)| k < 0 && c != zero()) {
            return Err(Error::SeriesDomain("outer series has negative powers"));
        }
        let b = inner.stripped();
        let vb = b.valuation();
        if vb < 1 {
            return Err(Error::SeriesDomain("inner series must vanish at zero"));
        }
        let first = (1..a.order).find(|&k| a.coeff(k).is_some_and(|c| c != zero()));
        let mut order = a.order * vb;
        if let Some(k) = first {
            order = order.min(b.order + (k - 1) * vb);
        }
        let mut acc = Self::new(0, vec![a.coeff(0).unwrap_or_default()], order)?;
        let mut power = b.truncate(order)?;
        for k in 1..a.order {
            if power.valuation() >= order {
                break;
            }
            acc = acc.add(&power.scale(a.coeff(k).unwrap_or_default()))?;
            if k + 1 < a.order {
                power = power.mul(&b)?.truncate(order)?;
            }
        }
        acc.truncate(order)
    }

    pub fn eval(&self, xi: Complex64) -> Complex64 {
        self.coefficients().map(|(k, c)| c * xi.powi(k)).sum()
    }
}

/// `x''' / x' - (3/2) (x'' / x')^2`.
pub fn schwarzian(x: &TruncatedSeries) -> Result<TruncatedSeries> {
    let d1 = x.differentiate();
    let d2 = d1.differentiate();
    let d3 = d2.differentiate();
    let r2 = d2.div(&d1)?;
    let r3 = d3.div(&d1)?;
    r3.sub(&r2.mul(&r2)?.scale(Complex64::new(1.5, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn series(lowest: i32, v: &[f64], order: i32) -> TruncatedSeries {
        TruncatedSeries::new(lowest, v.iter().map(|&x| c(x)).collect(), order).unwrap()
    }

    #[test]
    fn product_of_conjugates() {
        let a = series(0, &[1.0, 1.0], 8);
        let b = series(0, &[1.0, -1.0], 8);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.coeff(0), Some(c(1.0)));
        assert_eq!(p.coeff(1), Some(c(0.0)));
        assert_eq!(p.coeff(2), Some(c(-1.0)));
        assert_eq!(p.coeff(5), Some(c(0.0)));
        assert_eq!(p.order(), 8);
    }

    #[test]
    fn order_bookkeeping_for_shifted_factors() {
        // (xi^-2 + O(xi^3)) * (xi^4 + O(xi^6)): error terms xi^-2 * xi^6 and xi^3 * xi^4.
        let a = series(-2, &[1.0], 3);
        let b = series(4, &[1.0], 6);
        assert_eq!(a.mul(&b).unwrap().order(), 4);
        let r = b.recip().unwrap();
        assert_eq!((r.lowest(), r.order()), (-4, -2));
    }

    #[test]
    fn division_needs_a_known_nonzero_term() {
        let z = series(0, &[0.0, 0.0], 2);
        assert_eq!(series(0, &[1.0], 4).div(&z), Err(Error::ZeroLeadingCoefficient));
    }

    #[test]
    fn sqrt_squares_back() {
        let s = series(0, &[1.0, 0.3, -0.7, 2.0, 0.1], 5);
        let r = s.sqrt().unwrap();
        let back = r.mul(&r).unwrap();
        for k in 0..5 {
            assert!((back.coeff(k).unwrap() - s.coeff(k).unwrap()).norm() < 1e-14);
        }
        assert!(series(1, &[1.0], 4).sqrt().is_err());
    }

    #[test]
    fn derivative_undoes_integral() {
        let s = series(-3, &[2.0, 1.0, 0.0, 4.0, -1.0], 6);
        let back = s.integrate().unwrap().differentiate();
        for k in -3..6 {
            assert_eq!(back.coeff(k), s.coeff(k));
        }
        assert!(series(-1, &[1.0], 3).integrate().is_err());
    }

    #[test]
    fn compose_geometric() {
        // 1 / (1 - y) at y = 2 xi: coefficients 2^k.
        let outer = series(0, &[1.0; 6], 6);
        let inner = series(1, &[2.0], 10);
        let r = outer.compose(&inner).unwrap();
        assert_eq!(r.order(), 6);
        for k in 0..6 {
            assert_eq!(r.coeff(k), Some(c(2f64.powi(k))));
        }
    }

    #[test]
    fn schwarzian_of_inverse_square() {
        let x = series(-2, &[1.0], 12);
        let s = schwarzian(&x).unwrap();
        assert_eq!(s.coeff(-2), Some(c(-1.5)));
        for k in -1..s.order() {
            assert_eq!(s.coeff(k), Some(c(0.0)));
        }
    }

    #[test]
    fn schwarzian_kills_mobius() {
        // (2 xi + 1) / (0.5 xi + 3)
        let num = series(0, &[1.0, 2.0], 14);
        let den = series(0, &[3.0, 0.5], 14);
        let s = schwarzian(&num.div(&den).unwrap()).unwrap();
        for (_, c) in s.coefficients() {
            assert!(c.norm() < 1e-14);
        }
    }
}
