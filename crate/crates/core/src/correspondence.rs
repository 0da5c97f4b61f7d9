//! Odd characteristics matched to finite branch points.
//!
//! For an odd characteristic `delta` attached to the branch point `e`, the
//! ratio `-Theta_1[delta] / Theta_2[delta]` equals `e`. The odd characteristic
//! attached to the point at infinity has `Theta_2 = 0`; it is the
//! characteristic of the vector of Riemann constants, called `gamma` here.
//!
//! Branch indices are 0-based positions in the canonical branch-point order.

use num_complex::Complex64;
use serde::Serialize;

use crate::curves::HyperellipticCurve;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::periods::{self, PeriodBundle};
use crate::theta::{Characteristic, ThetaEntry, ThetaTable};

/// `|Theta_2[delta]|` below this fraction of the largest odd value marks `gamma`.
pub const GAMMA_THRESHOLD: f64 = 1e-8;

/// Largest accepted relative gap between a ratio and its branch point.
pub const MATCH_GATE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct BranchPair {
    pub branch_index: usize,
    #[serde(rename = "char")]
    pub ch: Characteristic,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvenPair {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "char")]
    pub ch: Characteristic,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchMatching {
    pub gamma: Characteristic,
    /// One entry per finite branch point, ordered by branch index.
    pub pairs: Vec<BranchPair>,
    pub even_pairs: Vec<EvenPair>,
}

impl BranchMatching {
    /// The odd characteristic matched to branch point `i`.
    pub fn delta(&self, i: usize) -> Characteristic {
        self.pairs[i].ch
    }

    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    /// Branch index matched to `ch`, or `None` for `gamma` and even characteristics.
    pub fn branch_of(&self, ch: &Characteristic) -> Option<usize> {
        self.pairs.iter().find(|p| p.ch == *ch).map(|p| p.branch_index)
    }
}

/// Matches the five non-`gamma` odd characteristics to the branch points.
pub fn bolza_match(tt: &ThetaTable, c: &HyperellipticCurve) -> Result<BranchMatching> {
    if c.genus() != 2 || tt.genus() != 2 {
        return Err(Error::UnsupportedGenus(c.genus()));
    }
    let e = c.sorted_branch_points();
    let odd: Vec<_> = tt.odd().collect();
    let scale = odd.iter().map(|t| t.dir().t2.norm()).fold(0.0, f64::max);
    let (small, large): (Vec<&&ThetaEntry>, Vec<&&ThetaEntry>) = odd
        .iter()
        .partition(|t| t.dir().t2.norm() < GAMMA_THRESHOLD * scale);
    if small.len() != 1 {
        return Err(Error::NoGamma(small.len()));
    }
    let gamma = small[0].ch;

    let mut slots: Vec<Option<BranchPair>> = vec![None; e.len()];
    for t in large {
        let ratio = -t.dir().t1 / t.dir().t2;
        let (k, dist) = e
            .iter()
            .enumerate()
            .map(|(k, &ek)| (k, (ratio - ek).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("five branch points");
        let residual = dist / e[k].norm().max(1.0);
        if residual > MATCH_GATE {
            return Err(Error::MatchResidual { index: k, residual });
        }
        if slots[k].is_some() {
            return Err(Error::AmbiguousMatching(k));
        }
        slots[k] = Some(BranchPair { branch_index: k, ch: t.ch, residual });
    }
    let pairs: Vec<BranchPair> = slots.into_iter().map(|s| s.expect("bijection")).collect();

    let mut even_pairs = Vec::with_capacity(10);
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            let ch = pairs[i].ch.add(&pairs[j].ch).add(&gamma);
            even_pairs.push(EvenPair { i, j, ch });
        }
    }
    Ok(BranchMatching { gamma, pairs, even_pairs })
}

/// `delta_i + delta_j + gamma`, the even characteristic of the pair `{i, j}`.
pub fn even_char_for_pair(m: &BranchMatching, i: usize, j: usize) -> Result<Characteristic> {
    let n = m.pairs.len();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidInput(format!(
            "branch pair ({i}, {j}) needs two distinct indices below {n}"
        )));
    }
    Ok(m.delta(i).add(&m.delta(j)).add(&m.gamma))
}

/// Distance from `w` to the lattice `Z^g + tau Z^g`.
pub fn lattice_distance(tau: &CMatrix, w: &[Complex64]) -> f64 {
    let g = w.len();
    let y = linalg::imag_part(tau);
    let yinv = y.try_inverse().expect("Im tau positive definite");
    let m: Vec<f64> = (0..g)
        .map(|i| (0..g).map(|j| yinv[(i, j)] * w[j].im).sum::<f64>().round())
        .collect();
    (0..g)
        .map(|i| {
            let r = w[i] - (0..g).map(|j| tau[(i, j)] * m[j]).sum::<Complex64>();
            (r - r.re.round()).norm()
        })
        .fold(0.0, f64::max)
}

/// For each branch point, the lattice distance between
/// `(2 omega)^(-1) int_(infinity)^(e_i) u + K` and the half-period of `delta_i`,
/// with `K` the half-period of `gamma`.
pub fn abel_consistency(b: &PeriodBundle, m: &BranchMatching, tol: f64) -> Result<Vec<f64>> {
    let k_vec = m.gamma.half_period(&b.tau);
    (0..m.pairs.len())
        .map(|i| {
            let a = periods::abel_from_infinity(b, i, tol)?;
            let target = m.delta(i).half_period(&b.tau);
            let w: Vec<Complex64> = (0..a.len()).map(|k| a[k] + k_vec[k] - target[k]).collect();
            Ok(lattice_distance(&b.tau, &w))
        })
        .collect()
}
