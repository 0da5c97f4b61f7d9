//! Homology basis, period matrices and the Abel map.
//!
//! Branch points are sorted canonically and joined by the polyline
//! `e_1 -> e_2 -> ... -> e_(2g+1)`, which is x-monotone and therefore simple.
//! The loop around the segment `(e_p, e_(p+1))` has period
//! `2 * int_(e_p)^(e_(p+1)) dx / y` on a sheet that is defined exactly (no
//! continuation) by a product of square roots whose cuts point away from the
//! segment. With `a_k` the loop around `(e_(2k-1), e_(2k))` and `b_k` the sum
//! of the loops around `(e_(2m), e_(2m+1))` for `m >= k`, the only unknown is
//! the orientation of each loop; it is fixed by requiring the Legendre
//! relation, which holds for exactly one orientation pattern up to a global
//! sign.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::curves::{kleinian_polar, CurvePoint, HyperellipticCurve};
use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMatrix};
use crate::quadrature;

/// Minimum distance a regular path keeps from every branch point.
pub const PATH_CLEARANCE: f64 = 1e-3;

/// Largest Legendre defect accepted for a computed homology basis.
pub const LEGENDRE_GATE: f64 = 1e-6;

/// Square root with its branch cut along the ray `{t * dir : t > 0}`.
pub(crate) fn sqrt_cut(w: Complex64, dir: Complex64) -> Complex64 {
    (-w / dir).sqrt() * (-dir).sqrt()
}

/// Unit vector from the nearest point of segment `[a, b]` to `p`.
fn away_from_segment(a: Complex64, b: Complex64, p: Complex64) -> Complex64 {
    let near = closest_point(a, b, p);
    let d = p - near;
    if d.norm() == 0.0 {
        // On the segment: any direction off the line.
        let t = (b - a) / (b - a).norm();
        return t * Complex64::i();
    }
    d / d.norm()
}

fn closest_point(a: Complex64, b: Complex64, p: Complex64) -> Complex64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a) * ab.conj()).re / len2;
    a + ab * t.clamp(0.0, 1.0)
}

pub(crate) fn distance_to_segment(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    (p - closest_point(a, b, p)).norm()
}

/// `x^(i-1)` for `i = 1..=g` followed by the Baker numerators `R_j(x) / 4`.
pub(crate) fn numerators(curve: &HyperellipticCurve, x: Complex64, out: &mut [Complex64]) {
    let g = curve.genus();
    let mut p = cr(1.0);
    for slot in out.iter_mut().take(g) {
        *slot = p;
        p *= x;
    }
    for j in 1..=g {
        out[g + j - 1] = crate::curves::baker_numerator(curve, j, x) / 4.0;
    }
}

/// The straight segment between two branch points with its exact sheet.
#[derive(Debug, Clone)]
pub struct BranchSegment {
    start: Complex64,
    end: Complex64,
    others: Vec<(Complex64, Complex64)>,
}

impl BranchSegment {
    pub fn new(e: &[Complex64], p: usize, q: usize) -> Result<Self> {
        let (a, b) = (e[p], e[q]);
        let mut others = Vec::new();
        for (k, &ek) in e.iter().enumerate() {
            if k == p || k == q {
                continue;
            }
            if distance_to_segment(a, b, ek) < PATH_CLEARANCE * (1.0 + (b - a).norm()) {
                return Err(Error::HomologyConstructionFailure(format!(
                    "branch point {k} lies on the segment ({p}, {q})"
                )));
            }
            others.push((ek, away_from_segment(a, b, ek)));
        }
        Ok(Self { start: a, end: b, others })
    }

    /// `x = m + h cos(theta)`, running from `end` (theta = 0) to `start` (theta = pi).
    pub fn x_at(&self, theta: f64) -> Complex64 {
        let m = (self.start + self.end) * 0.5;
        let h = (self.end - self.start) * 0.5;
        m + h * theta.cos()
    }

    /// `y / (h sin(theta))`, analytic and nonvanishing on the open segment.
    fn reduced_y(&self, x: Complex64) -> Complex64 {
        self.others
            .iter()
            .fold(c(0.0, 2.0), |acc, &(ek, d)| acc * sqrt_cut(x - ek, d))
    }

    /// The sheet of `y` used for this segment's integrals.
    pub fn y_at(&self, theta: f64) -> Complex64 {
        let h = (self.end - self.start) * 0.5;
        h * theta.sin() * self.reduced_y(self.x_at(theta))
    }

    /// `int_start^end N(x) / y dx` for a vector numerator.
    pub fn integrate<F>(&self, mut numer: F, dim: usize, tol: f64) -> Result<Vec<Complex64>>
    where
        F: FnMut(Complex64, &mut [Complex64]),
    {
        let mut buf = vec![cr(0.0); dim];
        quadrature::integrate(
            |theta, out| {
                let x = self.x_at(theta);
                let s = self.reduced_y(x);
                numer(x, &mut buf);
                for (o, v) in out.iter_mut().zip(&buf) {
                    *o = v / s;
                }
            },
            0.0,
            PI,
            dim,
            tol,
        )
    }
}

/// Loops and cycles of the built-in homology construction, expressed in
/// elementary loops around consecutive branch-point pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct HomologySpec {
    /// Elementary loop `p` encircles `(e_p, e_(p+1))` (0-based, canonical order).
    pub pair_loops: Vec<(usize, usize)>,
    pub a_cycles: Vec<Vec<usize>>,
    pub b_cycles: Vec<Vec<usize>>,
    /// Sign relating each elementary loop to its doubled segment integral.
    pub orientation: Vec<i8>,
}

impl HomologySpec {
    pub fn canonical(g: usize) -> Self {
        let pair_loops = (0..2 * g).map(|p| (p, p + 1)).collect();
        let a_cycles = (0..g).map(|k| vec![2 * k]).collect();
        let b_cycles = (0..g)
            .map(|k| (k..g).map(|m| 2 * m + 1).collect())
            .collect();
        Self {
            pair_loops,
            a_cycles,
            b_cycles,
            orientation: vec![1; 2 * g],
        }
    }

    /// Intersection numbers of the elementary loops when consecutive loops
    /// meet with index `+1` and the rest are disjoint.
    fn loop_intersection(p: usize, q: usize) -> i32 {
        if q == p + 1 {
            1
        } else if p == q + 1 {
            -1
        } else {
            0
        }
    }

    /// Intersection matrix of `(a_1..a_g, b_1..b_g)`.
    pub fn intersection_matrix(&self) -> Vec<Vec<i32>> {
        let cycles: Vec<&Vec<usize>> = self.a_cycles.iter().chain(&self.b_cycles).collect();
        cycles
            .iter()
            .map(|ci| {
                cycles
                    .iter()
                    .map(|cj| {
                        ci.iter()
                            .flat_map(|&p| cj.iter().map(move |&q| Self::loop_intersection(p, q)))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// True when the intersection matrix is `[[0, 1], [-1, 0]]` in `g x g` blocks.
    pub fn is_canonical(&self) -> bool {
        let g = self.a_cycles.len();
        let m = self.intersection_matrix();
        (0..2 * g).all(|i| {
            (0..2 * g).all(|j| {
                let want = if i < g && j == i + g {
                    1
                } else if i >= g && j + g == i {
                    -1
                } else {
                    0
                };
                m[i][j] == want
            })
        })
    }
}

/// Period data of a genus 1 or 2 hyperelliptic curve.
#[derive(Debug, Clone)]
pub struct PeriodBundle {
    pub curve: HyperellipticCurve,
    /// Branch points in canonical order; every index elsewhere refers to this list.
    pub branch_points: Vec<Complex64>,
    pub homology: HomologySpec,
    pub omega: CMatrix,
    pub omega_prime: CMatrix,
    pub eta: CMatrix,
    pub eta_prime: CMatrix,
    pub tau: CMatrix,
    pub kappa: CMatrix,
    /// Columns of `(2 omega)^(-1)`.
    pub winding: Vec<Vec<Complex64>>,
    pub legendre_defect: f64,
    pub tau_asymmetry: f64,
    pub kappa_asymmetry: f64,
    pub im_tau_min_eigenvalue: f64,
    /// Max-norm gap between the integrated `eta'` and `2 kappa omega' - (i pi / 2) omega^(-T)`.
    pub eta_prime_defect: f64,
    pub quad_tol: f64,
    /// Doubled segment integrals per elementary loop (rows) and differential (columns).
    pub loop_periods: Vec<Vec<Complex64>>,
}

impl PeriodBundle {
    pub fn genus(&self) -> usize {
        self.curve.genus()
    }

    /// `(2 omega)^(-1)`.
    pub fn inv_two_omega(&self) -> CMatrix {
        linalg::inverse(&self.omega.scale(2.0)).expect("omega checked invertible")
    }

    pub fn lambda(&self, k: usize) -> Complex64 {
        self.curve.lambda(k)
    }
}

/// Max-norm of `M J M^T + (i pi / 2) J` with `M = [[omega, omega'], [eta, eta']]`.
pub fn legendre_defect_of(omega: &CMatrix, omega_p: &CMatrix, eta: &CMatrix, eta_p: &CMatrix) -> f64 {
    let g = omega.nrows();
    let m = linalg::block2(omega, omega_p, eta, eta_p);
    let j = linalg::symplectic(g);
    let d = &m * &j * m.transpose() + j * c(0.0, PI / 2.0);
    linalg::max_abs(&d)
}

pub fn legendre_defect(b: &PeriodBundle) -> f64 {
    legendre_defect_of(&b.omega, &b.omega_prime, &b.eta, &b.eta_prime)
}

struct Assembled {
    omega: CMatrix,
    omega_prime: CMatrix,
    eta: CMatrix,
    eta_prime: CMatrix,
}

fn assemble(loops: &[Vec<Complex64>], basis: &HomologySpec, signs: &[i8], g: usize) -> Assembled {
    let cycle_period = |cycle: &[usize], d: usize| -> Complex64 {
        cycle
            .iter()
            .map(|&p| loops[p][d] * f64::from(signs[p]))
            .sum()
    };
    let mut omega = CMatrix::zeros(g, g);
    let mut omega_prime = CMatrix::zeros(g, g);
    let mut eta = CMatrix::zeros(g, g);
    let mut eta_prime = CMatrix::zeros(g, g);
    for i in 0..g {
        for k in 0..g {
            omega[(i, k)] = cycle_period(&basis.a_cycles[k], i) * 0.5;
            omega_prime[(i, k)] = cycle_period(&basis.b_cycles[k], i) * 0.5;
            eta[(i, k)] = -cycle_period(&basis.a_cycles[k], g + i) * 0.5;
            eta_prime[(i, k)] = -cycle_period(&basis.b_cycles[k], g + i) * 0.5;
        }
    }
    Assembled { omega, omega_prime, eta, eta_prime }
}

/// Computes `omega, omega', eta, eta', tau, kappa` and their diagnostics.
pub fn compute_periods(curve: &HyperellipticCurve, quad_tol: f64) -> Result<PeriodBundle> {
    if !(1e-14..=1e-6).contains(&quad_tol) {
        return Err(Error::InvalidInput(format!(
            "quad_tol {quad_tol:e} outside [1e-14, 1e-6]"
        )));
    }
    let g = curve.genus();
    let e = curve.sorted_branch_points();
    let mut basis = HomologySpec::canonical(g);
    debug_assert!(basis.is_canonical());

    let mut loops = Vec::with_capacity(2 * g);
    for &(p, q) in &basis.pair_loops {
        let seg = BranchSegment::new(&e, p, q)?;
        let vals = seg.integrate(|x, out| numerators(curve, x, out), 2 * g, quad_tol)?;
        loops.push(vals.into_iter().map(|v| v * 2.0).collect::<Vec<_>>());
    }

    let mut best: Option<(f64, Vec<i8>)> = None;
    for mask in 0..(1u32 << (2 * g - 1)) {
        let signs: Vec<i8> = (0..2 * g)
            .map(|p| if p > 0 && mask & (1 << (p - 1)) != 0 { -1 } else { 1 })
            .collect();
        let a = assemble(&loops, &basis, &signs, g);
        let d = legendre_defect_of(&a.omega, &a.omega_prime, &a.eta, &a.eta_prime);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, signs));
        }
    }
    let (defect, signs) = best.expect("at least one orientation pattern");
    if !(defect < LEGENDRE_GATE) {
        return Err(Error::HomologyConstructionFailure(format!(
            "no loop orientation satisfies the Legendre relation (best defect {defect:e})"
        )));
    }
    basis.orientation = signs.clone();
    let Assembled { omega, omega_prime, eta, eta_prime } = assemble(&loops, &basis, &signs, g);

    let omega_inv = linalg::inverse(&omega)?;
    let tau = &omega_inv * &omega_prime;
    let tau_asymmetry = linalg::asymmetry(&tau);
    let im_eigs = linalg::imag_part_eigenvalues(&tau);
    let im_tau_min_eigenvalue = im_eigs[0];
    if tau_asymmetry > LEGENDRE_GATE || !(im_tau_min_eigenvalue > 0.0) {
        return Err(Error::HomologyConstructionFailure(format!(
            "tau asymmetry {tau_asymmetry:e}, min eigenvalue of Im tau {im_tau_min_eigenvalue:e}"
        )));
    }
    let inv_two_omega = omega_inv.scale(0.5);
    let kappa_raw = &eta * &inv_two_omega;
    let kappa_asymmetry = linalg::asymmetry(&kappa_raw);
    let kappa = linalg::symmetrize(&kappa_raw);

    let eta_prime_formula =
        (&kappa * &omega_prime).scale(2.0) - omega_inv.transpose() * c(0.0, PI / 2.0);
    let eta_prime_defect = linalg::max_abs(&(&eta_prime - eta_prime_formula));

    let winding = (0..g)
        .map(|k| inv_two_omega.column(k).iter().copied().collect())
        .collect();

    Ok(PeriodBundle {
        curve: curve.clone(),
        branch_points: e,
        homology: basis,
        legendre_defect: defect,
        omega,
        omega_prime,
        eta,
        eta_prime,
        tau,
        kappa,
        winding,
        tau_asymmetry,
        kappa_asymmetry,
        im_tau_min_eigenvalue,
        eta_prime_defect,
        quad_tol,
        loop_periods: loops,
    })
}

/// A regular segment `[from, to]` with `y` continued from a given start value.
struct RegularSegment {
    from: Complex64,
    to: Complex64,
    cuts: Vec<(Complex64, Complex64)>,
    sign: f64,
}

impl RegularSegment {
    fn new(e: &[Complex64], from: Complex64, to: Complex64, start_y: Complex64) -> Self {
        let cuts = e.iter().map(|&ek| (ek, away_from_segment(from, to, ek))).collect();
        let mut seg = Self { from, to, cuts, sign: 1.0 };
        let y0 = seg.y_at_x(from);
        seg.sign = if (y0 - start_y).norm() <= (y0 + start_y).norm() { 1.0 } else { -1.0 };
        seg
    }

    fn y_at_x(&self, x: Complex64) -> Complex64 {
        self.cuts
            .iter()
            .fold(cr(2.0 * self.sign), |acc, &(ek, d)| acc * sqrt_cut(x - ek, d))
    }

    fn integrate<F>(&self, mut numer: F, dim: usize, tol: f64) -> Result<Vec<Complex64>>
    where
        F: FnMut(Complex64, &mut [Complex64]),
    {
        let dx = self.to - self.from;
        let mut buf = vec![cr(0.0); dim];
        quadrature::integrate(
            |t, out| {
                let x = self.from + dx * t;
                let y = self.y_at_x(x);
                numer(x, &mut buf);
                for (o, v) in out.iter_mut().zip(&buf) {
                    *o = v * dx / y;
                }
            },
            0.0,
            1.0,
            dim,
            tol,
        )
    }
}

/// `int_from^(e_k) N(x) / y dx` along a straight segment ending at a branch point.
fn integrate_to_branch_point<F>(
    e: &[Complex64],
    from: Complex64,
    from_y: Complex64,
    k: usize,
    mut numer: F,
    dim: usize,
    tol: f64,
) -> Result<Vec<Complex64>>
where
    F: FnMut(Complex64, &mut [Complex64]),
{
    let ek = e[k];
    let span = from - ek;
    // x = e_k + span s^2; y = s * reduced(s).
    let cuts: Vec<(Complex64, Complex64)> = e
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, &ej)| (ej, away_from_segment(ek, from, ej)))
        .collect();
    let own = -span / span.norm();
    let reduced = |s: f64| -> Complex64 {
        let x = ek + span * (s * s);
        cuts.iter()
            .fold(sqrt_cut(span, own) * 2.0, |acc, &(ej, d)| acc * sqrt_cut(x - ej, d))
    };
    let y1 = reduced(1.0);
    let sign = if (y1 - from_y).norm() <= (y1 + from_y).norm() { 1.0 } else { -1.0 };
    let mut buf = vec![cr(0.0); dim];
    let vals = quadrature::integrate(
        |s, out| {
            let x = ek + span * (s * s);
            numer(x, &mut buf);
            let r = reduced(s) * sign;
            for (o, v) in out.iter_mut().zip(&buf) {
                *o = v * span * 2.0 / r;
            }
        },
        0.0,
        1.0,
        dim,
        tol,
    )?;
    // Computed from e_k to `from`; flip.
    Ok(vals.into_iter().map(|v| -v).collect())
}

fn segment_is_clear(e: &[Complex64], a: Complex64, b: Complex64, exclude: Option<usize>) -> bool {
    e.iter()
        .enumerate()
        .filter(|&(k, _)| Some(k) != exclude)
        .all(|(_, &ek)| distance_to_segment(a, b, ek) >= PATH_CLEARANCE)
}

/// Straight path from `from` to `to`, with detour waypoints inserted around
/// branch points closer than [`PATH_CLEARANCE`].
pub fn plan_path(
    e: &[Complex64],
    from: Complex64,
    to: Complex64,
    exclude: Option<usize>,
) -> Result<Vec<Complex64>> {
    plan_path_depth(e, from, to, exclude, 0).ok_or_else(|| Error::PathThroughBranchPoint {
        from: from.to_string(),
        to: to.to_string(),
    })
}

fn plan_path_depth(
    e: &[Complex64],
    from: Complex64,
    to: Complex64,
    exclude: Option<usize>,
    depth: usize,
) -> Option<Vec<Complex64>> {
    if segment_is_clear(e, from, to, exclude) {
        return Some(vec![from, to]);
    }
    if depth >= 3 {
        return None;
    }
    let offender = e
        .iter()
        .enumerate()
        .filter(|&(k, _)| Some(k) != exclude)
        .map(|(_, &ek)| ek)
        .find(|&ek| distance_to_segment(from, to, ek) < PATH_CLEARANCE)?;
    let foot = closest_point(from, to, offender);
    let dir = to - from;
    let normal = if dir.norm() == 0.0 { cr(1.0) } else { dir / dir.norm() * Complex64::i() };
    let scale = 1.0 + dir.norm();
    for step in [0.02, 0.05, 0.1, 0.2, 0.5, 1.0] {
        for side in [1.0, -1.0] {
            let w = foot + normal * (side * step * scale);
            if e.iter().any(|&ek| (ek - w).norm() < PATH_CLEARANCE) {
                continue;
            }
            let first = plan_path_depth(e, from, w, None, depth + 1);
            let second = plan_path_depth(e, w, to, exclude, depth + 1);
            if let (Some(mut p1), Some(p2)) = (first, second) {
                p1.pop();
                p1.extend(p2);
                return Some(p1);
            }
        }
    }
    None
}

/// Integrates `N(x) dx / y` along a polyline, continuing `y` across vertices.
///
/// Returns the integral and the value of `y` at the final vertex.
pub fn integrate_polyline<F>(
    e: &[Complex64],
    vertices: &[Complex64],
    start_y: Complex64,
    mut numer: F,
    dim: usize,
    tol: f64,
) -> Result<(Vec<Complex64>, Complex64)>
where
    F: FnMut(Complex64, &mut [Complex64]),
{
    let mut total = vec![cr(0.0); dim];
    let mut y = start_y;
    for w in vertices.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let seg = RegularSegment::new(e, w[0], w[1], y);
        let vals = seg.integrate(&mut numer, dim, tol)?;
        for (t, v) in total.iter_mut().zip(vals) {
            *t += v;
        }
        y = seg.y_at_x(w[1]);
    }
    Ok((total, y))
}

/// Result of an Abel-map evaluation.
#[derive(Debug, Clone)]
pub struct AbelImage {
    /// `(2 omega)^(-1) int u`.
    pub value: Vec<Complex64>,
    /// `int u` before normalization.
    pub raw: Vec<Complex64>,
    /// Polyline vertices in the x-plane.
    pub path: Vec<Complex64>,
    /// Branch point used to reach the sheet of the end point, if the
    /// straight continuation arrived on the opposite sheet.
    pub sheet_switch: Option<usize>,
}

fn holomorphic_numerators(g: usize) -> impl FnMut(Complex64, &mut [Complex64]) {
    move |x, out| {
        let mut p = cr(1.0);
        for slot in out.iter_mut().take(g) {
            *slot = p;
            p *= x;
        }
    }
}

fn normalize(b: &PeriodBundle, raw: &[Complex64]) -> Vec<Complex64> {
    let w = b.inv_two_omega();
    let v = linalg::CVector::from_column_slice(raw);
    (w * v).iter().copied().collect()
}

/// `(2 omega)^(-1) int_from^to u` along a planned path with sheet tracking.
pub fn abel_map(
    curve: &HyperellipticCurve,
    b: &PeriodBundle,
    from: &CurvePoint,
    to: &CurvePoint,
    tol: f64,
) -> Result<AbelImage> {
    let g = curve.genus();
    let e = &b.branch_points;
    if from.x == to.x && from.y == to.y {
        return Ok(AbelImage {
            value: vec![cr(0.0); g],
            raw: vec![cr(0.0); g],
            path: vec![from.x],
            sheet_switch: None,
        });
    }
    for p in [from, to] {
        if e.iter().any(|&ek| (ek - p.x).norm() < PATH_CLEARANCE) {
            return Err(Error::PathThroughBranchPoint {
                from: from.x.to_string(),
                to: to.x.to_string(),
            });
        }
    }
    let path = plan_path(e, from.x, to.x, None)?;
    let (mut raw, end_y) = integrate_polyline(e, &path, from.y, holomorphic_numerators(g), g, tol)?;

    let mut sheet_switch = None;
    if (end_y - to.y).norm() > (end_y + to.y).norm() {
        // Arrived on the other sheet: go to a branch point and come back.
        let mut order: Vec<usize> = (0..e.len()).collect();
        order.sort_by(|&i, &j| (e[i] - to.x).norm().total_cmp(&(e[j] - to.x).norm()));
        let k = order
            .into_iter()
            .find(|&k| segment_is_clear(e, to.x, e[k], Some(k)))
            .ok_or_else(|| Error::PathThroughBranchPoint {
                from: from.x.to_string(),
                to: to.x.to_string(),
            })?;
        let excursion =
            integrate_to_branch_point(e, to.x, end_y, k, holomorphic_numerators(g), g, tol)?;
        for (r, v) in raw.iter_mut().zip(excursion) {
            *r += v * 2.0;
        }
        sheet_switch = Some(k);
    }
    Ok(AbelImage {
        value: normalize(b, &raw),
        raw,
        path,
        sheet_switch,
    })
}

/// Abel image of a closed polyline starting and ending at `start`.
pub fn abel_loop(
    b: &PeriodBundle,
    start: &CurvePoint,
    vertices: &[Complex64],
    tol: f64,
) -> Result<(Vec<Complex64>, Complex64)> {
    let g = b.genus();
    let mut path = vec![start.x];
    path.extend_from_slice(vertices);
    path.push(start.x);
    for w in path.windows(2) {
        if !segment_is_clear(&b.branch_points, w[0], w[1], None) {
            return Err(Error::PathThroughBranchPoint {
                from: w[0].to_string(),
                to: w[1].to_string(),
            });
        }
    }
    let (raw, end_y) =
        integrate_polyline(&b.branch_points, &path, start.y, holomorphic_numerators(g), g, tol)?;
    Ok((normalize(b, &raw), end_y))
}

/// `(2 omega)^(-1) int_(infinity)^(e_k, 0) u`, regularized at infinity by `x = 1 / xi^2`.
pub fn abel_from_infinity(b: &PeriodBundle, k: usize, tol: f64) -> Result<Vec<Complex64>> {
    let g = b.genus();
    let e = &b.branch_points;
    let radius = 2.0 * e.iter().map(|z| z.norm()).fold(0.0, f64::max) + 1.0;
    let target = e[k];
    let dir = if target.norm() > 1e-12 { target / target.norm() } else { cr(1.0) };
    let x_far = dir * radius;
    let xi_far = (cr(1.0) / x_far).sqrt();

    // u_i = -xi^(2g-2i) / s(xi) dxi, s = prod sqrt(1 - e_j xi^2), |e_j xi^2| <= 1/2.
    let s_of = |xi: Complex64| -> Complex64 {
        e.iter().fold(cr(1.0), |acc, &ej| acc * (cr(1.0) - ej * xi * xi).sqrt())
    };
    let head = quadrature::integrate(
        |t, out| {
            let xi = xi_far * t;
            let s = s_of(xi);
            for i in 1..=g {
                out[i - 1] = -xi.powi((2 * g - 2 * i) as i32) / s * xi_far;
            }
        },
        0.0,
        1.0,
        g,
        tol,
    )?;
    let y_far = xi_far.powi(-(2 * g as i32 + 1)) * s_of(xi_far) * 2.0;

    let path = plan_path(e, x_far, target, Some(k))?;
    let (mid, y_mid) = if path.len() > 2 {
        let body = &path[..path.len() - 1];
        integrate_polyline(e, body, y_far, holomorphic_numerators(g), g, tol)?
    } else {
        (vec![cr(0.0); g], y_far)
    };
    let last_from = path[path.len() - 2];
    let tail = integrate_to_branch_point(e, last_from, y_mid, k, holomorphic_numerators(g), g, tol)?;
    let raw: Vec<Complex64> = head
        .iter()
        .zip(&mid)
        .zip(&tail)
        .map(|((a, m), t)| a + m + t)
        .collect();
    Ok(normalize(b, &raw))
}

/// `a_k`-period in `Q` of the algebraic bi-differential with `R = (z, w)` fixed,
/// as a coefficient of `dz`.
pub fn omega_a_period(b: &PeriodBundle, r: &CurvePoint, k: usize, tol: f64) -> Result<Complex64> {
    let g = b.genus();
    let curve = &b.curve;
    let basis = &b.homology;
    let mut total = cr(0.0);
    // The 1/(2(x - z)^2) part is exact and integrates to zero on a closed loop.
    for &p in &basis.a_cycles[k] {
        let (lo, hi) = basis.pair_loops[p];
        let seg = BranchSegment::new(&b.branch_points, lo, hi)?;
        let z = r.x;
        let v = seg.integrate(
            |x, out| out[0] = kleinian_polar(curve, x, z) / ((x - z) * (x - z) * 4.0),
            1,
            tol,
        )?;
        total += v[0] * 2.0 * f64::from(basis.orientation[p]);
    }
    let mut kappa_part = cr(0.0);
    for i in 0..g {
        for j in 0..g {
            kappa_part += b.kappa[(i, j)] * r.x.powi(j as i32) * b.omega[(i, k)] * 2.0;
        }
    }
    Ok((total + kappa_part * 2.0) / r.y)
}
