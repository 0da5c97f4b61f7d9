//! Theta-constant representations of `kappa` and the identities among them.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::correspondence::{even_char_for_pair, BranchMatching};
use crate::curves::{kleinian_polar, CurvePoint, HyperellipticCurve};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMatrix};
use crate::periods::{self, PeriodBundle, PATH_CLEARANCE};
use crate::theta::{theta_jet, Characteristic, ThetaTable};

/// Below this magnitude on both sides a defect is absolute rather than relative.
pub const ABSOLUTE_FLOOR: f64 = 1e-6;

/// Step of the finite-difference stencil used for the theta side of `Omega`.
pub const OMEGA_STEP: f64 = 1e-4;

/// `|lhs - rhs|` relative to the larger side, or absolute when both are small.
pub fn defect(lhs: Complex64, rhs: Complex64) -> f64 {
    let scale = lhs.norm().max(rhs.norm());
    let d = (lhs - rhs).norm();
    if scale < ABSOLUTE_FLOOR {
        d
    } else {
        d / scale
    }
}

#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub identity: String,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub defect: f64,
    /// Sign in front of the right side, for identities stated up to sign.
    pub sign: Option<i8>,
    /// False when the identity's hypothesis does not hold for this curve.
    pub applicable: bool,
}

impl IdentityCheck {
    pub fn new(identity: impl Into<String>, lhs: Complex64, rhs: Complex64) -> Self {
        Self {
            identity: identity.into(),
            lhs,
            rhs,
            defect: defect(lhs, rhs),
            sign: None,
            applicable: true,
        }
    }

    /// Picks the sign `s` minimizing the defect of `lhs = s * rhs`.
    pub fn signed(identity: impl Into<String>, lhs: Complex64, rhs: Complex64) -> Self {
        let (plus, minus) = (defect(lhs, rhs), defect(lhs, -rhs));
        let s: i8 = if plus <= minus { 1 } else { -1 };
        Self {
            identity: identity.into(),
            lhs,
            rhs: rhs * f64::from(s),
            defect: plus.min(minus),
            sign: Some(s),
            applicable: true,
        }
    }

    pub fn not_applicable(mut self) -> Self {
        self.applicable = false;
        self
    }

    pub fn passes(&self, tol: f64) -> bool {
        !self.applicable || self.defect < tol
    }
}

#[derive(Debug, Clone, Default)]
pub struct IdentityDefects {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityDefects {
    pub fn push(&mut self, c: IdentityCheck) {
        self.checks.push(c);
    }

    pub fn get(&self, identity: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.identity == identity)
    }

    /// Largest defect among applicable checks.
    pub fn max_defect(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.applicable)
            .map(|c| c.defect)
            .fold(0.0, f64::max)
    }

    pub fn extend(&mut self, other: IdentityDefects) {
        self.checks.extend(other.checks);
    }
}

fn require_genus(c: &HyperellipticCurve, g: usize) -> Result<()> {
    if c.genus() != g {
        return Err(Error::UnsupportedGenus(c.genus()));
    }
    Ok(())
}

fn sym2(a: Complex64, b: Complex64, d: Complex64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, b, d])
}

/// `e_i e_j (e_k + e_m + e_n) + e_k e_m e_n` over the complementary indices.
fn pair_symmetric_function(e: &[Complex64], i: usize, j: usize) -> Complex64 {
    let rest: Vec<Complex64> = (0..e.len()).filter(|&k| k != i && k != j).map(|k| e[k]).collect();
    e[i] * e[j] * rest.iter().sum::<Complex64>() + rest.iter().product::<Complex64>()
}

/// `kappa` from the even characteristic of the branch pair `{i, j}`.
pub fn kappa_even_pair(
    c: &HyperellipticCurve,
    b: &PeriodBundle,
    tt: &ThetaTable,
    m: &BranchMatching,
    i: usize,
    j: usize,
) -> Result<CMatrix> {
    require_genus(c, 2)?;
    let e = &b.branch_points;
    let ch = even_char_for_pair(m, i, j)?;
    let entry = tt.entry(&ch);
    let w = b.inv_two_omega();
    let hess = CMatrix::from_fn(2, 2, |r, s| entry.jet.hessian(r, s) / entry.jet.value);
    let wp = sym2(pair_symmetric_function(e, i, j), -e[i] * e[j], e[i] + e[j]);
    Ok(wp.scale(-0.5) - (w.transpose() * hess * w).scale(0.5))
}

fn even_sums(tt: &ThetaTable) -> (Complex64, Complex64, Complex64) {
    let mut s = (cr(0.0), cr(0.0), cr(0.0));
    for t in tt.even() {
        let d = t.dir();
        s.0 += d.t11 / t.jet.value;
        s.1 += d.t12 / t.jet.value;
        s.2 += d.t22 / t.jet.value;
    }
    s
}

/// `kappa` from the sum over all ten even characteristics.
pub fn kappa_even_sum(c: &HyperellipticCurve, tt: &ThetaTable) -> Result<CMatrix> {
    require_genus(c, 2)?;
    let (l2, l3, l4) = (c.lambda(2), c.lambda(3), c.lambda(4));
    let (s11, s12, s22) = even_sums(tt);
    Ok(sym2(l2 * 4.0, l3, l4 * 4.0).scale(1.0 / 80.0) - sym2(s11, s12, s22).scale(1.0 / 20.0))
}

/// `kappa` from the odd characteristic matched to branch point `i`.
pub fn kappa_odd_single(
    c: &HyperellipticCurve,
    b: &PeriodBundle,
    tt: &ThetaTable,
    m: &BranchMatching,
    ch: &Characteristic,
) -> Result<CMatrix> {
    require_genus(c, 2)?;
    if *ch == m.gamma {
        return Err(Error::GammaCharacteristic);
    }
    let i = m.branch_of(ch).ok_or_else(|| {
        Error::InvalidInput(format!("{ch} is not an odd characteristic of a finite branch point"))
    })?;
    let ei = b.branch_points[i];
    let (l3, l4) = (c.lambda(3), c.lambda(4));
    let d = tt.entry(ch).dir();
    let a = d.t222 / d.t2;
    let bb = d.t122 / d.t2;
    let cc = d.t112 / d.t2;
    let k22 = l4 / 24.0 - ei / 6.0 - a / 6.0;
    let k12 = -l4 * ei / 24.0 - ei * ei / 3.0 - ei * a / 12.0 - bb / 4.0;
    let k11 = -l3 * ei / 8.0 - l4 * ei * ei * (5.0 / 24.0) - ei.powi(3) * (7.0 / 6.0)
        - cc / 2.0
        - ei * bb / 2.0
        - ei * ei * a / 6.0;
    Ok(sym2(k11, k12, k22))
}

/// Sums of `Theta_112 / Theta_2`, `Theta_122 / Theta_2`, `Theta_222 / Theta_2`
/// over the five odd characteristics other than `gamma`.
pub fn odd_sums(tt: &ThetaTable, m: &BranchMatching) -> (Complex64, Complex64, Complex64) {
    let mut s = (cr(0.0), cr(0.0), cr(0.0));
    for p in &m.pairs {
        let d = tt.entry(&p.ch).dir();
        s.0 += d.t112 / d.t2;
        s.1 += d.t122 / d.t2;
        s.2 += d.t222 / d.t2;
    }
    s
}

/// `kappa` from the sums over the five odd characteristics.
pub fn kappa_odd_sum(c: &HyperellipticCurve, tt: &ThetaTable, m: &BranchMatching) -> Result<CMatrix> {
    require_genus(c, 2)?;
    let (l2, l3, l4) = (c.lambda(2), c.lambda(3), c.lambda(4));
    let (s112, s122, s222) = odd_sums(tt, m);
    let k22 = l4 / 20.0 - s222 / 30.0;
    let k12 = l3 / 40.0 - l4 * l4 / 800.0 - s122 / 20.0 + l4 * s222 / 1200.0;
    let k11 = l2 * (3.0 / 40.0) - l4 * l3 / 400.0 + l4.powi(3) / 8000.0 - s112 / 10.0
        + l4 * s122 / 200.0
        - l4 * l4 * s222 / 12000.0;
    Ok(sym2(k11, k12, k22))
}

/// The odd-sum representation with the `lambda_4` terms dropped.
pub fn kappa_odd_sum_reduced(c: &HyperellipticCurve, tt: &ThetaTable, m: &BranchMatching) -> Result<CMatrix> {
    require_genus(c, 2)?;
    let (l2, l3) = (c.lambda(2), c.lambda(3));
    let (s112, s122, s222) = odd_sums(tt, m);
    Ok(sym2(l2 * 3.0, l3, cr(0.0)).scale(1.0 / 40.0)
        - sym2(s112 * 2.0, s122, s222 * (2.0 / 3.0)).scale(1.0 / 20.0))
}

/// Every theta-constant route to `kappa` side by side.
#[derive(Debug, Clone)]
pub struct KappaReport {
    pub kappa_direct: CMatrix,
    pub kappa_by_even_pair: Vec<((usize, usize), CMatrix)>,
    pub kappa_even_sum: CMatrix,
    pub kappa_by_odd: Vec<(usize, Characteristic, CMatrix)>,
    pub kappa_odd_sum: CMatrix,
    /// Filled in by the caller when the expansion route ran.
    pub kappa_expansion: Option<CMatrix>,
    /// Route label and max-norm deviation from `kappa_direct`.
    pub defects: Vec<(String, f64)>,
}

impl KappaReport {
    pub fn max_defect(&self) -> f64 {
        self.defects.iter().map(|d| d.1).fold(0.0, f64::max)
    }

    /// Every route matrix with its label, `kappa_direct` first.
    pub fn routes(&self) -> Vec<(String, &CMatrix)> {
        let mut out = vec![("direct".to_string(), &self.kappa_direct)];
        for ((i, j), k) in &self.kappa_by_even_pair {
            out.push((format!("even_pair({i},{j})"), k));
        }
        out.push(("even_sum".into(), &self.kappa_even_sum));
        for (i, _, k) in &self.kappa_by_odd {
            out.push((format!("odd({i})"), k));
        }
        out.push(("odd_sum".into(), &self.kappa_odd_sum));
        if let Some(k) = &self.kappa_expansion {
            out.push(("expansion".into(), k));
        }
        out
    }

    /// Largest max-norm gap between any two routes.
    pub fn max_pairwise_gap(&self) -> f64 {
        let routes = self.routes();
        let mut worst: f64 = 0.0;
        for (a, (_, ka)) in routes.iter().enumerate() {
            for (_, kb) in &routes[a + 1..] {
                worst = worst.max(linalg::max_abs(&(*ka - *kb)));
            }
        }
        worst
    }

    pub fn set_expansion(&mut self, k: CMatrix) {
        let d = linalg::max_abs(&(&k - &self.kappa_direct));
        self.defects.push(("expansion".into(), d));
        self.kappa_expansion = Some(k);
    }
}

pub fn kappa_report(
    c: &HyperellipticCurve,
    b: &PeriodBundle,
    tt: &ThetaTable,
    m: &BranchMatching,
) -> Result<KappaReport> {
    require_genus(c, 2)?;
    let kd = b.kappa.clone();
    let mut defects = Vec::new();
    let gap = |k: &CMatrix| linalg::max_abs(&(k - &kd));
    let mut by_pair = Vec::new();
    for p in &m.even_pairs {
        let k = kappa_even_pair(c, b, tt, m, p.i, p.j)?;
        defects.push((format!("even_pair({},{})", p.i, p.j), gap(&k)));
        by_pair.push(((p.i, p.j), k));
    }
    let even_sum = kappa_even_sum(c, tt)?;
    defects.push(("even_sum".into(), gap(&even_sum)));
    let mut by_odd = Vec::new();
    for p in &m.pairs {
        let k = kappa_odd_single(c, b, tt, m, &p.ch)?;
        defects.push((format!("odd({})", p.branch_index), gap(&k)));
        by_odd.push((p.branch_index, p.ch, k));
    }
    let odd_sum = kappa_odd_sum(c, tt, m)?;
    defects.push(("odd_sum".into(), gap(&odd_sum)));
    Ok(KappaReport {
        kappa_direct: kd,
        kappa_by_even_pair: by_pair,
        kappa_even_sum: even_sum,
        kappa_by_odd: by_odd,
        kappa_odd_sum: odd_sum,
        kappa_expansion: None,
        defects,
    })
}

/// True when `lambda_4` vanishes relative to the curve's coefficient scale.
pub fn lambda4_vanishes(c: &HyperellipticCurve) -> bool {
    let scale = 1.0 + c.lambda_free().iter().map(|l| l.norm()).fold(0.0, f64::max);
    c.lambda(4).norm() <= 1e-10 * scale
}

/// Thomae-type identities among the theta-constant sums.
pub fn thomae_defects(
    c: &HyperellipticCurve,
    tt: &ThetaTable,
    m: &BranchMatching,
) -> Result<IdentityDefects> {
    require_genus(c, 2)?;
    let (s112, s122, s222) = odd_sums(tt, m);
    let (e11, e12, e22) = even_sums(tt);
    let mut out = IdentityDefects::default();
    out.push(IdentityCheck::new("thomae.v", s222, e22 * 1.5));
    let reduced = lambda4_vanishes(c);
    let second = IdentityCheck::new("thomae.lambda3", s122 * 4.0 - e12 * 4.0, c.lambda(3));
    let third = IdentityCheck::new("thomae.lambda2", s112 * 4.0 - e11 * 2.0, c.lambda(2));
    for chk in [second, third] {
        out.push(if reduced { chk } else { chk.not_applicable() });
    }
    Ok(out)
}

/// `theta_1''' / theta_1'` against the sum of `theta_k'' / theta_k` over the even characteristics.
pub fn thomae_elliptic(tt: &ThetaTable) -> Result<IdentityDefects> {
    if tt.genus() != 1 {
        return Err(Error::UnsupportedGenus(tt.genus()));
    }
    let (odd, rest) = elliptic_parts(tt);
    let mut out = IdentityDefects::default();
    out.push(IdentityCheck::new("thomae.elliptic", odd, rest));
    Ok(out)
}

/// `theta_1''' / theta_1'` and `sum theta_k'' / theta_k` in the normalized variable.
fn elliptic_parts(tt: &ThetaTable) -> (Complex64, Complex64) {
    let odd = tt.odd().next().expect("one odd characteristic");
    let ratio = odd.jet.third(0, 0, 0) / odd.jet.grad[0];
    let even: Complex64 = tt.even().map(|t| t.jet.hessian(0, 0) / t.jet.value).sum();
    (ratio, even)
}

fn char_label(m: &BranchMatching, ch: &Characteristic) -> String {
    match m.branch_of(ch) {
        Some(i) => i.to_string(),
        None => "inf".into(),
    }
}

/// Classical and third-derivative Rosenhain formulas for the 15 odd pairs.
pub fn rosenhain_defects(b: &PeriodBundle, tt: &ThetaTable, m: &BranchMatching) -> Result<IdentityDefects> {
    if b.genus() != 2 {
        return Err(Error::UnsupportedGenus(b.genus()));
    }
    let mut odd: Vec<Characteristic> = m.pairs.iter().map(|p| p.ch).collect();
    odd.push(m.gamma);
    let det_w = linalg::determinant(&b.inv_two_omega());
    let mut out = IdentityDefects::default();
    for a in 0..odd.len() {
        for bi in a + 1..odd.len() {
            let (da, db) = (odd[a], odd[bi]);
            let product: Complex64 = odd
                .iter()
                .filter(|&&k| k != da && k != db)
                .map(|k| tt.entry(&da.add(&db).add(k)).jet.value)
                .product();
            let (ea, eb) = (tt.entry(&da), tt.entry(&db));
            let label = format!("{},{}", char_label(m, &da), char_label(m, &db));
            let classical = ea.jet.grad[0] * eb.jet.grad[1] - ea.jet.grad[1] * eb.jet.grad[0];
            out.push(IdentityCheck::signed(
                format!("rosenhain.classical({label})"),
                classical,
                product * PI * PI,
            ));
            let higher = ea.dir().t222 * eb.dir().t2 - eb.dir().t222 * ea.dir().t2;
            out.push(IdentityCheck::signed(
                format!("rosenhain.higher({label})"),
                higher,
                product * det_w * PI * PI,
            ));
        }
    }
    Ok(out)
}

/// The four even characteristics `delta_a + delta_b + delta_k` of an odd pair.
pub fn rosenhain_even_set(odd: &[Characteristic], a: usize, b: usize) -> Vec<Characteristic> {
    odd.iter()
        .enumerate()
        .filter(|&(k, _)| k != a && k != b)
        .map(|(_, k)| odd[a].add(&odd[b]).add(k))
        .collect()
}

/// `eta / (2 omega)` through the odd theta constant of an elliptic curve.
pub fn weierstrass_kappa(c: &HyperellipticCurve, b: &PeriodBundle, tt: &ThetaTable) -> Result<Complex64> {
    require_genus(c, 1)?;
    let (ratio, _) = elliptic_parts(tt);
    let w = b.omega[(0, 0)];
    Ok(c.lambda(2) / 24.0 - ratio / (w * w * 24.0))
}

/// Weierstrass formulas for `eta` on a genus-1 curve.
pub fn weierstrass_eta(c: &HyperellipticCurve, b: &PeriodBundle, tt: &ThetaTable) -> Result<IdentityDefects> {
    require_genus(c, 1)?;
    let w = b.omega[(0, 0)];
    let eta = b.eta[(0, 0)];
    let (ratio, even) = elliptic_parts(tt);
    let mut out = IdentityDefects::default();
    out.push(IdentityCheck::new(
        "weierstrass.kappa",
        eta / (w * 2.0),
        weierstrass_kappa(c, b, tt)?,
    ));
    let scale = 1.0 + c.lambda_free().iter().map(|l| l.norm()).fold(0.0, f64::max);
    let reduced = c.lambda(2).norm() <= 1e-10 * scale;
    let by_even = -even / (w * 12.0);
    let by_odd = -ratio / (w * 12.0);
    let checks = [
        IdentityCheck::new("weierstrass.eta_even", eta, by_even),
        IdentityCheck::new("weierstrass.eta_odd", eta, by_odd),
        IdentityCheck::new("weierstrass.forms_agree", by_even, by_odd),
    ];
    for chk in checks {
        out.push(if reduced { chk } else { chk.not_applicable() });
    }
    Ok(out)
}

/// `wp_ab` at the half-period of `epsilon_ij` against its algebraic values.
pub fn jacobi_inversion_check(
    b: &PeriodBundle,
    tt: &ThetaTable,
    m: &BranchMatching,
    i: usize,
    j: usize,
) -> Result<IdentityDefects> {
    if b.genus() != 2 {
        return Err(Error::UnsupportedGenus(b.genus()));
    }
    let e = &b.branch_points;
    let ch = even_char_for_pair(m, i, j)?;
    let t = tt.entry(&ch);
    let d = t.dir();
    let k = &b.kappa;
    let p22 = -k[(1, 1)] * 2.0 - d.t22 / t.jet.value;
    let p12 = -k[(0, 1)] * 2.0 - d.t12 / t.jet.value;
    let p11 = -k[(0, 0)] * 2.0 - d.t11 / t.jet.value;
    let polar = kleinian_polar(&b.curve, e[i], e[j]) / ((e[i] - e[j]) * (e[i] - e[j]) * 4.0);
    let symmetric = pair_symmetric_function(e, i, j);
    let mut out = IdentityDefects::default();
    let tag = |s: &str| format!("jacobi.{s}({i},{j})");
    out.push(IdentityCheck::new(tag("p22"), p22, e[i] + e[j]));
    out.push(IdentityCheck::new(tag("p12"), p12, -e[i] * e[j]));
    out.push(IdentityCheck::new(tag("p11"), p11, polar));
    out.push(IdentityCheck::new(tag("p11_symmetric"), p11, symmetric));
    out.push(IdentityCheck::new(tag("polar_symmetric"), polar, symmetric));
    Ok(out)
}

/// Coefficient of `dx dz` in the algebraic bi-differential at `Q = (x, y)`, `R = (z, w)`.
pub fn omega_algebraic(c: &HyperellipticCurve, kappa: &CMatrix, q: &CurvePoint, r: &CurvePoint) -> Complex64 {
    let (x, y, z, w) = (q.x, q.y, r.x, r.y);
    let g = c.genus();
    let polar = (y * w * 2.0 + kleinian_polar(c, x, z)) / ((x - z) * (x - z) * 4.0 * y * w);
    let mut quad = cr(0.0);
    for i in 0..g {
        for j in 0..g {
            quad += kappa[(i, j)] * x.powi(i as i32) * z.powi(j as i32);
        }
    }
    polar + quad * 2.0 / (y * w)
}

/// Points `x + d` with `y` continued along the straight segment from `base`.
fn nearby(b: &PeriodBundle, base: &CurvePoint, d: Complex64, tol: f64) -> Result<(Vec<Complex64>, CurvePoint)> {
    let e = &b.branch_points;
    let to = base.x + d;
    if e.iter().any(|&ek| periods::distance_to_segment(base.x, to, ek) < PATH_CLEARANCE) {
        return Err(Error::StencilDegenerate);
    }
    let g = b.genus();
    let (raw, y) = periods::integrate_polyline(
        e,
        &[base.x, to],
        base.y,
        |x, out| {
            let mut p = cr(1.0);
            for slot in out.iter_mut() {
                *slot = p;
                p *= x;
            }
        },
        g,
        tol,
    )?;
    let w = b.inv_two_omega();
    let v = &w * linalg::CVector::from_column_slice(&raw);
    Ok((v.iter().copied().collect(), CurvePoint { x: to, y, sheet: base.sheet }))
}

/// Coefficient of `dx dz` of `d_Q d_R ln theta[ch](int_R^Q v)` by a mixed
/// central difference with step [`OMEGA_STEP`].
pub fn omega_theta(
    b: &PeriodBundle,
    ch: &Characteristic,
    q: &CurvePoint,
    r: &CurvePoint,
    theta_tol: f64,
) -> Result<Complex64> {
    let quad_tol = b.quad_tol;
    let base = periods::abel_map(&b.curve, b, r, q, quad_tol)?;
    let h = OMEGA_STEP;
    let mut values = [[cr(0.0); 2]; 2];
    let steps = [cr(h), cr(-h)];
    let q_shift: Vec<_> = steps
        .iter()
        .map(|&d| nearby(b, q, d, quad_tol).map(|x| x.0))
        .collect::<Result<_>>()?;
    let r_shift: Vec<_> = steps
        .iter()
        .map(|&d| nearby(b, r, d, quad_tol).map(|x| x.0))
        .collect::<Result<_>>()?;
    for (a, dq) in q_shift.iter().enumerate() {
        for (bb, dr) in r_shift.iter().enumerate() {
            let z: Vec<Complex64> = (0..b.genus())
                .map(|k| base.value[k] + dq[k] - dr[k])
                .collect();
            values[a][bb] = theta_jet(&z, &b.tau, ch, theta_tol)?.value;
        }
    }
    let ratio = values[0][0] * values[1][1] / (values[0][1] * values[1][0]);
    Ok(ratio.ln() / (4.0 * h * h))
}

/// Relative gap between the algebraic and theta-function forms of `Omega(Q, R)`.
pub fn omega_consistency(
    b: &PeriodBundle,
    ch: &Characteristic,
    q: &CurvePoint,
    r: &CurvePoint,
    theta_tol: f64,
) -> Result<IdentityCheck> {
    if !ch.is_odd() {
        return Err(Error::InvalidInput(format!("{ch} is even; an odd characteristic is needed")));
    }
    if (q.x - r.x).norm() < 10.0 * OMEGA_STEP {
        return Err(Error::StencilDegenerate);
    }
    let alg = omega_algebraic(&b.curve, &b.kappa, q, r);
    let th = omega_theta(b, ch, q, r, theta_tol)?;
    Ok(IdentityCheck::new("omega.consistency", alg, th))
}

/// `a_k`-period in `Q` of the algebraic bi-differential, split into the
/// polar part and the `kappa` part; they must cancel.
pub fn omega_normalization(b: &PeriodBundle, r: &CurvePoint, k: usize) -> Result<IdentityCheck> {
    let total = periods::omega_a_period(b, r, k, b.quad_tol)?;
    let kappa_part = kappa_a_period(b, r, k);
    Ok(IdentityCheck::new(
        format!("omega.a_period({k})"),
        total - kappa_part,
        -kappa_part,
    ))
}

fn kappa_a_period(b: &PeriodBundle, r: &CurvePoint, k: usize) -> Complex64 {
    let g = b.genus();
    let mut s = cr(0.0);
    for i in 0..g {
        for j in 0..g {
            s += b.kappa[(i, j)] * r.x.powi(j as i32) * b.omega[(i, k)] * 4.0;
        }
    }
    s / r.y
}
