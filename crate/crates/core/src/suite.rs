//! Seeded random curves and the identity verification suite.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::correspondence::{bolza_match, BranchMatching, MATCH_GATE};
use crate::curves::{sort_canonical, CurvePoint, HyperellipticCurve};
use crate::error::{Error, Result};
use crate::expansion::{kappa_from_expansion, DEFAULT_ORDER};
use crate::identities::{
    self, defect, jacobi_inversion_check, kappa_report, omega_algebraic, omega_consistency,
    omega_normalization, rosenhain_defects, thomae_defects, thomae_elliptic, weierstrass_eta,
    IdentityCheck,
};
use crate::linalg::max_abs;
use crate::periods::{compute_periods, distance_to_segment, PeriodBundle};
use crate::quadrature::DEFAULT_QUAD_TOL;
use crate::report::{cx, Cx, CurveReport};
use crate::theta::{theta_table, ThetaTable, DEFAULT_THETA_TOL};

pub const ANNULUS_INNER: f64 = 0.3;
pub const ANNULUS_OUTER: f64 = 2.0;
pub const MIN_SEPARATION: f64 = 0.2;
/// Non-adjacent branch points stay this far from the period polyline.
const POLYLINE_CLEARANCE: f64 = 0.05;

pub const DEFAULT_IDENTITY_TOL: f64 = 1e-8;
pub const DEFAULT_OMEGA_TOL: f64 = 1e-5;
pub const DEFAULT_EXPANSION_TOL: f64 = 1e-6;
pub const LEGENDRE_TOL: f64 = 1e-9;
pub const TAU_SYMMETRY_TOL: f64 = 1e-10;
pub const ROUTE_AGREEMENT_TOL: f64 = 1e-7;
pub const OMEGA_SYMMETRY_TOL: f64 = 1e-12;
pub const OMEGA_PERIOD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveConstraint {
    None,
    /// All branch points real.
    Real,
    /// Branch points sum to zero, which kills the top free coefficient
    /// (`lambda_4` in genus 2, `lambda_2` in genus 1).
    Centered,
}

fn clear_of_polyline(e: &[Complex64]) -> bool {
    let mut sorted = e.to_vec();
    sort_canonical(&mut sorted);
    for k in 0..sorted.len() - 1 {
        for (m, &p) in sorted.iter().enumerate() {
            if m != k && m != k + 1 && distance_to_segment(sorted[k], sorted[k + 1], p) < POLYLINE_CLEARANCE {
                return false;
            }
        }
    }
    true
}

/// Branch points in the annulus with pairwise separation at least [`MIN_SEPARATION`].
pub fn random_branch_points(rng: &mut impl Rng, count: usize, constraint: CurveConstraint) -> Vec<Complex64> {
    loop {
        let mut e: Vec<Complex64> = Vec::with_capacity(count);
        let mut attempts = 0;
        while e.len() < count && attempts < 10_000 {
            attempts += 1;
            let r = rng.random_range(ANNULUS_INNER..ANNULUS_OUTER);
            let z = if constraint == CurveConstraint::Real {
                Complex64::new(if rng.random_bool(0.5) { r } else { -r }, 0.0)
            } else {
                Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
            };
            if e.iter().all(|w| (w - z).norm() >= MIN_SEPARATION) {
                e.push(z);
            }
        }
        if e.len() < count {
            continue;
        }
        if constraint == CurveConstraint::Centered {
            let shift = e.iter().sum::<Complex64>() / count as f64;
            for z in &mut e {
                *z -= shift;
            }
        }
        if clear_of_polyline(&e) {
            return e;
        }
    }
}

pub fn random_curve(rng: &mut impl Rng, genus: usize, constraint: CurveConstraint) -> Result<HyperellipticCurve> {
    if genus != 1 && genus != 2 {
        return Err(Error::UnsupportedGenus(genus));
    }
    HyperellipticCurve::from_branch_points(&random_branch_points(rng, 2 * genus + 1, constraint))
}

/// Labelled random curves: `genus2` of genus 2 then `genus1` of genus 1.
///
/// Every third curve is centered and every fourth of the rest is real.
pub fn suite_curves(seed: u64, genus2: usize, genus1: usize) -> Vec<(String, HyperellipticCurve)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (genus, count) in [(2, genus2), (1, genus1)] {
        for k in 0..count {
            let constraint = match k % 3 {
                0 => CurveConstraint::Centered,
                _ if k % 4 == 1 => CurveConstraint::Real,
                _ => CurveConstraint::None,
            };
            let curve = random_curve(&mut rng, genus, constraint).expect("generated points are separated");
            out.push((format!("g{genus}-{k}"), curve));
        }
    }
    out
}

/// Random points for bi-differential checks, kept [`MIN_SEPARATION`] away
/// from the period polyline so the collapsed cycle integrals stay smooth.
pub fn random_point_pairs(rng: &mut impl Rng, c: &HyperellipticCurve, count: usize) -> Vec<(CurvePoint, CurvePoint)> {
    let e = c.sorted_branch_points();
    let sample = |rng: &mut ChaCha8Rng| loop {
        let x = Complex64::from_polar(rng.random_range(0.1..1.8), rng.random_range(0.0..std::f64::consts::TAU));
        if e.windows(2).all(|w| distance_to_segment(w[0], w[1], x) > MIN_SEPARATION) {
            let sheet = if rng.random_bool(0.5) { 1 } else { -1 };
            return CurvePoint::on_sheet(c, x, sheet);
        }
    };
    let mut inner = ChaCha8Rng::seed_from_u64(rng.random());
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let q = sample(&mut inner);
        let r = sample(&mut inner);
        if (q.x - r.x).norm() > 0.3 {
            out.push((q, r));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Quick,
    Full,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub tol: f64,
    pub omega_tol: f64,
    pub expansion_tol: f64,
    pub quad_tol: f64,
    pub theta_tol: f64,
    pub order: i32,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            suite: Suite::Full,
            tol: DEFAULT_IDENTITY_TOL,
            omega_tol: DEFAULT_OMEGA_TOL,
            expansion_tol: DEFAULT_EXPANSION_TOL,
            quad_tol: DEFAULT_QUAD_TOL,
            theta_tol: DEFAULT_THETA_TOL,
            order: DEFAULT_ORDER,
            seed: 0,
        }
    }
}

impl VerifyConfig {
    fn omega_pairs(&self) -> usize {
        match self.suite {
            Suite::Quick => 1,
            Suite::Full => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyItem {
    pub identity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Cx>,
    pub defect: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
    pub status: Status,
}

impl VerifyItem {
    pub fn from_check(chk: &IdentityCheck, tolerance: f64) -> Self {
        let status = if !chk.applicable {
            Status::NotApplicable
        } else if chk.passes(tolerance) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            identity: chk.identity.clone(),
            lhs: Some(cx(chk.lhs)),
            rhs: Some(cx(chk.rhs)),
            defect: chk.defect,
            tolerance,
            sign: chk.sign,
            status,
        }
    }

    /// A bare defect with no sides, e.g. a matrix distance.
    pub fn bound(identity: impl Into<String>, defect: f64, tolerance: f64) -> Self {
        Self {
            identity: identity.into(),
            lhs: None,
            rhs: None,
            defect,
            tolerance,
            sign: None,
            status: if defect < tolerance { Status::Pass } else { Status::Fail },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageError {
    pub stage: String,
    pub kind: String,
    pub message: String,
}

impl StageError {
    pub fn new(stage: &str, e: &Error) -> Self {
        Self { stage: stage.into(), kind: e.kind().into(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveVerification {
    pub label: String,
    pub curve: CurveReport,
    pub items: Vec<VerifyItem>,
    pub errors: Vec<StageError>,
    pub passed: bool,
}

impl CurveVerification {
    pub fn failures(&self) -> impl Iterator<Item = &VerifyItem> {
        self.items.iter().filter(|i| i.status == Status::Fail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub tol: f64,
    pub curves: Vec<CurveVerification>,
    pub failed_items: usize,
    pub passed: bool,
}

impl VerifyReport {
    pub fn new(cfg: &VerifyConfig, curves: Vec<CurveVerification>) -> Self {
        let failed_items = curves.iter().map(|c| c.failures().count()).sum();
        let passed = curves.iter().all(|c| c.passed);
        Self { suite: cfg.suite, seed: cfg.seed, tol: cfg.tol, curves, failed_items, passed }
    }
}

struct Collector {
    items: Vec<VerifyItem>,
    errors: Vec<StageError>,
}

impl Collector {
    fn stage<T>(&mut self, stage: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(StageError::new(stage, &e));
                None
            }
        }
    }

    fn checks(&mut self, checks: &[IdentityCheck], tol: f64) {
        self.items.extend(checks.iter().map(|c| VerifyItem::from_check(c, tol)));
    }
}

fn period_items(out: &mut Collector, b: &PeriodBundle, tt: &ThetaTable) {
    out.items.push(VerifyItem::bound("periods.legendre", b.legendre_defect, LEGENDRE_TOL));
    out.items.push(VerifyItem::bound("periods.tau_symmetry", b.tau_asymmetry, TAU_SYMMETRY_TOL));
    out.items.push(VerifyItem::bound(
        "periods.im_tau_positive",
        (-tt.im_tau_min_eigenvalue).max(0.0),
        f64::MIN_POSITIVE,
    ));
}

fn genus_two_items(out: &mut Collector, c: &HyperellipticCurve, b: &PeriodBundle, tt: &ThetaTable, cfg: &VerifyConfig) {
    let Some(m) = out.stage("match", bolza_match(tt, c)) else { return };
    for p in &m.pairs {
        out.items.push(VerifyItem::bound(format!("match.branch({})", p.branch_index), p.residual, MATCH_GATE));
    }
    if let Some(mut rep) = out.stage("kappa", kappa_report(c, b, tt, &m)) {
        if let Some(exp) = out.stage("expansion", kappa_from_expansion(c, b, tt, Some(&m), cfg.order)) {
            out.items.push(VerifyItem::bound("expansion.residual", exp.residual, cfg.expansion_tol));
            rep.set_expansion(exp.kappa);
        }
        for (route, d) in &rep.defects {
            let tol = if route == "expansion" { ROUTE_AGREEMENT_TOL } else { cfg.tol };
            out.items.push(VerifyItem::bound(format!("kappa.{route}"), *d, tol));
        }
    }
    if let Some(d) = out.stage("thomae", thomae_defects(c, tt, &m)) {
        out.checks(&d.checks, cfg.tol);
    }
    if let Some(d) = out.stage("rosenhain", rosenhain_defects(b, tt, &m)) {
        out.checks(&d.checks, cfg.tol);
    }
    for i in 0..5 {
        for j in i + 1..5 {
            if let Some(d) = out.stage("jacobi", jacobi_inversion_check(b, tt, &m, i, j)) {
                out.checks(&d.checks, cfg.tol);
            }
        }
    }
    omega_items(out, c, b, &m, cfg);
}

fn omega_items(out: &mut Collector, c: &HyperellipticCurve, b: &PeriodBundle, m: &BranchMatching, cfg: &VerifyConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for (n, (q, r)) in random_point_pairs(&mut rng, c, cfg.omega_pairs()).iter().enumerate() {
        let odd = m.pairs.iter().map(|p| p.ch).chain([m.gamma]);
        for ch in odd {
            if let Some(mut chk) = out.stage("omega", omega_consistency(b, &ch, q, r, cfg.theta_tol)) {
                chk.identity = format!("omega.consistency({n},{ch})");
                out.checks(&[chk], cfg.omega_tol);
            }
        }
        let sym = defect(omega_algebraic(c, &b.kappa, q, r), omega_algebraic(c, &b.kappa, r, q));
        out.items.push(VerifyItem::bound(format!("omega.symmetry({n})"), sym, OMEGA_SYMMETRY_TOL));
        for k in 0..b.genus() {
            if let Some(mut chk) = out.stage("omega", omega_normalization(b, r, k)) {
                chk.identity = format!("omega.a_period({n},{k})");
                out.checks(&[chk], OMEGA_PERIOD_TOL);
            }
        }
    }
}

fn genus_one_items(out: &mut Collector, c: &HyperellipticCurve, b: &PeriodBundle, tt: &ThetaTable, cfg: &VerifyConfig) {
    if let Some(d) = out.stage("weierstrass", weierstrass_eta(c, b, tt)) {
        out.checks(&d.checks, cfg.tol);
    }
    if let Some(d) = out.stage("thomae", thomae_elliptic(tt)) {
        out.checks(&d.checks, cfg.tol);
    }
    if let Some(exp) = out.stage("expansion", kappa_from_expansion(c, b, tt, None, cfg.order)) {
        out.items.push(VerifyItem::bound("expansion.residual", exp.residual, cfg.expansion_tol));
        out.items.push(VerifyItem::bound(
            "kappa.expansion",
            max_abs(&(&exp.kappa - &b.kappa)),
            ROUTE_AGREEMENT_TOL,
        ));
    }
}

/// Runs every applicable identity on one curve. Numerical failures become
/// [`StageError`] entries and fail the curve.
pub fn verify_curve(label: &str, c: &HyperellipticCurve, cfg: &VerifyConfig) -> CurveVerification {
    let mut out = Collector { items: Vec::new(), errors: Vec::new() };
    if let Some(b) = out.stage("periods", compute_periods(c, cfg.quad_tol)) {
        if let Some(tt) = out.stage("theta", theta_table(&b, cfg.theta_tol)) {
            period_items(&mut out, &b, &tt);
            if c.genus() == 2 {
                genus_two_items(&mut out, c, &b, &tt, cfg);
            } else {
                genus_one_items(&mut out, c, &b, &tt, cfg);
            }
        }
    }
    let passed = out.errors.is_empty() && out.items.iter().all(|i| i.status != Status::Fail);
    CurveVerification {
        label: label.into(),
        curve: CurveReport::new(c),
        items: out.items,
        errors: out.errors,
        passed,
    }
}

/// Seeded random curves: one of each genus for the quick suite, 25 genus-2
/// and 10 genus-1 curves for the full one.
pub fn verify_random(cfg: &VerifyConfig) -> VerifyReport {
    let (g2, g1) = match cfg.suite {
        Suite::Quick => (1, 1),
        Suite::Full => (25, 10),
    };
    let curves = suite_curves(cfg.seed, g2, g1)
        .iter()
        .map(|(label, c)| verify_curve(label, c, cfg))
        .collect();
    VerifyReport::new(cfg, curves)
}

/// `eta / (2 omega)` split into its `lambda_2` and theta parts.
pub fn weierstrass_split(c: &HyperellipticCurve, b: &PeriodBundle, tt: &ThetaTable) -> Result<crate::report::WeierstrassJson> {
    let w = b.omega[(0, 0)];
    let direct = b.eta[(0, 0)] / (w * 2.0);
    let full = identities::weierstrass_kappa(c, b, tt)?;
    let lambda_term = c.lambda(2) / 24.0;
    Ok(crate::report::WeierstrassJson {
        kappa_direct: cx(direct),
        lambda_term: cx(lambda_term),
        theta_term: cx(full - lambda_term),
        kappa_weierstrass: cx(full),
        defect: defect(direct, full),
    })
}
