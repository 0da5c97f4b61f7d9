//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::time::Instant;

use hyperkappa::correspondence::{bolza_match, BranchMatching, GAMMA_THRESHOLD};
use hyperkappa::curves::{gap_sequence, HyperellipticCurve};
use hyperkappa::expansion::{kappa_from_expansion, skw_series, DEFAULT_ORDER};
use hyperkappa::identities::{
    defect, jacobi_inversion_check, kappa_report, lambda4_vanishes, omega_algebraic,
    omega_consistency, omega_normalization, rosenhain_defects, thomae_defects, weierstrass_eta,
    weierstrass_kappa,
};
use hyperkappa::linalg::{c, cr, max_abs, CMatrix};
use hyperkappa::periods::{compute_periods, PeriodBundle};
use hyperkappa::series::TruncatedSeries;
use hyperkappa::suite::{random_point_pairs, suite_curves};
use hyperkappa::theta::{theta_jet, theta_table, Characteristic, ThetaTable};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const SEED: u64 = 2024;
const QUAD_TOL: f64 = 1e-12;
const THETA_TOL: f64 = 1e-14;

struct CurveData {
    label: String,
    curve: HyperellipticCurve,
    bundle: PeriodBundle,
    table: ThetaTable,
    matching: Option<BranchMatching>,
}

type Outcome = Result<String, String>;

/// Collects failures while tracking the worst value of one quantity.
struct Tally {
    worst: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self { worst: 0.0, failures: Vec::new() }
    }

    fn check(&mut self, what: impl FnOnce() -> String, value: f64, bound: f64) {
        self.worst = self.worst.max(value);
        if !(value < bound) {
            self.failures.push(format!("{} = {value:.2e}", what()));
        }
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }

    fn finish(self, label: &str) -> Outcome {
        if self.failures.is_empty() {
            Ok(format!("worst {label} {:.2e}", self.worst))
        } else {
            let shown: Vec<_> = self.failures.iter().take(6).cloned().collect();
            Err(format!(
                "{} failures (worst {label} {:.2e}): {}",
                self.failures.len(),
                self.worst,
                shown.join("; ")
            ))
        }
    }
}

fn load() -> Result<(Vec<CurveData>, f64), String> {
    let start = Instant::now();
    let mut out = Vec::new();
    for (label, curve) in suite_curves(SEED, 25, 10) {
        let bundle = compute_periods(&curve, QUAD_TOL).map_err(|e| format!("{label}: {e}"))?;
        let table = theta_table(&bundle, THETA_TOL).map_err(|e| format!("{label}: {e}"))?;
        let matching = (curve.genus() == 2).then(|| bolza_match(&table, &curve).ok()).flatten();
        out.push(CurveData { label, curve, bundle, table, matching });
    }
    Ok((out, start.elapsed().as_secs_f64()))
}

fn genus(data: &[CurveData], g: usize) -> impl Iterator<Item = &CurveData> {
    data.iter().filter(move |d| d.curve.genus() == g)
}

fn matching<'a>(d: &'a CurveData, t: &mut Tally) -> Option<&'a BranchMatching> {
    if d.matching.is_none() {
        t.fail(format!("{}: no branch matching", d.label));
    }
    d.matching.as_ref()
}

fn legendre_suite(data: &[CurveData], seconds: f64) -> Outcome {
    let mut t = Tally::new();
    for d in data {
        let b = &d.bundle;
        t.check(|| format!("{} legendre", d.label), b.legendre_defect, 1e-9);
        t.check(|| format!("{} tau asymmetry", d.label), b.tau_asymmetry, 1e-10);
        if !(b.im_tau_min_eigenvalue > 0.0) {
            t.fail(format!("{}: Im tau not positive definite", d.label));
        }
    }
    if seconds >= 300.0 {
        t.fail(format!("suite took {seconds:.1} s"));
    }
    t.finish("defect").map(|s| format!("{s}, {} curves in {seconds:.2} s", data.len()))
}

fn kappa_routes(data: &[CurveData]) -> Outcome {
    let mut t = Tally::new();
    for d in genus(data, 2) {
        let Some(m) = matching(d, &mut t) else { continue };
        let rep = kappa_report(&d.curve, &d.bundle, &d.table, m)
            .and_then(|mut rep| {
                let exp = kappa_from_expansion(&d.curve, &d.bundle, &d.table, Some(m), DEFAULT_ORDER)?;
                rep.set_expansion(exp.kappa);
                Ok(rep)
            });
        match rep {
            Ok(rep) => {
                if rep.routes().len() != 19 {
                    t.fail(format!("{}: {} routes", d.label, rep.routes().len()));
                }
                t.check(|| format!("{} route gap", d.label), rep.max_pairwise_gap(), 1e-7);
            }
            Err(e) => t.fail(format!("{}: {e}", d.label)),
        }
    }
    for d in genus(data, 1) {
        let w = weierstrass_kappa(&d.curve, &d.bundle, &d.table);
        let exp = kappa_from_expansion(&d.curve, &d.bundle, &d.table, None, DEFAULT_ORDER);
        match (w, exp) {
            (Ok(w), Ok(exp)) => {
                let k = [d.bundle.kappa[(0, 0)], w, exp.kappa[(0, 0)]];
                let gap = (0..3)
                    .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
                    .map(|(i, j)| (k[i] - k[j]).norm())
                    .fold(0.0, f64::max);
                t.check(|| format!("{} route gap", d.label), gap, 1e-7);
            }
            (Err(e), _) | (_, Err(e)) => t.fail(format!("{}: {e}", d.label)),
        }
    }
    t.finish("max-norm gap")
}

fn elliptic_weierstrass(data: &[CurveData]) -> Outcome {
    let mut t = Tally::new();
    let mut reduced = 0;
    for d in genus(data, 1) {
        match weierstrass_eta(&d.curve, &d.bundle, &d.table) {
            Ok(checks) => {
                t.check(|| format!("{} decomposition", d.label), checks.get("weierstrass.kappa").unwrap().defect, 1e-10);
                for name in ["weierstrass.eta_even", "weierstrass.eta_odd", "weierstrass.forms_agree"] {
                    let chk = checks.get(name).unwrap();
                    if chk.applicable {
                        if name == "weierstrass.forms_agree" {
                            reduced += 1;
                        }
                        t.check(|| format!("{} {name}", d.label), chk.defect, 1e-10);
                    }
                }
            }
            Err(e) => t.fail(format!("{}: {e}", d.label)),
        }
    }
    if reduced == 0 {
        t.fail("no curve with lambda_2 = 0 in the suite".into());
    }
    t.finish("defect").map(|s| format!("{s}, {reduced} curves with lambda_2 = 0"))
}

fn thomae(data: &[CurveData]) -> Outcome {
    let mut t = Tally::new();
    let mut reduced = 0;
    for d in genus(data, 2) {
        let Some(m) = matching(d, &mut t) else { continue };
        match thomae_defects(&d.curve, &d.table, m) {
            Ok(checks) => {
                if lambda4_vanishes(&d.curve) {
                    reduced += 1;
                }
                for chk in checks.checks.iter().filter(|c| c.applicable) {
                    t.check(|| format!("{} {}", d.label, chk.identity), chk.defect, 1e-8);
                }
            }
            Err(e) => t.fail(format!("{}: {e}", d.label)),
        }
    }
    if reduced == 0 {
        t.fail("no curve with lambda_4 = 0 in the suite".into());
    }
    t.finish("defect").map(|s| format!("{s}, {reduced} curves with lambda_4 = 0"))
}

fn rosenhain(data: &[CurveData]) -> Outcome {
    let mut t = Tally::new();
    for d in genus(data, 2) {
        let Some(m) = matching(d, &mut t) else { continue };
        let coarse = compute_periods(&d.curve, 1e-10)
            .and_then(|b| Ok((theta_table(&b, 1e-12)?, b)))
            .and_then(|(tt, b)| {
                let m2 = bolza_match(&tt, &d.curve)?;
                rosenhain_defects(&b, &tt, &m2)
            });
        match (rosenhain_defects(&d.bundle, &d.table, m), coarse) {
            (Ok(fine), Ok(coarse)) => {
                let count = |p: &str| fine.checks.iter().filter(|c| c.identity.starts_with(p)).count();
                if count("rosenhain.classical") != 15 || count("rosenhain.higher") != 15 {
                    t.fail(format!("{}: expected 15 pairs of each kind", d.label));
                }
                for chk in &fine.checks {
                    t.check(|| format!("{} {}", d.label, chk.identity), chk.defect, 1e-8);
                    let other = coarse.get(&chk.identity).map(|c| c.sign);
                    if other != Some(chk.sign) {
                        t.fail(format!("{} {}: sign changed under refinement", d.label, chk.identity));
                    }
                }
            }
            (Err(e), _) | (_, Err(e)) => t.fail(format!("{}: {e}", d.label)),
        }
    }
    t.finish("defect")
}

fn jacobi_inversion(data: &[CurveData]) -> Outcome {
    let mut t = Tally::new();
    for d in genus(data, 2) {
        let Some(m) = matching(d, &mut t) else { continue };
        for i in 0..5 {
            for j in i + 1..5 {
                match jacobi_inversion_check(&d.bundle, &d.table, m, i, j) {
                    Ok(checks) => {
                        for chk in &checks.checks {
                            t.check(|| format!("{} {}", d.label, chk.identity), chk.defect, 1e-8);
                        }
                    }
                    Err(e) => t.fail(format!("{} ({i},{j}): {e}", d.label)),
                }
            }
        }
    }
    t.finish("defect")
}

fn bolza(data: &[CurveData]) -> Outcome {
    let mut t = Tally::new();
    for d in genus(data, 2) {
        match bolza_match(&d.table, &d.curve) {
            Ok(m) => {
                for p in &m.pairs {
                    t.check(|| format!("{} branch {}", d.label, p.branch_index), p.residual, 1e-6);
                }
                let scale = d.table.odd().map(|e| e.dir().t2.norm()).fold(0.0, f64::max);
                let vanishing = d
                    .table
                    .odd()
                    .filter(|e| e.dir().t2.norm() < GAMMA_THRESHOLD * scale)
                    .count();
                if vanishing != 1 {
                    t.fail(format!("{}: {vanishing} vanishing V-derivatives", d.label));
                }
            }
            Err(e) => t.fail(format!("{}: {e}", d.label)),
        }
    }
    t.finish("residual")
}

fn omega(data: &[CurveData]) -> Outcome {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for d in genus(data, 2) {
        let Some(m) = matching(d, &mut t) else { continue };
        for (q, r) in random_point_pairs(&mut rng, &d.curve, 5) {
            for ch in m.pairs.iter().map(|p| p.ch).chain([m.gamma]) {
                match omega_consistency(&d.bundle, &ch, &q, &r, THETA_TOL) {
                    Ok(chk) => t.check(|| format!("{} consistency {ch}", d.label), chk.defect, 1e-5),
                    Err(e) => t.fail(format!("{}: {e}", d.label)),
                }
            }
            let sym = defect(
                omega_algebraic(&d.curve, &d.bundle.kappa, &q, &r),
                omega_algebraic(&d.curve, &d.bundle.kappa, &r, &q),
            );
            t.check(|| format!("{} symmetry", d.label), sym, 1e-12);
            for k in 0..2 {
                match omega_normalization(&d.bundle, &r, k) {
                    Ok(chk) => t.check(|| format!("{} a_{k}-period", d.label), chk.defect, 1e-8),
                    Err(e) => t.fail(format!("{}: {e}", d.label)),
                }
            }
        }
    }
    t.finish("defect")
}

/// Plain lattice sum over the cube `|n_i| <= 12`.
fn brute_theta(z: &[Complex64], tau: &CMatrix, ch: &Characteristic) -> Complex64 {
    let g = z.len();
    let (eps, eps_p) = (ch.eps(), ch.eps_prime());
    let span = 12i64;
    let count = (2 * span + 1).pow(g as u32);
    let mut total = cr(0.0);
    for idx in 0..count {
        let mut rest = idx;
        let m: Vec<f64> = (0..g)
            .map(|i| {
                let n = rest % (2 * span + 1) - span;
                rest /= 2 * span + 1;
                n as f64 + eps[i]
            })
            .collect();
        let mut phase = cr(0.0);
        for i in 0..g {
            for j in 0..g {
                phase += tau[(i, j)] * m[i] * m[j] * c(0.0, std::f64::consts::PI);
            }
            phase += c(0.0, 2.0 * std::f64::consts::PI) * m[i] * (z[i] + eps_p[i]);
        }
        total += phase.exp();
    }
    total
}

fn fourth_order<F: Fn(Complex64) -> Complex64>(f: F, h: f64) -> Complex64 {
    (f(cr(-2.0 * h)) + f(cr(-h)) * -8.0 + f(cr(h)) * 8.0 - f(cr(2.0 * h))) / (12.0 * h)
}

fn oracles(data: &[CurveData]) -> Outcome {
    let mut theta_err: f64 = 0.0;
    let mut fd_err: f64 = 0.0;
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    for d in data.iter().step_by(3) {
        let tau = &d.bundle.tau;
        let g = d.curve.genus();
        let z: Vec<Complex64> = (0..g).map(|_| c(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2))).collect();
        for ch in Characteristic::all(g) {
            let jet = theta_jet(&z, tau, &ch, THETA_TOL).unwrap();
            let brute = brute_theta(&z, tau, &ch);
            theta_err = theta_err.max((jet.value - brute).norm());
            // Finite differences of each order against the next one up.
            let h = 1e-3;
            let scale1 = jet.grad.iter().map(|v| v.norm()).fold(0.0, f64::max).max(jet.value.norm());
            let scale2 = jet.hess.iter().map(|v| v.norm()).fold(0.0, f64::max).max(scale1);
            let scale3 = jet.third.iter().map(|v| v.norm()).fold(0.0, f64::max).max(scale2);
            for k in 0..g {
                let at = |dz: Complex64| {
                    let mut zz = z.clone();
                    zz[k] += dz;
                    theta_jet(&zz, tau, &ch, THETA_TOL).unwrap()
                };
                let d1 = fourth_order(|dz| at(dz).value, h);
                fd_err = fd_err.max((d1 - jet.grad[k]).norm() / scale1);
                for i in 0..g {
                    let d2 = fourth_order(|dz| at(dz).grad[i], h);
                    fd_err = fd_err.max((d2 - jet.hessian(i, k)).norm() / scale2);
                    for j in 0..g {
                        let d3 = fourth_order(|dz| at(dz).hessian(i, j), h);
                        fd_err = fd_err.max((d3 - jet.third(i, j, k)).norm() / scale3);
                    }
                }
            }
        }
    }
    if !(theta_err < 1e-14) {
        failures.push(format!("theta vs brute force {theta_err:.2e}"));
    }
    if !(fd_err < 1e-8) {
        failures.push(format!("derivatives vs finite differences {fd_err:.2e}"));
    }
    for s in 3..=15u32 {
        for n in 2..s {
            if (2..=n).any(|p| n % p == 0 && s % p == 0) {
                continue;
            }
            let bound = (n - 1) * (s - 1);
            let sieve: Vec<u32> = (0..bound)
                .filter(|&k| !(0..=k / s).any(|b| (k - b * s) % n == 0))
                .collect();
            if gap_sequence(n, s).ok().as_ref() != Some(&sieve) {
                failures.push(format!("gap sequence ({n},{s})"));
            }
        }
    }
    let mut series_err: f64 = 0.0;
    for _ in 0..50 {
        let lowest = rng.random_range(-3..3);
        let len = rng.random_range(2..12usize);
        let coeffs: Vec<Complex64> = (0..len)
            .map(|k| {
                let base = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                if k == 0 { base + cr(2.0) } else { base }
            })
            .collect();
        let s = TruncatedSeries::new(lowest, coeffs, lowest + len as i32).unwrap();
        let back = s.recip().and_then(|r| r.recip()).unwrap();
        if back.order() != s.order() || back.lowest() != s.lowest() {
            failures.push("reciprocal order bookkeeping".into());
        }
        let sq = TruncatedSeries::new(2 * lowest, s.coefficients().map(|p| p.1).collect(), 2 * lowest + len as i32).unwrap();
        let root = sq.sqrt().unwrap();
        let squared = root.mul(&root).unwrap();
        if squared.order() != sq.order() {
            failures.push("square root order bookkeeping".into());
        }
        for k in s.lowest()..s.order() {
            series_err = series_err.max((back.coeff(k).unwrap() - s.coeff(k).unwrap()).norm());
        }
        for k in sq.lowest()..sq.order() {
            series_err = series_err.max((squared.coeff(k).unwrap() - sq.coeff(k).unwrap()).norm());
        }
    }
    if !(series_err < 1e-12) {
        failures.push(format!("series round trip {series_err:.2e}"));
    }
    let detail = format!("theta {theta_err:.2e}, derivatives {fd_err:.2e}, series {series_err:.2e}");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

fn expansion(data: &[CurveData]) -> Outcome {
    let mut t = Tally::new();
    for d in genus(data, 1) {
        let (l1, l2) = (d.curve.lambda(1), d.curve.lambda(2));
        match skw_series(&d.curve, 6) {
            Ok(s) => {
                let (c0, lin0) = s.coeff(0).unwrap();
                let (c2, lin2) = s.coeff(2).unwrap();
                let errs = [
                    (c0 - l2 * -0.75).norm(),
                    (lin0[0] - 12.0).norm(),
                    (c2 - (l1 * -1.5 + l2 * l2 * (9.0 / 32.0))).norm(),
                    (lin2[0] + l2 * 3.0).norm(),
                ];
                t.check(|| format!("{} printed coefficients", d.label), errs.iter().copied().fold(0.0, f64::max), 1e-12);
            }
            Err(e) => t.fail(format!("{}: {e}", d.label)),
        }
    }
    for d in genus(data, 2) {
        let Some(m) = matching(d, &mut t) else { continue };
        match kappa_from_expansion(&d.curve, &d.bundle, &d.table, Some(m), DEFAULT_ORDER) {
            Ok(rep) => {
                t.check(|| format!("{} residual", d.label), rep.residual, 1e-6);
                t.check(|| format!("{} kappa", d.label), max_abs(&(rep.kappa - &d.bundle.kappa)), 1e-6);
            }
            Err(e) => t.fail(format!("{}: {e}", d.label)),
        }
    }
    t.finish("residual")
}

/// The documented `verify` example on the equally spaced quintic.
fn cli_verify_example() -> Outcome {
    let curve = r#"{"branch_points":[-2,-1,0,1,2]}"#;
    let args = ["hyperkappa", "verify", "--curve", curve, "--tol", "1e-8"];
    let out = hyperkappa_cli::run_args(args);
    let v: Value = serde_json::from_str(&out.stdout).map_err(|e| format!("stdout: {e}"))?;
    let failing: Vec<String> = v["report"]["curves"]
        .as_array()
        .into_iter()
        .flatten()
        .flat_map(|c| c["items"].as_array().cloned().unwrap_or_default())
        .filter(|i| i["status"] == "fail")
        .map(|i| format!("{} defect {}", i["identity"].as_str().unwrap_or("?"), i["defect"]))
        .collect();
    if out.code == 0 {
        Ok("exit 0".into())
    } else {
        Err(format!("exit {}; {} failing items: {}", out.code, failing.len(), failing.join("; ")))
    }
}

fn main() {
    let (data, seconds) = match load() {
        Ok(v) => v,
        Err(e) => {
            println!("acceptance: could not build the suite: {e}");
            std::process::exit(1);
        }
    };
    let criteria: [(&str, Box<dyn Fn() -> Outcome + '_>); 11] = [
        ("legendre suite", Box::new(|| legendre_suite(&data, seconds))),
        ("kappa route agreement", Box::new(|| kappa_routes(&data))),
        ("elliptic weierstrass", Box::new(|| elliptic_weierstrass(&data))),
        ("thomae identities", Box::new(|| thomae(&data))),
        ("rosenhain derivative formulas", Box::new(|| rosenhain(&data))),
        ("jacobi inversion", Box::new(|| jacobi_inversion(&data))),
        ("bolza matching", Box::new(|| bolza(&data))),
        ("omega uniqueness", Box::new(|| omega(&data))),
        ("oracle suites", Box::new(|| oracles(&data))),
        ("expansion method", Box::new(|| expansion(&data))),
        ("cli verify example", Box::new(cli_verify_example)),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({detail})", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
