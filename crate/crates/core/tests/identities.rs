use hyperkappa::correspondence::bolza_match;
use hyperkappa::curves::{CurvePoint, HyperellipticCurve};
use hyperkappa::identities::*;
use hyperkappa::linalg::{c, cr, max_abs};
use hyperkappa::periods::compute_periods;
use hyperkappa::theta::theta_table;

fn curve_from(points: &[(f64, f64)]) -> HyperellipticCurve {
    let e: Vec<_> = points.iter().map(|&(a, b)| c(a, b)).collect();
    HyperellipticCurve::from_branch_points(&e).unwrap()
}

fn equally_spaced() -> HyperellipticCurve {
    curve_from(&[(-2.0, 0.0), (-1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])
}

fn skewed() -> HyperellipticCurve {
    curve_from(&[(-1.3, 0.2), (-0.5, -0.7), (0.1, 0.9), (0.8, -0.2), (1.6, 0.4)])
}

#[test]
fn kappa_routes_agree() {
    for curve in [equally_spaced(), skewed()] {
        let b = compute_periods(&curve, 1e-12).unwrap();
        let tt = theta_table(&b, 1e-14).unwrap();
        let m = bolza_match(&tt, &curve).unwrap();
        let rep = kappa_report(&curve, &b, &tt, &m).unwrap();
        for (route, d) in &rep.defects {
            assert!(*d < 1e-8, "{route}: {d:e}");
        }
        let mean_pairs = rep
            .kappa_by_even_pair
            .iter()
            .fold(rep.kappa_even_sum.scale(0.0), |acc, (_, k)| acc + k)
            .scale(0.1);
        assert!(max_abs(&(mean_pairs - &rep.kappa_even_sum)) < 1e-9);
        let mean_odd = rep
            .kappa_by_odd
            .iter()
            .fold(rep.kappa_odd_sum.scale(0.0), |acc, (_, _, k)| acc + k)
            .scale(0.2);
        assert!(max_abs(&(mean_odd - &rep.kappa_odd_sum)) < 1e-9);
    }
}

#[test]
fn gamma_is_rejected_by_single_odd_route() {
    let curve = skewed();
    let b = compute_periods(&curve, 1e-12).unwrap();
    let tt = theta_table(&b, 1e-14).unwrap();
    let m = bolza_match(&tt, &curve).unwrap();
    assert!(matches!(
        kappa_odd_single(&curve, &b, &tt, &m, &m.gamma),
        Err(hyperkappa::Error::GammaCharacteristic)
    ));
}

#[test]
fn reduced_odd_sum_matches_on_centered_curve() {
    // Sum of branch points zero, so lambda_4 = 0.
    let curve = equally_spaced();
    assert!(lambda4_vanishes(&curve));
    let b = compute_periods(&curve, 1e-12).unwrap();
    let tt = theta_table(&b, 1e-14).unwrap();
    let m = bolza_match(&tt, &curve).unwrap();
    let full = kappa_odd_sum(&curve, &tt, &m).unwrap();
    let reduced = kappa_odd_sum_reduced(&curve, &tt, &m).unwrap();
    assert!(max_abs(&(full - reduced)) < 1e-12);
}

#[test]
fn thomae_identities() {
    for curve in [equally_spaced(), skewed()] {
        let b = compute_periods(&curve, 1e-12).unwrap();
        let tt = theta_table(&b, 1e-14).unwrap();
        let m = bolza_match(&tt, &curve).unwrap();
        let d = thomae_defects(&curve, &tt, &m).unwrap();
        for chk in &d.checks {
            if chk.applicable {
                assert!(chk.defect < 1e-8, "{}: {:e}", chk.identity, chk.defect);
            }
        }
        assert_eq!(d.get("thomae.lambda3").unwrap().applicable, lambda4_vanishes(&curve));
    }
}

#[test]
fn classical_rosenhain_holds_for_all_pairs() {
    let curve = skewed();
    let b = compute_periods(&curve, 1e-12).unwrap();
    let tt = theta_table(&b, 1e-14).unwrap();
    let m = bolza_match(&tt, &curve).unwrap();
    let d = rosenhain_defects(&b, &tt, &m).unwrap();
    let classical: Vec<_> = d
        .checks
        .iter()
        .filter(|c| c.identity.starts_with("rosenhain.classical"))
        .collect();
    assert_eq!(classical.len(), 15);
    for chk in classical {
        assert!(chk.defect < 1e-8, "{}: {:e}", chk.identity, chk.defect);
    }
}

#[test]
fn higher_rosenhain_holds_away_from_gamma() {
    let curve = skewed();
    let b = compute_periods(&curve, 1e-12).unwrap();
    let tt = theta_table(&b, 1e-14).unwrap();
    let m = bolza_match(&tt, &curve).unwrap();
    let d = rosenhain_defects(&b, &tt, &m).unwrap();
    for chk in d
        .checks
        .iter()
        .filter(|c| c.identity.starts_with("rosenhain.higher") && !c.identity.contains("inf"))
    {
        assert!(chk.defect < 1e-8, "{}: {:e}", chk.identity, chk.defect);
    }
}

#[test]
fn jacobi_inversion_values() {
    let curve = skewed();
    let b = compute_periods(&curve, 1e-12).unwrap();
    let tt = theta_table(&b, 1e-14).unwrap();
    let m = bolza_match(&tt, &curve).unwrap();
    for i in 0..5 {
        for j in i + 1..5 {
            let d = jacobi_inversion_check(&b, &tt, &m, i, j).unwrap();
            for chk in &d.checks {
                assert!(chk.defect < 1e-8, "{}: {:e}", chk.identity, chk.defect);
            }
        }
    }
}

#[test]
fn weierstrass_lemniscatic_and_general() {
    for (points, reduced) in [
        (vec![(1.0, 0.0), (0.0, 0.0), (-1.0, 0.0)], true),
        (vec![(0.7, 0.3), (-0.2, -0.9), (-1.1, 0.4)], false),
    ] {
        let curve = curve_from(&points);
        let b = compute_periods(&curve, 1e-13).unwrap();
        let tt = theta_table(&b, 1e-14).unwrap();
        let d = weierstrass_eta(&curve, &b, &tt).unwrap();
        assert!(d.get("weierstrass.kappa").unwrap().defect < 1e-10);
        if reduced {
            for name in ["weierstrass.eta_even", "weierstrass.eta_odd"] {
                assert!(d.get(name).unwrap().defect < 1e-10, "{name}");
            }
            assert!(d.get("weierstrass.forms_agree").unwrap().defect < 1e-12);
        }
        let t = thomae_elliptic(&tt).unwrap();
        assert!(t.max_defect() < 1e-10);
    }
}

#[test]
fn weierstrass_on_quadratic_term_curve() {
    // y^2 = 4x^3 + x^2 - x
    let curve = HyperellipticCurve::from_lambda(1, &[cr(0.0), cr(-1.0), cr(1.0)]).unwrap();
    let b = compute_periods(&curve, 1e-13).unwrap();
    let tt = theta_table(&b, 1e-14).unwrap();
    let d = weierstrass_eta(&curve, &b, &tt).unwrap();
    assert!(d.get("weierstrass.kappa").unwrap().defect < 1e-10);
    assert!(!d.get("weierstrass.eta_odd").unwrap().applicable);
}

#[test]
fn omega_two_forms_agree() {
    let curve = equally_spaced();
    let b = compute_periods(&curve, 1e-12).unwrap();
    let tt = theta_table(&b, 1e-14).unwrap();
    let m = bolza_match(&tt, &curve).unwrap();
    let q = CurvePoint::on_sheet(&curve, c(0.4, 0.7), 1);
    let r = CurvePoint::on_sheet(&curve, c(-0.9, -0.5), -1);
    for ch in m.pairs.iter().map(|p| p.ch).chain([m.gamma]) {
        let chk = omega_consistency(&b, &ch, &q, &r, 1e-14).unwrap();
        assert!(chk.defect < 1e-5, "{ch}: {:e}", chk.defect);
    }
    let sym = defect(
        omega_algebraic(&curve, &b.kappa, &q, &r),
        omega_algebraic(&curve, &b.kappa, &r, &q),
    );
    assert!(sym < 1e-12);
    for k in 0..2 {
        let chk = omega_normalization(&b, &r, k).unwrap();
        assert!(chk.defect < 1e-8, "a_{k}: {:e}", chk.defect);
    }
}
