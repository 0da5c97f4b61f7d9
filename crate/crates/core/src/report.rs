//! Curve input parsing and machine-readable reports.
//!
//! Floats are written with 17 significant digits and struct fields keep their
//! declaration order, so identical inputs give byte-identical output.

use std::io;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::correspondence::BranchMatching;
use crate::curves::HyperellipticCurve;
use crate::error::{Error, Result};
use crate::expansion::ExpansionReport;
use crate::identities::KappaReport;
use crate::linalg::CMatrix;
use crate::periods::PeriodBundle;
use crate::theta::ThetaTable;

/// Largest curve document accepted by [`parse_curve_json`].
pub const MAX_CURVE_JSON_BYTES: usize = 1 << 20;

struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` as compact JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).expect("report types always serialize");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// A complex number as `[re, im]`.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Cx(pub [f64; 2]);

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Cx([z.re, z.im])
    }
}

pub fn cx(z: Complex64) -> Cx {
    z.into()
}

pub fn cvec(v: &[Complex64]) -> Vec<Cx> {
    v.iter().map(|&z| cx(z)).collect()
}

/// Row-major nested arrays.
pub fn cmat(m: &CMatrix) -> Vec<Vec<Cx>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| cx(m[(i, j)])).collect())
        .collect()
}

fn complex_from_value(v: &Value) -> Option<Complex64> {
    match v {
        Value::Number(n) => n.as_f64().map(|re| Complex64::new(re, 0.0)),
        Value::Array(pair) if pair.len() == 2 => {
            let re = pair[0].as_f64()?;
            let im = pair[1].as_f64()?;
            Some(Complex64::new(re, im))
        }
        _ => None,
    }
}

fn complex_list(v: &Value, key: &str) -> Result<Vec<Complex64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::InvalidInput(format!("\"{key}\" must be an array")))?;
    arr.iter()
        .enumerate()
        .map(|(k, item)| {
            let z = complex_from_value(item).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "\"{key}\"[{k}] must be a number or a [re, im] pair"
                ))
            })?;
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::InvalidInput(format!("\"{key}\"[{k}] is not finite")));
            }
            Ok(z)
        })
        .collect()
}

/// Parses `{"branch_points": [...]}` or `{"genus": g, "lambda": [...]}`.
///
/// Entries are `[re, im]` pairs or bare real numbers.
pub fn parse_curve_json(text: &str) -> Result<HyperellipticCurve> {
    if text.len() > MAX_CURVE_JSON_BYTES {
        return Err(Error::InvalidInput("curve document too large".into()));
    }
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("curve JSON: {e}")))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::InvalidInput("curve JSON must be an object".into()))?;
    let genus = match obj.get("genus") {
        None => None,
        Some(g) => Some(
            g.as_u64()
                .filter(|&g| g == 1 || g == 2)
                .ok_or_else(|| Error::InvalidInput("\"genus\" must be 1 or 2".into()))?
                as usize,
        ),
    };
    match (obj.get("branch_points"), obj.get("lambda")) {
        (Some(_), Some(_)) => Err(Error::InvalidInput(
            "give either \"branch_points\" or \"lambda\", not both".into(),
        )),
        (Some(bp), None) => {
            let e = complex_list(bp, "branch_points")?;
            let g = match e.len() {
                3 => 1,
                5 => 2,
                n => {
                    return Err(Error::InvalidInput(format!(
                        "need 3 or 5 branch points, got {n}"
                    )))
                }
            };
            if genus.is_some_and(|declared| declared != g) {
                return Err(Error::InvalidInput(format!(
                    "{} branch points do not give genus {}",
                    e.len(),
                    genus.unwrap_or_default()
                )));
            }
            HyperellipticCurve::from_branch_points(&e)
        }
        (None, Some(l)) => {
            let lam = complex_list(l, "lambda")?;
            let g = genus.ok_or_else(|| Error::InvalidInput("\"lambda\" needs \"genus\"".into()))?;
            if lam.len() != 2 * g + 1 {
                return Err(Error::InvalidInput(format!(
                    "genus {g} needs {} lambda coefficients, got {}",
                    2 * g + 1,
                    lam.len()
                )));
            }
            HyperellipticCurve::from_lambda(g, &lam)
        }
        (None, None) => Err(Error::InvalidInput(
            "curve JSON needs \"branch_points\" or \"lambda\"".into(),
        )),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveReport {
    pub genus: usize,
    pub lambda: Vec<Cx>,
    pub branch_points: Vec<Cx>,
}

impl CurveReport {
    pub fn new(c: &HyperellipticCurve) -> Self {
        Self {
            genus: c.genus(),
            lambda: cvec(c.lambda_free()),
            branch_points: cvec(&c.sorted_branch_points()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HomologyReport {
    pub pair_loops: Vec<(usize, usize)>,
    pub a_cycles: Vec<Vec<usize>>,
    pub b_cycles: Vec<Vec<usize>>,
    pub orientation: Vec<i8>,
    pub intersection_matrix: Vec<Vec<i32>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodReport {
    pub curve: CurveReport,
    pub omega: Vec<Vec<Cx>>,
    pub omega_prime: Vec<Vec<Cx>>,
    pub eta: Vec<Vec<Cx>>,
    pub eta_prime: Vec<Vec<Cx>>,
    pub tau: Vec<Vec<Cx>>,
    pub kappa: Vec<Vec<Cx>>,
    pub winding: Vec<Vec<Cx>>,
    pub legendre_defect: f64,
    pub tau_asymmetry: f64,
    pub kappa_asymmetry: f64,
    pub im_tau_min_eigenvalue: f64,
    pub eta_prime_defect: f64,
    pub quad_tol: f64,
    pub homology: HomologyReport,
}

impl PeriodReport {
    pub fn new(b: &PeriodBundle) -> Self {
        Self {
            curve: CurveReport::new(&b.curve),
            omega: cmat(&b.omega),
            omega_prime: cmat(&b.omega_prime),
            eta: cmat(&b.eta),
            eta_prime: cmat(&b.eta_prime),
            tau: cmat(&b.tau),
            kappa: cmat(&b.kappa),
            winding: b.winding.iter().map(|w| cvec(w)).collect(),
            legendre_defect: b.legendre_defect,
            tau_asymmetry: b.tau_asymmetry,
            kappa_asymmetry: b.kappa_asymmetry,
            im_tau_min_eigenvalue: b.im_tau_min_eigenvalue,
            eta_prime_defect: b.eta_prime_defect,
            quad_tol: b.quad_tol,
            homology: HomologyReport {
                pair_loops: b.homology.pair_loops.clone(),
                a_cycles: b.homology.a_cycles.clone(),
                b_cycles: b.homology.b_cycles.clone(),
                orientation: b.homology.orientation.clone(),
                intersection_matrix: b.homology.intersection_matrix(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionalReport {
    pub t1: Cx,
    pub t2: Cx,
    pub t11: Cx,
    pub t12: Cx,
    pub t22: Cx,
    pub t112: Cx,
    pub t122: Cx,
    pub t222: Cx,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaEntryReport {
    #[serde(rename = "char")]
    pub ch: crate::theta::Characteristic,
    pub parity: u8,
    pub value: Cx,
    pub gradient: Vec<Cx>,
    pub hessian: Vec<Cx>,
    pub third: Vec<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directional: Option<DirectionalReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaReport {
    pub tau: Vec<Vec<Cx>>,
    pub lattice_radius: f64,
    pub tol: f64,
    pub im_tau_min_eigenvalue: f64,
    pub conditioning_warning: bool,
    pub entries: Vec<ThetaEntryReport>,
}

impl ThetaReport {
    pub fn new(tt: &ThetaTable) -> Self {
        let entries = tt
            .entries
            .iter()
            .map(|e| ThetaEntryReport {
                ch: e.ch,
                parity: e.ch.parity(),
                value: cx(e.jet.value),
                gradient: cvec(&e.jet.grad),
                hessian: cvec(&e.jet.hess),
                third: cvec(&e.jet.third),
                directional: e.directional.map(|d| DirectionalReport {
                    t1: cx(d.t1),
                    t2: cx(d.t2),
                    t11: cx(d.t11),
                    t12: cx(d.t12),
                    t22: cx(d.t22),
                    t112: cx(d.t112),
                    t122: cx(d.t122),
                    t222: cx(d.t222),
                }),
            })
            .collect();
        Self {
            tau: cmat(&tt.tau),
            lattice_radius: tt.lattice_radius,
            tol: tt.tol,
            im_tau_min_eigenvalue: tt.im_tau_min_eigenvalue,
            conditioning_warning: tt.conditioning_warning,
            entries,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchReport<'a> {
    pub branch_points: Vec<Cx>,
    #[serde(flatten)]
    pub matching: &'a BranchMatching,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaRoute {
    pub route: String,
    pub kappa: Vec<Vec<Cx>>,
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaJson {
    pub kappa_direct: Vec<Vec<Cx>>,
    pub routes: Vec<KappaRoute>,
    pub max_defect: f64,
    pub max_pairwise_gap: f64,
}

impl KappaJson {
    pub fn new(r: &KappaReport) -> Self {
        let routes = r
            .routes()
            .into_iter()
            .skip(1)
            .map(|(route, k)| {
                let defect = r
                    .defects
                    .iter()
                    .find(|(name, _)| *name == route)
                    .map_or(0.0, |d| d.1);
                KappaRoute { route, kappa: cmat(k), defect }
            })
            .collect();
        Self {
            kappa_direct: cmat(&r.kappa_direct),
            routes,
            max_defect: r.max_defect(),
            max_pairwise_gap: r.max_pairwise_gap(),
        }
    }
}

/// `eta / (2 omega) = lambda_2 / 24 + theta term` for an elliptic curve.
#[derive(Debug, Clone, Serialize)]
pub struct WeierstrassJson {
    pub kappa_direct: Cx,
    pub lambda_term: Cx,
    pub theta_term: Cx,
    pub kappa_weierstrass: Cx,
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesCoefficient {
    pub exponent: i32,
    pub value: Cx,
}

#[derive(Debug, Clone, Serialize)]
pub struct AffineCoefficient {
    pub exponent: i32,
    pub constant: Cx,
    /// Coefficients of the independent `kappa` entries, upper triangle row-major.
    pub kappa_coefficients: Vec<Cx>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitJson {
    #[serde(rename = "char")]
    pub ch: crate::theta::Characteristic,
    pub coefficients: Vec<SeriesCoefficient>,
    pub kappa: Vec<Vec<Cx>>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionJson {
    pub order: i32,
    pub algebraic_side: Vec<AffineCoefficient>,
    pub theta_side: Vec<FitJson>,
    pub kappa: Vec<Vec<Cx>>,
    pub residual: f64,
}

impl ExpansionJson {
    pub fn new(r: &ExpansionReport) -> Self {
        let algebraic_side = (-2..=r.order)
            .filter_map(|k| {
                r.skw.coeff(k).map(|(c0, lin)| AffineCoefficient {
                    exponent: k,
                    constant: cx(c0),
                    kappa_coefficients: cvec(&lin),
                })
            })
            .collect();
        let theta_side = r
            .fits
            .iter()
            .map(|f| FitJson {
                ch: f.ch,
                coefficients: (-2..=r.order)
                    .filter_map(|k| {
                        f.sfw.coeff(k).map(|v| SeriesCoefficient { exponent: k, value: cx(v) })
                    })
                    .collect(),
                kappa: cmat(&f.kappa),
                residual: f.residual,
            })
            .collect();
        Self {
            order: r.order,
            algebraic_side,
            theta_side,
            kappa: cmat(&r.kappa),
            residual: r.residual,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        let s = to_json(&vec![0.1_f64, -2.5e-300, 3.0]);
        assert_eq!(s, "[1.0000000000000001e-1,-2.5000000000000000e-300,3.0000000000000000e0]");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, -2.5e-300, 3.0]);
        assert_eq!(to_json(&f64::NAN), "null");
    }

    #[test]
    fn parses_both_schemas() {
        let a = parse_curve_json(r#"{"branch_points":[[-2,0],[-1,0],[0,0],[1,0],[2,0]]}"#).unwrap();
        let b = parse_curve_json(r#"{"branch_points":[-2,-1,0,1,2]}"#).unwrap();
        assert_eq!(a.genus(), 2);
        for k in 0..5 {
            assert!((a.lambda(k) - b.lambda(k)).norm() < 1e-12);
        }
        let l = parse_curve_json(r#"{"genus":1,"lambda":[0,[-4,0],0]}"#).unwrap();
        assert_eq!(l.genus(), 1);
        assert!((l.lambda(1) + 4.0).norm() < 1e-15);
    }

    #[test]
    fn rejects_malformed_curves() {
        for bad in [
            "",
            "[]",
            "{}",
            r#"{"branch_points":[1,2]}"#,
            r#"{"branch_points":[1,2,"x"]}"#,
            r#"{"branch_points":[[1],[2],[3]]}"#,
            r#"{"genus":3,"lambda":[1,2,3]}"#,
            r#"{"genus":1,"lambda":[1,2]}"#,
            r#"{"lambda":[1,2,3]}"#,
            r#"{"genus":2,"branch_points":[1,2,3]}"#,
        ] {
            assert!(
                matches!(parse_curve_json(bad), Err(Error::InvalidInput(_))),
                "{bad}"
            );
        }
        assert!(matches!(
            parse_curve_json(r#"{"branch_points":[0,0,1]}"#),
            Err(Error::DegenerateCurve(..))
        ));
    }
}
