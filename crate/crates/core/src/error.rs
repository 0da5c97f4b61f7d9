use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate curve: branch points {0} and {1} coincide within tolerance")]
    DegenerateCurve(usize, usize),

    #[error("root finding failed: residual {residual:e} above target")]
    RootFindingFailure { residual: f64 },

    #[error("invalid (n, s) pair ({n}, {s}): need gcd(n, s) = 1 and 2 <= n < s")]
    InvalidPair { n: u32, s: u32 },

    #[error("unsupported genus {0}: only genus 1 and 2 are handled")]
    UnsupportedGenus(usize),

    #[error("point is a branch point (y = 0); use the regularized integrals instead")]
    AtBranchPoint,

    #[error("point ({x}, {y}) is not on the curve (residual {residual:e})")]
    NotOnCurve { x: String, y: String, residual: f64 },

    #[error("projective connection formula not available for n = {0} (n <= 5 supported)")]
    UnsupportedDegree(u32),

    #[error("homology construction failed: {0}")]
    HomologyConstructionFailure(String),

    #[error("adaptive quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    QuadratureNonConvergence { tol: f64, estimate: f64 },

    #[error("no path from {from} to {to} keeps clear of the branch points")]
    PathThroughBranchPoint { from: String, to: String },

    #[error("Im tau is not positive definite (min eigenvalue {0:e})")]
    NotSiegelPoint(f64),

    #[error("two odd characteristics match branch point {0}")]
    AmbiguousMatching(usize),

    #[error("branch point match residual {residual:e} for branch point {index} exceeds the gate")]
    MatchResidual { index: usize, residual: f64 },

    #[error("expected one odd characteristic with vanishing V-derivative, found {0}")]
    NoGamma(usize),

    #[error("the characteristic of the Riemann constants cannot be used here")]
    GammaCharacteristic,

    #[error("series has a zero leading coefficient")]
    ZeroLeadingCoefficient,

    #[error("series operation leaves no known coefficients")]
    OrderUnderflow,

    #[error("series operation not defined: {0}")]
    SeriesDomain(&'static str),

    #[error("expansion system incompatible: relative residual {0:e}")]
    IncompatibleSystem(f64),

    #[error("finite-difference stencil too close to a branch point")]
    StencilDegenerate,

    #[error("singular matrix")]
    SingularMatrix,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Short machine-readable name used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateCurve(..) => "DegenerateCurve",
            Error::RootFindingFailure { .. } => "RootFindingFailure",
            Error::InvalidPair { .. } => "InvalidPair",
            Error::UnsupportedGenus(_) => "UnsupportedGenus",
            Error::AtBranchPoint => "AtBranchPoint",
            Error::NotOnCurve { .. } => "NotOnCurve",
            Error::UnsupportedDegree(_) => "UnsupportedDegree",
            Error::HomologyConstructionFailure(_) => "HomologyConstructionFailure",
            Error::QuadratureNonConvergence { .. } => "QuadratureNonConvergence",
            Error::PathThroughBranchPoint { .. } => "PathThroughBranchPoint",
            Error::NotSiegelPoint(_) => "NotSiegelPoint",
            Error::AmbiguousMatching(_) => "AmbiguousMatching",
            Error::MatchResidual { .. } => "MatchResidual",
            Error::NoGamma(_) => "NoGamma",
            Error::GammaCharacteristic => "GammaCharacteristic",
            Error::ZeroLeadingCoefficient => "ZeroLeadingCoefficient",
            Error::OrderUnderflow => "OrderUnderflow",
            Error::SeriesDomain(_) => "SeriesDomain",
            Error::IncompatibleSystem(_) => "IncompatibleSystem",
            Error::StencilDegenerate => "StencilDegenerate",
            Error::SingularMatrix => "SingularMatrix",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}
