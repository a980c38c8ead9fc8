use crate::grid::Grid;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: Grid, right: Grid },
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("fit needs at least 3 points of equal length, got {xs} abscissae and {ys} ordinates")]
    FitShape { xs: usize, ys: usize },
    #[error("fit abscissae are all equal")]
    DegenerateFit,
    #[error("requested {requested} eigenpairs from a matrix of order {order}")]
    EigenCount { requested: usize, order: usize },
    #[error("wrong potential variant: expected {expected}, got {got}")]
    WrongVariant { expected: &'static str, got: &'static str },
    #[error("empty interval [{0}, {1}]")]
    EmptyInterval(f64, f64),
    #[error("expected exactly two sign changes of U - E in the bracket, found {0}")]
    TurningPointCount(usize),
    #[error("parity check failed: {0}")]
    Parity(String),
    #[error("no bound state below the barrier top in the {0} well")]
    NoBoundState(&'static str),
    #[error("degenerate detuning {0:e}")]
    DegenerateDetuning(f64),
    #[error("orbitals are not orthogonal: overlap {0:e}")]
    NotOrthogonal(f64),
    #[error("energy {energy} lies {distance:e} from eigenvalue {eigenvalue}")]
    NearSingular { energy: f64, eigenvalue: f64, distance: f64 },
    #[error("empty tail window")]
    EmptyWindow,
    #[error("pair space dimension {dim} exceeds {max}")]
    DimensionExceeded { dim: usize, max: usize },
    #[error("no convergence after {iterations} iterations, residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("grid too narrow: Gaussian edge value {0:e} exceeds 1e-12")]
    GridTooNarrow(f64),
    #[error("core under-resolved: {points_per_core:.2} grid points per core length, need 8")]
    CoreUnderResolved { points_per_core: f64 },
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("insufficient linearity: R² = {r2:.6} below {floor} for {axes}")]
    InsufficientLinearity { r2: f64, floor: f64, axes: String },
    #[error("regime violated at {parameter} = {value}: {reason}")]
    Regime { parameter: &'static str, value: f64, reason: String },
}

impl Error {
    /// Errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::GridMismatch { .. }
                | Error::InvalidParameter { .. }
                | Error::FitShape { .. }
                | Error::DegenerateFit
                | Error::EigenCount { .. }
                | Error::WrongVariant { .. }
                | Error::EmptyInterval(..)
                | Error::InvalidScan(_)
                | Error::DimensionExceeded { .. }
        )
    }
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {v}") })
    }
}

pub(crate) fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite, got {v}") })
    }
}
