use num_complex::Complex64;
use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{z} lies on the branch cut (-inf, 0]")]
    BranchCut { z: Complex64 },

    #[error("point {z} coincides with a Landau level")]
    AtLandauLevel { z: Complex64 },

    #[error("integrability assumption violated: {0}")]
    Integrability(String),

    #[error("quadrature did not converge: estimated error {error:.3e} exceeds tolerance {tolerance:.3e}")]
    Quadrature { error: f64, tolerance: f64 },

    #[error(
        "truncation insufficient: tail estimate {estimate:.3e} exceeds {tolerance:.3e} ({hint})"
    )]
    Truncation {
        estimate: f64,
        tolerance: f64,
        hint: String,
    },

    #[error("contour passes through a zero: |f| = {modulus:.3e} near {at}")]
    ContourZero { modulus: f64, at: Complex64 },

    #[error("winding number did not converge: accumulated phase {turns:.6} turns")]
    WindingNonConvergence { turns: f64 },

    #[error("evaluation budget of {budget} exhausted")]
    BudgetExhausted { budget: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("cluster ladder is empty: {0}")]
    EmptyLadder(String),

    #[error("function evaluation failed: {0}")]
    Evaluation(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::BranchCut { .. } => "branch_cut",
            Error::AtLandauLevel { .. } => "at_landau_level",
            Error::Integrability(_) => "integrability",
            Error::Quadrature { .. } => "quadrature",
            Error::Truncation { .. } => "truncation",
            Error::ContourZero { .. } => "contour_zero",
            Error::WindingNonConvergence { .. } => "winding_non_convergence",
            Error::BudgetExhausted { .. } => "budget_exhausted",
            Error::Eigensolver(_) => "eigensolver",
            Error::EmptyLadder(_) => "empty_ladder",
            Error::Evaluation(_) => "evaluation",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
