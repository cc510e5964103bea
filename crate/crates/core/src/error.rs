use thiserror::Error;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input: wrong dimensions, bad indices, unparsable data.
    Input,
    /// A mathematical hypothesis of the requested construction does not hold.
    Precondition,
    /// A numeric tolerance or resource bound was exceeded.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("jet base mismatch: inner image and outer base differ by {distance:.3e}")]
    BaseMismatch { distance: f64 },

    #[error("requested degree {requested} exceeds truncation order {order}")]
    OrderExceeded { requested: usize, order: usize },

    #[error("singular or ill-conditioned matrix (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not symplectic (residual {0:.3e})")]
    NotSymplectic(f64),

    #[error("polynomial map is not homogeneous of degree {0}")]
    NotHomogeneous(usize),

    #[error("vector field is not symplectic: d(i_P omega) has coefficient {residual:.3e} at ({i},{j})")]
    NotClosed { i: usize, j: usize, residual: f64 },

    #[error("jet is not symplectic of order {required}: defect coefficient g_{i}{j} of degree {degree} has magnitude {magnitude:.3e}")]
    NotSymplecticOfOrder {
        required: usize,
        i: usize,
        j: usize,
        degree: usize,
        magnitude: f64,
    },

    #[error("no well-conditioned basis found after {rounds} rounds (best condition {condition:.3e})")]
    BasisFailure { rounds: usize, condition: f64 },

    #[error("factorization exceeded the cap of {cap} factors ({detail})")]
    FactorCapExceeded { cap: usize, detail: String },

    #[error("duplicate points: {0}")]
    DuplicatePoints(String),

    #[error("ill-conditioned interpolation system (residual {residual:.3e})")]
    IllConditioned { residual: f64 },

    #[error("required degree {required} exceeds the cap {cap}")]
    DegreeExceeded { required: usize, cap: usize },

    #[error("region is not separated from the anchor point (margin {margin:.3e})")]
    RegionNotSeparated { margin: f64 },

    #[error("constraint point at the origin of the univariate chart: {0}")]
    ZeroConstraint(String),

    #[error("lambda-image collision in {stage}: {detail}")]
    Collision { stage: String, detail: String },

    #[error("no valid intermediate point found after {attempts} attempts")]
    NoIntermediate { attempts: usize },

    #[error("Jacobian determinant is not identically one (deviation {0:.3e})")]
    NonUnitJacobian(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DimensionMismatch { .. }
            | Error::IndexOutOfRange(_)
            | Error::Input(_) => ErrorKind::Input,
            Error::Singular { .. }
            | Error::BasisFailure { .. }
            | Error::FactorCapExceeded { .. }
            | Error::IllConditioned { .. }
            | Error::DegreeExceeded { .. }
            | Error::Verification(_) => ErrorKind::Numeric,
            _ => ErrorKind::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
