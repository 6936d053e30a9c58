use thiserror::Error;

use crate::order::ConeTag;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A*| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not a projection: {0}")]
    NotProjection(String),

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid spectral family: {0}")]
    InvalidFamily(String),

    #[error("element is outside the {cone} cone: {detail}")]
    NotInCone { cone: ConeTag, detail: String },

    #[error("operation is not defined on the {0} cone")]
    UnsupportedCone(ConeTag),

    #[error("invalid monotone bijection: {0}")]
    NotMonotone(String),

    #[error("linear map is singular (numerical rank {rank} < {n})")]
    SingularMap { rank: usize, n: usize },

    #[error("matrix is not unitary (max |U*U - I| = {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("invalid block profile: {0}")]
    InvalidProfile(String),

    #[error("invalid block permutation: {0}")]
    InvalidPermutation(String),

    #[error("element is not central: {0}")]
    NotCentral(String),

    #[error("oracle is not a spectral order isomorphism of direct-sum shape: {0}")]
    OracleShape(String),

    #[error("verification failed: residual {residual:e} exceeds {tolerance:e} ({what})")]
    VerificationFailed {
        what: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),
}
