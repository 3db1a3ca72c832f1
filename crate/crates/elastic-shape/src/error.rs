//! Error type shared by every layer of the crate.

use thiserror::Error;

/// Errors produced by the geometry, transform and alignment layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands have incompatible matrix dimensions.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// Operands live in different groups (or one is not a group element).
    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    /// A matrix failed a group membership check beyond the repair threshold.
    #[error("not a member of {group}: {detail}")]
    NotInGroup { group: String, detail: String },

    /// A matrix that must be symmetric positive definite is not.
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    /// A rotation has angle pi in some plane; the principal logarithm has
    /// two branches of equal norm and no canonical choice is made.
    #[error("rotation angle equals pi within tolerance: logarithm branch is ambiguous")]
    AmbiguousLog,

    /// Two unit vectors are antipodal, so no unique shortest rotation exists.
    #[error("antipodal points: no unique shortest rotation between them")]
    AntipodalPoints,

    /// An iterative routine exhausted its iteration budget.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e}) in {context}")]
    NoConvergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    /// The finite-difference Jacobian of the fiber defect is numerically singular.
    #[error("jacobian of the fiber defect map is numerically singular")]
    SingularJacobian,

    /// A reparametrization violates monotonicity or its boundary conditions.
    #[error("invalid reparametrization: {0}")]
    InvalidGamma(String),

    /// The subgroup element passed to a K-action is not in the embedded K.
    #[error("subgroup mismatch: {0}")]
    SubgroupMismatch(String),

    /// An evaluation-based K-optimizer was requested for a K of dimension > 1.
    #[error("K is not one-dimensional; the evaluation optimizer only applies to SO(2)")]
    NotOneDimensional,

    /// A manifold point violates its defining constraint.
    #[error("constraint violation at sample {index}: {detail}")]
    ConstraintViolation { index: usize, detail: String },

    /// A curve file could not be parsed.
    #[error("parse error in {path} at line {line}: {detail}")]
    Parse {
        path: String,
        line: usize,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
