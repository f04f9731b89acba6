//! Error taxonomy.
//!
//! Two families are kept apart on purpose: user-facing precondition failures
//! (bad dimensions, inadmissible arguments, inputs outside the class an
//! operation is defined for) and internal inconsistencies. The latter mark
//! identities that hold exactly in theory; when one fails numerically the
//! cause is a wrong tolerance or rank decision, never the input, so callers
//! should treat `Internal` as a bug report rather than a rejection.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, RelabError>;

#[derive(Debug, Error)]
pub enum RelabError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("relation is not sectorial: {0}")]
    NotSectorial(String),

    #[error("relation is not maximal sectorial: {0}")]
    NotMaximalSectorial(String),

    #[error("relation is not nonnegative selfadjoint: {0}")]
    NotNonnegSelfadjoint(String),

    #[error("sesquilinear form is ill-defined: {0}")]
    IllDefinedForm(String),

    #[error("not factorizable in mode {mode}: {violated}")]
    NotFactorizable { mode: &'static str, violated: String },

    #[error("unsupported factorization side: {0}")]
    UnsupportedSide(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("standing assumption not met: {0}")]
    AssumptionNotMet(String),

    /// A theorem-level identity failed numerically.
    #[error("internal inconsistency in {context}: residual {residual:.3e} exceeds {allowed:.3e}")]
    Internal {
        context: String,
        residual: f64,
        allowed: f64,
    },
}

impl RelabError {
    pub(crate) fn internal(context: impl Into<String>, residual: f64, allowed: f64) -> Self {
        RelabError::Internal {
            context: context.into(),
            residual,
            allowed,
        }
    }
}

/// Guard for theorem-level identities: `residual ≤ allowed` or an
/// `Internal` error naming the identity.
pub(crate) fn ensure_internal(context: &str, residual: f64, allowed: f64) -> Result<()> {
    if residual.is_finite() && residual <= allowed {
        Ok(())
    } else {
        Err(RelabError::internal(context, residual, allowed))
    }
}
