//! Spinors on curved spaces: frames, spin connection, gamma matrices and the
//! standard Dirac, Killing and Dirac-type operators.

mod frame;
mod gamma;
mod operator;
mod spinor;

use thiserror::Error;

pub use frame::{frame_residual, orthonormal_frame, spin_connection, Frame, SpinConnection};
pub use gamma::{ExactMatrix, GammaRep, GaussRat};
pub use operator::{
    anticommutator_residual, apply_operator, commutator_residual, square_compare, LocalOperator, LocalSpin,
    OperatorSpec, SpinContext,
};
pub use spinor::{spinor_bank, CJet, SpinorField};

use crate::exprkit::ExprError;
use crate::killing::KillingError;
use crate::manifold::GeometryError;

#[derive(Debug, Error)]
pub enum SpinError {
    #[error("frame construction failed: {0}")]
    Frame(String),
    #[error("operator payload rejected: {0}")]
    Payload(String),
    #[error("spinor has {found} components, representation needs {expected}")]
    SpinorSize { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Killing(#[from] KillingError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
