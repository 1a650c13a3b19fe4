use thiserror::Error;

use crate::exprkit::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("empty domain box for coordinate `{0}`")]
    EmptyBox(String),
    #[error("metric is not symmetric at ({0}, {1})")]
    AsymmetricMetric(usize, usize),
    #[error("singular metric at {0}")]
    Singular(String),
    #[error("signature mismatch at {point}: declared {declared:?}, found {found:?}")]
    Signature {
        point: String,
        declared: Vec<i8>,
        found: Vec<i8>,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("slot {0} out of range or of the wrong variance")]
    InvalidSlot(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
