//! Symbolic expressions over coordinates and parameters.

mod compile;
mod diff;
mod error;
mod eval;
mod expr;
mod jet;
mod parse;
mod simplify;

pub use compile::CompiledExprs;
pub use diff::{differentiate, differentiate_raw};
pub use error::ExprError;
pub use eval::{evaluate, rational_to_f64, ParamEnv, Point};
pub use expr::{rat, ratio, Expr, Func, Node, Rational};
pub use parse::{parse, parse_with_params};
pub use simplify::simplify;
pub use jet::{invert_f64, invert_matrix, mat_mul, Jet, JetEvaluator, JetSpace};
