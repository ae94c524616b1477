//! Equilibrium background fields and their first derivatives.

pub mod dual;
pub mod expr;
mod field;

pub use expr::{parse_expr, BinOp, Expr, Func, Var};
pub use field::{eval_background, equilibrium_residual, BackgroundEval, BackgroundField};
