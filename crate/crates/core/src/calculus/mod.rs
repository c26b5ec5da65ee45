//! Scalar fields on `Q × V × ℝ`, their partial derivatives, time
//! quadrature and the expression language for user-defined systems.

pub mod expr;
pub mod field;
pub mod quadrature;

pub use expr::{parse_expression, parse_with, Expression, ExpressionField, ParseContext, ParseError, ParseErrorKind};
pub use field::{directional, partial_q, partial_qdot, EvalError, Evaluate, GradientMode, ScalarField, Slot};
pub use quadrature::{integrate_pieces, integrate_time, try_integrate_time, QuadratureError};
