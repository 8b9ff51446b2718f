//! Expression trees, the expression and metric-file parsers, and metric
//! specifications.

pub mod expr;
pub mod metric;
pub mod parser;

pub use expr::{Expr, Node, UnaryOp, NODE_CAP};
pub use metric::{parse_metric, MetricSpec, Point, Signature, MAX_METRIC_ORDER};
pub use parser::{parse_expr, parse_rational};
