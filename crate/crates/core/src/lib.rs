//! Weighted graphs, the semilinear inequality Δu + u^σ ≤ 0, and the tools
//! used to study when it has positive solutions.

// `!(x <= y)` is used on purpose so that NaN lands on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dirichlet;
pub mod error;
pub mod function;
pub mod generators;
pub mod graph;
pub mod hp;
pub mod io;
pub mod liouville;
pub mod numeric;
pub mod operators;
pub mod recurrence;
pub mod tree_example;
pub mod trend;

pub use error::{Error, ErrorKind, Result};
pub use function::VertexFunction;
pub use graph::{GraphBuilder, Violation, WeightedGraph};
pub use hp::{HpValue, Precision};
pub use operators::InteriorMask;
pub use tree_example::{CalibrationResult, ExampleParams};
pub use trend::{SeriesReport, Trend};
