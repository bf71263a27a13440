//! ZX diagrams: translation from circuits, the rewrite rules, full
//! reduction, and a dense tensor evaluator for checking semantics.

mod graph;
pub mod rules;
mod simplify;
mod tensor;
mod translate;

use thiserror::Error;

pub use graph::{EdgeType, VertexKind, ZxGraph};
pub use simplify::{
    full_reduce, full_reduce_observed, full_reduced, measure, sweep, to_graph_like, Measure, Rule,
};
pub use tensor::{zx_to_tensor, LinearMap, MAX_BOUNDARIES, MAX_FACTOR_VARS};
pub use translate::circuit_to_zx;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZxError {
    #[error("diagram too large for dense evaluation: {0}")]
    TooLarge(String),
}
