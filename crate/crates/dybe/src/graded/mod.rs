//! Groupoid-graded vector spaces, block operators and transfer operators.

mod block;
mod convolution;
mod space;
mod transfer;

pub use block::{enumerate_paths, path_endpoints, BlockKey, BlockOperator, FiberMatrix};
pub use convolution::{partial_trace, CoeffKind, ConvolutionElement};
pub use space::{graded_tensor, ConnSpace, GradedSpace, ObjRef, Slot, SlotArrow, TensorSummands};
pub use transfer::{
    matrix_element, triangle_up, TransferEntryKey, TransferKind, TransferOperator,
    TriangleOperator, TriangleSide,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GradedError {
    #[error("slot lists are incompatible: {0}")]
    SlotMismatch(String),
    #[error("block at {0} violates the grading constraint")]
    GradingViolation(String),
    #[error("block at {key} has shape {rows}x{cols}, expected {want_rows}x{want_cols}")]
    ShapeMismatch { key: String, rows: usize, cols: usize, want_rows: usize, want_cols: usize },
    #[error("source fiber of `{0}` is empty")]
    EmptyFiber(String),
    #[error("operator is not invertible: worst residual {residual:.3e} at grade {grade}")]
    NotInvertible { residual: f64, grade: String },
    #[error("operation requires one-dimensional components, found dim {0}")]
    NotOneDimensional(usize),
    #[error("space has no inverses for arrows (connecting slot): {0}")]
    NoInverses(String),
    #[error("transfer kinds are incompatible: {0}")]
    KindMismatch(String),
    #[error("distinguished Verma vector missing on `{0}`")]
    NotVermaType(String),
    #[error("groupoid mismatch: {0}")]
    GroupoidMismatch(String),
}
