//! Dense and sparse complex linear algebra shared by both engines.
//!
//! All dense storage is row-major; see [`ComplexMatrix`].

mod expm;
mod matrix;
mod sparse;
mod svd;
mod tensor;

pub use expm::matexp;
pub(crate) use matrix::matmul_into;
pub use matrix::{kron, kron_all, ComplexMatrix};
pub use sparse::CsrMatrix;
pub use svd::{entropy_bits, lq, qr, svd_truncate, SvdResult};
pub use tensor::{contract, Tensor};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("input contains NaN or infinite entries")]
    NonFinite,
    #[error("degenerate input: matrix is identically zero")]
    Degenerate,
    #[error("singular value decomposition did not converge")]
    NoConvergence,
    #[error("matrix is singular to working precision")]
    Singular,
}
