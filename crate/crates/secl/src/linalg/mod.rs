//! Dense and sparse matrix carriers used by every other module.

mod dense;
mod sparse;

pub use dense::DenseMatrix;
pub(crate) use dense::gemm;
pub use sparse::CsrMatrix;
