//! Structure-enhanced contrastive graph clustering.
//!
//! Two MLP encoders embed each node from its adjacency row and from its
//! low-pass filtered attributes. Training minimizes a structural MSE term, a
//! cross-view InfoNCE term and a soft modularity term on a reverse-mode tape,
//! and K-means on the attribute-view embedding gives the final clustering.

pub mod adam;
pub mod autodiff;
pub mod encoders;
pub mod error;
pub mod eval;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod losses;
pub mod par;

pub use error::{Error, Result};
pub use graph::Graph;
pub use linalg::{CsrMatrix, DenseMatrix};
