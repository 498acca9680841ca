//! Reverse-mode differentiation over a fixed set of dense kernels, plus the
//! finite-difference oracle used to check it.

mod fd;
mod tape;

pub use fd::{finite_difference_grad, DEFAULT_FD_STEP};
pub use tape::{Gradients, NodeId, OpKind, Tape, ROW_NORM_EPS};
