//! Reverse-mode automatic differentiation over f64 tensors.
//!
//! A [`Graph`] is a tape: every operation appends a node holding its forward
//! value, and [`Graph::backward`] walks the tape in reverse creation order,
//! which is always a valid topological order.  Values are computed eagerly;
//! gradients accumulate across repeated `backward` calls until
//! [`Graph::zero_grads`] is called.
//!
//! Shape violations and out-of-range arguments are programmer errors and
//! panic with a message naming the offending shapes; they are not runtime
//! `Result`s.  Everything is `f64` throughout — gradient checking against
//! central finite differences (see [`grad_check`]) needs the headroom.

mod gradcheck;
mod graph;
mod tensor;

pub use gradcheck::{grad_check, Params};
pub use graph::{Graph, NodeId};
pub use tensor::Tensor;

/// Floor added inside `ln` for NLL losses so that zero probabilities produce
/// large finite losses instead of infinities.
pub const NLL_EPS: f64 = 1e-12;
