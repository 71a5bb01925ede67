//! Generation toolkit for text-adventure *command sets*.
//!
//! The crate has three layers:
//!
//! * [`worldsim`] — a deterministic mini text-adventure engine that can
//!   generate random worlds, walk through them, and enumerate the exact set
//!   of admissible commands for any state.  Dataset emission lives here too.
//! * [`autograd`] / [`network`] / [`models`] — a small f64 reverse-mode
//!   autodiff engine and the three encoder–decoder architectures built on it
//!   (per-command beam-search decoding, hierarchical session decoding, and
//!   concatenated-sequence decoding), all sharing a pointer-softmax output
//!   layer.
//! * [`runtime`] / [`eval`] — training loop, beam search, prediction, and
//!   set-based precision/recall/F1 evaluation.
//!
//! Everything is deterministic given a seed: world generation, parameter
//! initialization, dropout masks, and shuffling all derive from [`rng::Rng`],
//! a counter-style splittable generator owned by this crate.

pub mod autograd;
pub mod eval;
pub mod models;
pub mod network;
pub mod rng;
pub mod runtime;
pub mod textcorpus;
pub mod worldsim;
