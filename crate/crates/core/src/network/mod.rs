//! The pointer-softmax encoder–decoder.
//!
//! A bidirectional GRU reads the context; an optional entity GRU pools the
//! encoder states under one entity mention.  The decoder is a two-stage
//! GRU with additive attention whose output distribution mixes a softmax
//! over the vocabulary with the attention weights scattered back onto the
//! source tokens' vocabulary ids, gated by a learned switch.  Every
//! builder takes a [`Graph`] and returns node ids, so the same code path
//! serves training (with backward) and decoding (forward only).

mod decoder;
mod encoder;
mod params;

pub use decoder::{decoder_step, project_init, project_q1, session_step, StepOut};
pub use encoder::{encode_context, encode_entity, Encoded};
pub use params::{gru_cell, init_params, Bound, Gru, HyperParams};
