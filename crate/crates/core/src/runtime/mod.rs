//! Training, decoding, and persistence for the command-set generators.

mod beam;
mod checkpoint;
mod optim;
mod predict;
mod train;

pub use beam::{beam_search, greedy, Hypothesis, StepDecoder};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use optim::{OptimKind, Optimizer};
pub use predict::{predict_dataset, predict_point, NetDecoder, PredictConfig, Prediction};
pub use train::{train, EpochMetrics, TrainConfig, TrainOutcome};

#[derive(Debug, thiserror::Error)]
pub enum RuntimeError {
    #[error("loss became non-finite at epoch {epoch}, instance {instance}")]
    NonFinite { epoch: usize, instance: usize },
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
