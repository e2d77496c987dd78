//! Desk-scale contrastive learning on rendered diagrams: a small patch
//! vision encoder and a hashed-token text encoder, the diagram-caption
//! contrastive loss and its domain-adaptation extension, linear probing and
//! retrieval metrics.
//!
//! Every gradient is written out by hand; tests compare them against
//! central differences.

pub mod checkpoint;
pub mod input;
pub mod loss;
pub mod nn;
pub mod optim;
pub mod probe;
pub mod retrieval;
pub mod text;
pub mod train;
pub mod vision;

use thiserror::Error;

pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointError, CHECKPOINT_VERSION};
pub use loss::{clip_da_loss, clip_loss, clip_loss_from_sim, DomainEmbeds};
pub use probe::{linear_probe, ProbeConfig, ProbeResult};
pub use retrieval::{retrieval_metrics, Retrieval};
pub use text::TextEncoderParams;
pub use train::{train_contrastive, ContrastiveConfig, DomainSet, Model, PairSet, TrainReport};
pub use vision::{VisionEncoderParams, EMBED_DIM};

#[derive(Debug, Error, PartialEq)]
pub enum ContrastiveError {
    #[error("expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("contrastive batch of {n} rows; need at least 2")]
    DegenerateBatch { n: usize },
    #[error("training diverged: initial loss {initial}, final loss {last}")]
    TrainingDiverged { initial: f64, last: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
