//! Dataset ingestion, splitting, batching, training with learning-rate
//! search, and evaluation.

mod batches;
mod corpus;
mod train;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use batches::{draw_positive, make_batches, Batch, TrainingPair};
pub use corpus::{apportion, ingest, split, Corpus, CorpusFile, Origin, SplitSpec, SplitUnit};
pub use train::{
    evaluate, evaluate_detector, evaluate_random, prepare_inputs, train, Algorithm, LrRun, RunRecord, Selection,
    TrainConfig, TrainedModel, SEED_ENV,
};

use crate::contrastive::ContrastiveError;
use crate::encode::{CheckpointError, EncodeError};
use crate::metrics::MetricError;
use crate::transform::CorpusError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("corpus holds no usable files")]
    EmptyCorpus,
    #[error("no file has a clone in the corpus")]
    NoClonePairs,
    #[error("need at least 5 split units, found {0}")]
    TooFewUnits(usize),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Yaml(#[from] serde_yaml::Error),
    #[error("{file}: {reason}")]
    Parse { file: String, reason: String },
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Contrastive(#[from] ContrastiveError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("every learning rate diverged")]
    AllRunsDiverged,
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_path_buf(), source }
    }
}

#[cfg(test)]
mod tests;
