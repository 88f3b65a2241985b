use std::path::PathBuf;

use thiserror::Error;

/// Errors shared across the pipeline.
#[derive(Error, Debug)]
pub enum SrnError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("ingest failed: {rejected} of {total} lines rejected (> {limit_pct}%), see {rejects_path:?}")]
    TooManyRejects {
        rejected: usize,
        total: usize,
        limit_pct: f64,
        rejects_path: PathBuf,
    },

    #[error("empty split side: train={train}, test={test} (boundary {boundary})")]
    EmptySplit {
        train: usize,
        test: usize,
        boundary: i64,
    },

    #[error("training diverged: non-finite loss at {context}")]
    Divergence { context: String },

    #[error("single-class input: {positives} positives, {negatives} negatives")]
    SingleClass { positives: usize, negatives: usize },

    #[error("degenerate sampling: {0}")]
    DegenerateSample(String),

    #[error("leakage guard: {0}")]
    Leakage(String),

    #[error("checkpoint format error in {path:?}: {reason}")]
    CheckpointFormat { path: PathBuf, reason: String },

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("io error on {path:?}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SrnError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SrnError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, SrnError>;
