use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest row {row}: {message}")]
    ManifestRow { row: usize, message: String },

    #[error("duplicate doc_id {id:?} in manifest")]
    DuplicateDocId { id: String },

    #[error("manifest references missing file {path}")]
    MissingDocFile { path: PathBuf },

    #[error("invalid preprocessing config: {0}")]
    InvalidPreprocessConfig(String),

    #[error("every document is empty after preprocessing")]
    EmptyCorpus,

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("invalid sampling schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid topic-count grid: {0}")]
    InvalidGrid(String),

    #[error("held-out set is empty after dropping out-of-vocabulary tokens")]
    EmptyTestSet,

    #[error("cannot fold in an empty document")]
    EmptyDocument,

    #[error("model/corpus mismatch: {0}")]
    ModelMismatch(String),

    #[error("invalid periods: {0}")]
    InvalidPeriods(String),

    #[error("requested {requested} keywords but the vocabulary has only {vocab_size} terms")]
    TooManyKeywords { requested: usize, vocab_size: usize },

    #[error("unknown covariate {name:?}")]
    UnknownCovariate { name: String },

    #[error("covariate {name:?} is missing for every retained document")]
    AllMissingCovariate { name: String },

    #[error("covariate {name:?} is constant; collinear with the intercept")]
    ConstantCovariate { name: String },

    #[error("design matrix is rank deficient at column {column} ({name})")]
    RankDeficient { column: usize, name: String },

    #[error("{n} observations are too few for {p} parameters")]
    TooFewObservations { n: usize, p: usize },

    #[error("missing covariate value for covariate {name:?} in document {doc_id:?}")]
    MissingCovariateValue { name: String, doc_id: String },

    #[error("unsupported model file: {0}")]
    ModelFormat(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the error is the caller's input being invalid, as opposed
    /// to a data or runtime failure. The CLI maps this to exit code 2.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ManifestRow { .. }
                | Error::DuplicateDocId { .. }
                | Error::MissingDocFile { .. }
                | Error::InvalidPreprocessConfig(_)
                | Error::InvalidHyperparams(_)
                | Error::InvalidSchedule(_)
                | Error::InvalidSplit(_)
                | Error::InvalidGrid(_)
                | Error::InvalidPeriods(_)
                | Error::TooManyKeywords { .. }
                | Error::UnknownCovariate { .. }
                | Error::MissingCovariateValue { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
