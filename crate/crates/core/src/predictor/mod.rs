//! Impact prediction: time-lag aware training sets per (impact type,
//! topic), boosted-stump classifiers over abstract embeddings, AUC
//! evaluation, a model registry and scoring of recent grants.

mod auc;
mod dataset;
mod embeddings;
mod outcomes;
mod pipeline;
mod registry;
mod selection;
mod stumps;
mod timelag;

pub use auc::{evaluate_auc, roc_auc_trapezoid};
pub use dataset::{build_training_set, Example, SplitConfig, TrainingSet};
pub use embeddings::EmbeddingTable;
pub use outcomes::{OutcomeIndex, RealizedOutcome};
pub use pipeline::{
    load_models, predict_and_highlight, resolve_time_lag, topic_seed, train_topic_model, train_topics,
    HighlightReport, LoadedModel, PiMetric, PredictionScore, RankedPi, SkippedTopic, TopicHighlight, TrainConfig,
    TrainedModel, TrainingSummary,
};
pub use registry::{sha256_hex, ModelEntry, ModelRegistry, RegistryManifest, TopicModelRecord, TrainingMetadata};
pub use selection::{select_topics, TopicCandidate};
pub use stumps::{BoostedStumps, Classifier, Scorer, Stump, StumpModel};
pub use timelag::{compute_time_lag, TimeLagTable};

use crate::metrics::ImpactType;
use crate::store::TopicPath;

#[derive(Debug, thiserror::Error)]
pub enum PredictorError {
    #[error("no realized {0} outcomes with years; supply a time-lag override")]
    NoRealizedPairs(ImpactType),
    #[error("time lag {y} for {impact} leaves no training years before {reference_year}")]
    TimeLag { impact: ImpactType, y: u32, reference_year: i32 },
    #[error("cannot train {impact} / {topic}: {reason}")]
    CannotTrain {
        impact: ImpactType,
        topic: TopicPath,
        reason: String,
    },
    #[error("AUC needs both classes, got {positives} positives and {negatives} negatives")]
    SingleClass { positives: usize, negatives: usize },
    #[error("non-finite score {0}")]
    NonFiniteScore(f64),
    #[error("model blob: {0}")]
    Model(String),
    #[error("feature vectors must have {expected} dimensions, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("registry: {0}")]
    Registry(String),
    #[error("registry io at {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Embed(#[from] crate::embed::EmbedError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
}

pub type Result<T, E = PredictorError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<std::path::PathBuf>) -> impl FnOnce(std::io::Error) -> PredictorError {
    let path = path.into();
    move |source| PredictorError::Io { path, source }
}
