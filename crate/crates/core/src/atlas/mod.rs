//! Topic-level views of a snapshot: topic aggregation, keyword clouds,
//! field bubbles and impact-entity distributions.

mod bubbles;
mod entities;
mod keywords;
mod topics;

pub use bubbles::{grant_field_bubbles, BubbleConfig, ClassicalMds, FieldBubble, Reducer, Tsne};
pub use entities::{impact_entity_distribution, EntityDimension, HistogramBin};
pub use keywords::{keyword_cloud, node_keywords, KeywordSource, KeywordStat, Stopwords};
pub use topics::{
    aggregate_docs_by_topic, aggregate_grants_by_topic, aggregate_papers_by_topic, group_by_topic, TopicNodeKind,
    TopicNodeSummary, UNCLASSIFIED,
};

use crate::store::DocType;

#[derive(Debug, thiserror::Error)]
pub enum AtlasError {
    #[error("topic level must be at least 1, got {0}")]
    InvalidLevel(usize),
    #[error("dimension `{dimension}` does not apply to {doc_type} documents")]
    DimensionMismatch { dimension: String, doc_type: DocType },
    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error("unknown topic node `{0}`")]
    UnknownNode(String),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
}

pub type Result<T, E = AtlasError> = std::result::Result<T, E>;
