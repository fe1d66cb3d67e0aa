use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AtlasError, Result};
use crate::store::{DocType, ImpactDocRecord};

/// Attribute along which impact documents are histogrammed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityDimension {
    Assignee,
    PolicySource,
    TrialPhase,
    NewsOutlet,
    SourceCountry,
}

impl EntityDimension {
    pub const ALL: [EntityDimension; 5] = [
        EntityDimension::Assignee,
        EntityDimension::PolicySource,
        EntityDimension::TrialPhase,
        EntityDimension::NewsOutlet,
        EntityDimension::SourceCountry,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityDimension::Assignee => "assignee",
            EntityDimension::PolicySource => "policy_source",
            EntityDimension::TrialPhase => "trial_phase",
            EntityDimension::NewsOutlet => "news_outlet",
            EntityDimension::SourceCountry => "source_country",
        }
    }

    pub fn parse(s: &str) -> Result<EntityDimension> {
        EntityDimension::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| AtlasError::UnknownDimension(s.to_string()))
    }

    /// Document attribute holding this dimension, if it applies to `doc_type`.
    pub fn attribute(self, doc_type: DocType) -> Option<&'static str> {
        match (self, doc_type) {
            (EntityDimension::Assignee, DocType::Patent) => Some("assignee_org"),
            (EntityDimension::PolicySource, DocType::Policy) => Some("source_title"),
            (EntityDimension::TrialPhase, DocType::ClinicalTrial) => Some("phase"),
            (EntityDimension::NewsOutlet, DocType::Newsfeed) => Some("outlet"),
            (EntityDimension::SourceCountry, DocType::Policy) => Some("source_country"),
            (EntityDimension::SourceCountry, DocType::Newsfeed) => Some("country"),
            _ => None,
        }
    }
}

impl fmt::Display for EntityDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub value: String,
    pub count: u64,
}

/// Counts of `docs` (all of `doc_type`) per attribute value, by count
/// descending then value ascending. Documents missing the attribute are
/// skipped.
pub fn impact_entity_distribution<'a, I>(docs: I, doc_type: DocType, dimension: EntityDimension) -> Result<Vec<HistogramBin>>
where
    I: IntoIterator<Item = &'a ImpactDocRecord>,
{
    let attr = dimension.attribute(doc_type).ok_or(AtlasError::DimensionMismatch {
        dimension: dimension.to_string(),
        doc_type,
    })?;
    let mut counts: HashMap<String, u64> = HashMap::new();
    for doc in docs {
        if doc.doc_type != doc_type {
            return Err(AtlasError::DimensionMismatch {
                dimension: dimension.to_string(),
                doc_type: doc.doc_type,
            });
        }
        if let Some(v) = doc.attribute(attr) {
            *counts.entry(v).or_default() += 1;
        }
    }
    let mut bins: Vec<HistogramBin> = counts.into_iter().map(|(value, count)| HistogramBin { value, count }).collect();
    bins.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.value.cmp(&b.value)));
    Ok(bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::TopicPath;
    use std::collections::BTreeMap;

    fn doc(doc_type: DocType, key: &str, value: &str) -> ImpactDocRecord {
        ImpactDocRecord {
            doc_id: String::new(),
            doc_type,
            title: String::new(),
            year: 2010,
            topic_path: Some(TopicPath::parse("X")),
            attributes: BTreeMap::from([(key.to_string(), serde_json::json!(value))]),
        }
    }

    fn pairs(bins: &[HistogramBin]) -> Vec<(&str, u64)> {
        bins.iter().map(|b| (b.value.as_str(), b.count)).collect()
    }

    #[test]
    fn assignees() {
        let docs: Vec<_> = ["X", "X", "Y"].iter().map(|v| doc(DocType::Patent, "assignee_org", v)).collect();
        let h = impact_entity_distribution(&docs, DocType::Patent, EntityDimension::Assignee).unwrap();
        assert_eq!(pairs(&h), [("X", 2), ("Y", 1)]);
    }

    #[test]
    fn policy_countries() {
        let docs: Vec<_> = ["US", "UK", "UK", "IGO"]
            .iter()
            .map(|v| doc(DocType::Policy, "source_country", v))
            .collect();
        let h = impact_entity_distribution(&docs, DocType::Policy, EntityDimension::SourceCountry).unwrap();
        assert_eq!(pairs(&h), [("UK", 2), ("IGO", 1), ("US", 1)]);
    }

    #[test]
    fn mismatched_dimension() {
        let docs = [doc(DocType::Patent, "assignee_org", "X")];
        assert!(matches!(
            impact_entity_distribution(&docs, DocType::Patent, EntityDimension::TrialPhase),
            Err(AtlasError::DimensionMismatch { .. })
        ));
        assert!(EntityDimension::parse("colour").is_err());
    }
}
