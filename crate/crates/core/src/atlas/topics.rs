use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AtlasError, Result};
use crate::metrics::{ImpactTables, ImpactVector, RiiRow};
use crate::store::{CorpusSnapshot, DocType, OutcomeKind, TopicPath};

/// Topic label of documents that carry none (newsfeeds).
pub const UNCLASSIFIED: &str = "unclassified";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopicNodeKind {
    Grant,
    Paper,
    Patent,
    ClinicalTrial,
    Policy,
    Newsfeed,
}

impl TopicNodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TopicNodeKind::Grant => "grant",
            TopicNodeKind::Paper => "paper",
            TopicNodeKind::Patent => "patent",
            TopicNodeKind::ClinicalTrial => "clinical_trial",
            TopicNodeKind::Policy => "policy",
            TopicNodeKind::Newsfeed => "newsfeed",
        }
    }

    pub fn doc_type(self) -> Option<DocType> {
        match self {
            TopicNodeKind::Grant | TopicNodeKind::Paper => None,
            TopicNodeKind::Patent => Some(DocType::Patent),
            TopicNodeKind::ClinicalTrial => Some(DocType::ClinicalTrial),
            TopicNodeKind::Policy => Some(DocType::Policy),
            TopicNodeKind::Newsfeed => Some(DocType::Newsfeed),
        }
    }

    pub fn parse(s: &str) -> Option<TopicNodeKind> {
        [
            TopicNodeKind::Grant,
            TopicNodeKind::Paper,
            TopicNodeKind::Patent,
            TopicNodeKind::ClinicalTrial,
            TopicNodeKind::Policy,
            TopicNodeKind::Newsfeed,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

impl From<DocType> for TopicNodeKind {
    fn from(t: DocType) -> Self {
        match t {
            DocType::Patent => TopicNodeKind::Patent,
            DocType::ClinicalTrial => TopicNodeKind::ClinicalTrial,
            DocType::Policy => TopicNodeKind::Policy,
            DocType::Newsfeed => TopicNodeKind::Newsfeed,
        }
    }
}

impl From<OutcomeKind> for TopicNodeKind {
    fn from(k: OutcomeKind) -> Self {
        match k.doc_type() {
            Some(t) => t.into(),
            None => TopicNodeKind::Paper,
        }
    }
}

impl fmt::Display for TopicNodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Entities sharing a topic label prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicNodeSummary {
    /// `<kind>:<topic path>`, e.g. `grant:A/B` or `patent:G06/G06N`.
    pub id: String,
    pub kind: TopicNodeKind,
    pub topic_path: TopicPath,
    pub member_ids: Vec<String>,
    pub count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_funding: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impact: Option<ImpactVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rii: Option<RiiRow>,
}

impl TopicNodeSummary {
    pub fn node_id(kind: TopicNodeKind, path: &TopicPath) -> String {
        format!("{kind}:{path}")
    }
}

/// Groups `(member, topic)` pairs by the topic's prefix of `level` levels;
/// members without a topic go to [`UNCLASSIFIED`]. Member order is kept.
pub fn group_by_topic<'a, I>(items: I, level: usize) -> Result<BTreeMap<TopicPath, Vec<usize>>>
where
    I: IntoIterator<Item = (usize, Option<&'a TopicPath>)>,
{
    if level == 0 {
        return Err(AtlasError::InvalidLevel(level));
    }
    let mut groups: BTreeMap<TopicPath, Vec<usize>> = BTreeMap::new();
    for (member, topic) in items {
        let key = match topic {
            Some(t) if !t.is_empty() => t.truncate(level),
            _ => TopicPath::parse(UNCLASSIFIED),
        };
        groups.entry(key).or_default().push(member);
    }
    Ok(groups)
}

/// Grant topic nodes over `grants` (snapshot indices). With `tables`,
/// nodes carry their summed impact and RII row against all grants.
pub fn aggregate_grants_by_topic(
    snapshot: &CorpusSnapshot,
    tables: Option<&ImpactTables>,
    grants: &[usize],
    level: usize,
) -> Result<Vec<TopicNodeSummary>> {
    let all = snapshot.grants();
    let groups = group_by_topic(grants.iter().map(|&g| (g, Some(&all[g].field_path))), level)?;
    groups
        .into_iter()
        .map(|(path, members)| {
            let (impact, rii) = match tables {
                Some(t) => (Some(t.sum_over(members.iter().copied())), Some(t.rii_row(&members)?)),
                None => (None, None),
            };
            Ok(TopicNodeSummary {
                id: TopicNodeSummary::node_id(TopicNodeKind::Grant, &path),
                kind: TopicNodeKind::Grant,
                topic_path: path,
                count: members.len() as u64,
                total_funding: Some(members.iter().map(|&g| all[g].funding_amount).sum()),
                member_ids: members.iter().map(|&g| all[g].grant_id.clone()).collect(),
                impact,
                rii,
            })
        })
        .collect()
}

/// Impact topic nodes over `docs` (snapshot indices), one set per
/// document type.
pub fn aggregate_docs_by_topic(snapshot: &CorpusSnapshot, docs: &[usize], level: usize) -> Result<Vec<TopicNodeSummary>> {
    let all = snapshot.docs();
    let mut by_type: BTreeMap<DocType, Vec<usize>> = BTreeMap::new();
    for &d in docs {
        by_type.entry(all[d].doc_type).or_default().push(d);
    }
    let mut out = Vec::new();
    for (doc_type, members) in by_type {
        let kind = TopicNodeKind::from(doc_type);
        for (path, group) in group_by_topic(members.iter().map(|&d| (d, all[d].topic_path.as_ref())), level)? {
            out.push(TopicNodeSummary {
                id: TopicNodeSummary::node_id(kind, &path),
                kind,
                topic_path: path,
                count: group.len() as u64,
                member_ids: group.iter().map(|&d| all[d].doc_id.clone()).collect(),
                total_funding: None,
                impact: None,
                rii: None,
            });
        }
    }
    Ok(out)
}

/// Paper topic nodes over `papers` (snapshot indices), by field path.
pub fn aggregate_papers_by_topic(snapshot: &CorpusSnapshot, papers: &[usize], level: usize) -> Result<Vec<TopicNodeSummary>> {
    let all = snapshot.papers();
    let groups = group_by_topic(papers.iter().map(|&p| (p, Some(&all[p].field_path))), level)?;
    Ok(groups
        .into_iter()
        .map(|(path, members)| TopicNodeSummary {
            id: TopicNodeSummary::node_id(TopicNodeKind::Paper, &path),
            kind: TopicNodeKind::Paper,
            topic_path: path,
            count: members.len() as u64,
            member_ids: members.iter().map(|&p| all[p].paper_id.clone()).collect(),
            total_funding: None,
            impact: None,
            rii: None,
        })
        .collect())
}
