//! Record types of the science-ecosystem corpus.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

/// Root-to-leaf topic labels (ANZSRC field, CPC category, MeSH term, ...).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopicPath(pub Vec<String>);

impl TopicPath {
    pub fn new<I, S>(levels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TopicPath(levels.into_iter().map(Into::into).collect())
    }

    /// Parses `"A/B/C"` into three levels. Empty segments are skipped.
    pub fn parse(s: &str) -> Self {
        TopicPath(
            s.split('/')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(String::from)
                .collect(),
        )
    }

    pub fn levels(&self) -> &[String] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The first `level` labels (the whole path when it is shorter).
    pub fn truncate(&self, level: usize) -> TopicPath {
        TopicPath(self.0.iter().take(level).cloned().collect())
    }

    pub fn starts_with(&self, prefix: &TopicPath) -> bool {
        prefix.0.len() <= self.0.len() && self.0.iter().zip(&prefix.0).all(|(a, b)| a == b)
    }
}

impl fmt::Display for TopicPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("/"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrantRecord {
    pub grant_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub funding_amount: f64,
    pub funder_org: String,
    #[serde(default)]
    pub research_orgs: Vec<String>,
    pub grant_start_date: NaiveDate,
    pub grant_end_date: NaiveDate,
    #[serde(default)]
    pub investigator_ids: Vec<String>,
    pub field_path: TopicPath,
}

impl GrantRecord {
    pub fn start_year(&self) -> i32 {
        self.grant_start_date.year()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub title: String,
    pub publication_year: i32,
    pub field_path: TopicPath,
    pub citation_count: u64,
    /// Citations received within ten years of publication.
    pub c10: u64,
    #[serde(default)]
    pub author_ids: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Patent,
    ClinicalTrial,
    Policy,
    Newsfeed,
}

impl DocType {
    pub const ALL: [DocType; 4] = [
        DocType::Patent,
        DocType::ClinicalTrial,
        DocType::Policy,
        DocType::Newsfeed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Patent => "patent",
            DocType::ClinicalTrial => "clinical_trial",
            DocType::Policy => "policy",
            DocType::Newsfeed => "newsfeed",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            DocType::Patent => "patents.ndjson",
            DocType::ClinicalTrial => "clinical_trials.ndjson",
            DocType::Policy => "policies.ndjson",
            DocType::Newsfeed => "newsfeeds.ndjson",
        }
    }

    /// Attribute keys every record of this type must carry.
    pub fn required_attributes(self) -> &'static [&'static str] {
        match self {
            DocType::Patent => &["assignee_org"],
            DocType::ClinicalTrial => &["phase", "interventions"],
            DocType::Policy => &["source_type", "source_title", "source_country"],
            DocType::Newsfeed => &["outlet", "country"],
        }
    }

    pub fn parse(s: &str) -> Option<DocType> {
        DocType::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Patent, clinical trial, policy document or news item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpactDocRecord {
    pub doc_id: String,
    pub doc_type: DocType,
    pub title: String,
    pub year: i32,
    /// Absent for newsfeeds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic_path: Option<TopicPath>,
    #[serde(default)]
    pub attributes: BTreeMap<String, serde_json::Value>,
}

impl ImpactDocRecord {
    /// String form of an attribute; arrays are joined with `"; "`.
    pub fn attribute(&self, key: &str) -> Option<String> {
        match self.attributes.get(key)? {
            serde_json::Value::String(s) => Some(s.clone()),
            serde_json::Value::Null => None,
            serde_json::Value::Array(items) => Some(
                items
                    .iter()
                    .map(|v| v.as_str().map(String::from).unwrap_or_else(|| v.to_string()))
                    .collect::<Vec<_>>()
                    .join("; "),
            ),
            other => Some(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Female,
    Male,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResearcherRecord {
    pub researcher_id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_pub_year: Option<i32>,
    #[serde(default)]
    pub research_orgs: Vec<String>,
}

/// Entity kind a link endpoint resolves to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntityKind {
    Grant,
    Paper,
    Doc(DocType),
    Researcher,
}

/// Typed citation linkage. `source_id` is the entity named first in the
/// type name: a grant for `grant_*`, a paper for `paper_*`. For
/// `paper_paper` the source is the citing paper and the target the cited one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkType {
    GrantPaper,
    GrantPatent,
    GrantClinical,
    PaperPatent,
    PaperClinical,
    PaperPolicy,
    PaperNewsfeed,
    PaperPaper,
    GrantPi,
    PaperAuthor,
}

impl LinkType {
    pub const ALL: [LinkType; 10] = [
        LinkType::GrantPaper,
        LinkType::GrantPatent,
        LinkType::GrantClinical,
        LinkType::PaperPatent,
        LinkType::PaperClinical,
        LinkType::PaperPolicy,
        LinkType::PaperNewsfeed,
        LinkType::PaperPaper,
        LinkType::GrantPi,
        LinkType::PaperAuthor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkType::GrantPaper => "grant_paper",
            LinkType::GrantPatent => "grant_patent",
            LinkType::GrantClinical => "grant_clinical",
            LinkType::PaperPatent => "paper_patent",
            LinkType::PaperClinical => "paper_clinical",
            LinkType::PaperPolicy => "paper_policy",
            LinkType::PaperNewsfeed => "paper_newsfeed",
            LinkType::PaperPaper => "paper_paper",
            LinkType::GrantPi => "grant_pi",
            LinkType::PaperAuthor => "paper_author",
        }
    }

    pub fn file_name(self) -> String {
        format!("links_{}.ndjson", self.as_str())
    }

    pub fn endpoints(self) -> (EntityKind, EntityKind) {
        use EntityKind::*;
        match self {
            LinkType::GrantPaper => (Grant, Paper),
            LinkType::GrantPatent => (Grant, Doc(DocType::Patent)),
            LinkType::GrantClinical => (Grant, Doc(DocType::ClinicalTrial)),
            LinkType::PaperPatent => (Paper, Doc(DocType::Patent)),
            LinkType::PaperClinical => (Paper, Doc(DocType::ClinicalTrial)),
            LinkType::PaperPolicy => (Paper, Doc(DocType::Policy)),
            LinkType::PaperNewsfeed => (Paper, Doc(DocType::Newsfeed)),
            LinkType::PaperPaper => (Paper, Paper),
            LinkType::GrantPi => (Grant, Researcher),
            LinkType::PaperAuthor => (Paper, Researcher),
        }
    }

    /// `grant_X` link type for direct outcomes of a document type.
    pub fn direct_for(doc_type: DocType) -> Option<LinkType> {
        match doc_type {
            DocType::Patent => Some(LinkType::GrantPatent),
            DocType::ClinicalTrial => Some(LinkType::GrantClinical),
            DocType::Policy | DocType::Newsfeed => None,
        }
    }

    /// `paper_X` link type for broader outcomes of a document type.
    pub fn broad_for(doc_type: DocType) -> LinkType {
        match doc_type {
            DocType::Patent => LinkType::PaperPatent,
            DocType::ClinicalTrial => LinkType::PaperClinical,
            DocType::Policy => LinkType::PaperPolicy,
            DocType::Newsfeed => LinkType::PaperNewsfeed,
        }
    }
}

impl fmt::Display for LinkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CitationLink {
    pub source_id: String,
    pub target_id: String,
    pub link_type: LinkType,
}

/// Inclusive year range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearWindow {
    pub min: i32,
    pub max: i32,
}

impl YearWindow {
    pub fn new(min: i32, max: i32) -> Self {
        YearWindow { min, max }
    }

    pub fn contains(&self, year: i32) -> bool {
        year >= self.min && year <= self.max
    }

    pub fn is_empty(&self) -> bool {
        self.min > self.max
    }

    /// Parses `"2000:2021"`.
    pub fn parse(s: &str) -> Option<YearWindow> {
        let (a, b) = s.split_once(':')?;
        Some(YearWindow::new(a.trim().parse().ok()?, b.trim().parse().ok()?))
    }
}

impl Default for YearWindow {
    fn default() -> Self {
        YearWindow::new(2000, 2021)
    }
}
