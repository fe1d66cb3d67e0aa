use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::model::{DocType, GrantRecord, LinkType, TopicPath};
use super::{CorpusSnapshot, Result, StoreError};

/// Conjunctive grant filter. Unset predicates match everything; year bounds
/// apply to the grant start year and are inclusive, as are amount bounds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrantFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub funder_org: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year_min: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year_max: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amount_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amount_max: Option<f64>,
    /// Field-path prefix, `"A/B"` form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl GrantFilter {
    pub fn validate(&self) -> Result<()> {
        if let (Some(a), Some(b)) = (self.year_min, self.year_max) {
            if a > b {
                return Err(StoreError::InvalidFilter(format!("year range {a}..{b} is inverted")));
            }
        }
        for v in [self.amount_min, self.amount_max].into_iter().flatten() {
            if v.is_nan() {
                return Err(StoreError::InvalidFilter("amount bound is NaN".into()));
            }
        }
        if let (Some(a), Some(b)) = (self.amount_min, self.amount_max) {
            if a > b {
                return Err(StoreError::InvalidFilter(format!("amount range {a}..{b} is inverted")));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        *self == GrantFilter::default()
    }

    pub fn matches(&self, grant: &GrantRecord) -> bool {
        let year = grant.start_year();
        self.funder_org.as_ref().is_none_or(|f| &grant.funder_org == f)
            && self.year_min.is_none_or(|y| year >= y)
            && self.year_max.is_none_or(|y| year <= y)
            && self.amount_min.is_none_or(|a| grant.funding_amount >= a)
            && self.amount_max.is_none_or(|a| grant.funding_amount <= a)
            && self
                .field
                .as_ref()
                .is_none_or(|f| grant.field_path.starts_with(&TopicPath::parse(f)))
    }
}

impl CorpusSnapshot {
    /// Grants satisfying every predicate of `filter`, in id order.
    pub fn query_grants(&self, filter: &GrantFilter) -> Result<Vec<&GrantRecord>> {
        filter.validate()?;
        Ok(self.grants().iter().filter(|g| filter.matches(g)).collect())
    }
}

/// Whether outcomes are counted one hop from the grant or two hops through
/// its funded papers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpactMode {
    #[default]
    Direct,
    Broad,
}

impl ImpactMode {
    /// Outcome kinds that have clusters in this mode.
    pub fn outcome_kinds(self) -> &'static [OutcomeKind] {
        match self {
            ImpactMode::Direct => &[OutcomeKind::Paper, OutcomeKind::Patent, OutcomeKind::ClinicalTrial],
            ImpactMode::Broad => &[
                OutcomeKind::Patent,
                OutcomeKind::ClinicalTrial,
                OutcomeKind::Policy,
                OutcomeKind::Newsfeed,
            ],
        }
    }

    pub fn parse(s: &str) -> Option<ImpactMode> {
        match s {
            "direct" => Some(ImpactMode::Direct),
            "broad" => Some(ImpactMode::Broad),
            _ => None,
        }
    }
}

impl fmt::Display for ImpactMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImpactMode::Direct => "direct",
            ImpactMode::Broad => "broad",
        })
    }
}

/// A document kind that can be an outcome of a grant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Paper,
    Patent,
    ClinicalTrial,
    Policy,
    Newsfeed,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 5] = [
        OutcomeKind::Paper,
        OutcomeKind::Patent,
        OutcomeKind::ClinicalTrial,
        OutcomeKind::Policy,
        OutcomeKind::Newsfeed,
    ];

    pub fn doc_type(self) -> Option<DocType> {
        match self {
            OutcomeKind::Paper => None,
            OutcomeKind::Patent => Some(DocType::Patent),
            OutcomeKind::ClinicalTrial => Some(DocType::ClinicalTrial),
            OutcomeKind::Policy => Some(DocType::Policy),
            OutcomeKind::Newsfeed => Some(DocType::Newsfeed),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::Paper => "paper",
            OutcomeKind::Patent => "patent",
            OutcomeKind::ClinicalTrial => "clinical_trial",
            OutcomeKind::Policy => "policy",
            OutcomeKind::Newsfeed => "newsfeed",
        }
    }

    pub fn parse(s: &str) -> Option<OutcomeKind> {
        OutcomeKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl From<DocType> for OutcomeKind {
    fn from(t: DocType) -> Self {
        match t {
            DocType::Patent => OutcomeKind::Patent,
            DocType::ClinicalTrial => OutcomeKind::ClinicalTrial,
            DocType::Policy => OutcomeKind::Policy,
            DocType::Newsfeed => OutcomeKind::Newsfeed,
        }
    }
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One qualifying citation: `grant -> doc` (direct) or
/// `grant -> paper -> doc` (broad).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutcomeCitation<'a> {
    pub grant_id: &'a str,
    pub paper_id: Option<&'a str>,
    pub doc_id: &'a str,
}

/// Outcome documents of `grants`, one element per qualifying citation
/// chain. With `dedup`, a document counts once per grant no matter how many
/// of that grant's papers it cites.
pub fn linked_documents<'a>(
    snapshot: &'a CorpusSnapshot,
    grants: &[&str],
    kind: OutcomeKind,
    mode: ImpactMode,
    dedup: bool,
) -> Result<Vec<OutcomeCitation<'a>>> {
    let unsupported = || StoreError::UnsupportedCombination { kind, mode };
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for gid in grants {
        let Some(gi) = snapshot.grant_index(gid) else {
            continue;
        };
        let grant_id = snapshot.grants()[gi].grant_id.as_str();
        match mode {
            ImpactMode::Direct => {
                let (link, docs_are_papers) = match kind {
                    OutcomeKind::Paper => (LinkType::GrantPaper, true),
                    other => {
                        let t = other.doc_type().expect("non-paper kind");
                        (LinkType::direct_for(t).ok_or_else(unsupported)?, false)
                    }
                };
                for &ti in snapshot.forward(link, gi) {
                    let doc_id = if docs_are_papers {
                        snapshot.papers()[ti].paper_id.as_str()
                    } else {
                        snapshot.docs()[ti].doc_id.as_str()
                    };
                    out.push(OutcomeCitation {
                        grant_id,
                        paper_id: None,
                        doc_id,
                    });
                }
            }
            ImpactMode::Broad => {
                let doc_type = kind.doc_type().ok_or_else(unsupported)?;
                let link = LinkType::broad_for(doc_type);
                for &pi in snapshot.forward(LinkType::GrantPaper, gi) {
                    let paper_id = snapshot.papers()[pi].paper_id.as_str();
                    for &di in snapshot.forward(link, pi) {
                        let doc_id = snapshot.docs()[di].doc_id.as_str();
                        if dedup && !seen.insert((grant_id, doc_id)) {
                            continue;
                        }
                        out.push(OutcomeCitation {
                            grant_id,
                            paper_id: Some(paper_id),
                            doc_id,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}
