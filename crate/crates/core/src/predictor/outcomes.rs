use std::collections::{BTreeMap, BTreeSet};

use crate::atlas::UNCLASSIFIED;
use crate::metrics::{ImpactTables, ImpactType};
use crate::store::{CorpusSnapshot, LinkType, OutcomeKind, TopicPath};

/// One realized outcome of a grant: the outcome's topic (at the index
/// level) and year.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RealizedOutcome {
    pub topic: TopicPath,
    pub year: i32,
}

/// Realized outcomes of one impact type for every grant, in grant order.
/// Broad outcomes list one entry per citation chain.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeIndex {
    pub impact: ImpactType,
    pub topic_level: usize,
    pub outcomes: Vec<Vec<RealizedOutcome>>,
}

impl OutcomeIndex {
    pub fn build(snapshot: &CorpusSnapshot, tables: &ImpactTables, impact: ImpactType, topic_level: usize) -> Self {
        let unclassified = TopicPath::parse(UNCLASSIFIED);
        let papers = snapshot.papers();
        let docs = snapshot.docs();
        let paper_outcome = |p: usize| RealizedOutcome {
            topic: papers[p].field_path.truncate(topic_level),
            year: papers[p].publication_year,
        };
        let doc_outcome = |d: usize| RealizedOutcome {
            topic: docs[d]
                .topic_path
                .as_ref()
                .filter(|t| !t.is_empty())
                .unwrap_or(&unclassified)
                .truncate(topic_level),
            year: docs[d].year,
        };
        let outcomes = (0..snapshot.grants().len())
            .map(|g| {
                let funded = snapshot.forward(LinkType::GrantPaper, g);
                match impact {
                    ImpactType::DirectPaper => funded.iter().map(|&p| paper_outcome(p)).collect(),
                    ImpactType::DirectHitPaper => {
                        funded.iter().filter(|&&p| tables.hit[p]).map(|&p| paper_outcome(p)).collect()
                    }
                    ImpactType::DirectDisruptivePaper => {
                        funded.iter().filter(|&&p| tables.disruptive[p]).map(|&p| paper_outcome(p)).collect()
                    }
                    ImpactType::DirectPatent => {
                        snapshot.forward(LinkType::GrantPatent, g).iter().map(|&d| doc_outcome(d)).collect()
                    }
                    ImpactType::DirectClinical => {
                        snapshot.forward(LinkType::GrantClinical, g).iter().map(|&d| doc_outcome(d)).collect()
                    }
                    broad => {
                        let doc_type = broad.outcome_kind().doc_type().expect("broad impacts are documents");
                        let link = LinkType::broad_for(doc_type);
                        let mut out = Vec::new();
                        for &p in funded {
                            out.extend(snapshot.forward(link, p).iter().map(|&d| doc_outcome(d)));
                        }
                        out
                    }
                }
            })
            .collect();
        OutcomeIndex {
            impact,
            topic_level,
            outcomes,
        }
    }

    pub fn outcome_kind(&self) -> OutcomeKind {
        self.impact.outcome_kind()
    }

    /// Whether grant `g` has at least one outcome in `topic`.
    pub fn has_topic(&self, g: usize, topic: &TopicPath) -> bool {
        self.outcomes[g].iter().any(|o| o.topic.starts_with(topic))
    }

    /// Grants with at least one outcome per topic, restricted to `eligible`.
    pub fn topic_members(&self, eligible: impl Fn(usize) -> bool) -> BTreeMap<TopicPath, BTreeSet<usize>> {
        let mut members: BTreeMap<TopicPath, BTreeSet<usize>> = BTreeMap::new();
        for (g, outs) in self.outcomes.iter().enumerate() {
            if !eligible(g) {
                continue;
            }
            for o in outs {
                members.entry(o.topic.clone()).or_default().insert(g);
            }
        }
        members
    }
}
