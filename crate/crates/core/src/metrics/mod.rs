//! Impact metrics over a corpus snapshot: direct outcomes, broader impacts,
//! PI scientific metrics, group aggregation and the Relative Impact Index.
//!
//! [`ImpactTables`] precomputes the per-paper flags (hit, disruptive) and
//! the per-grant [`ImpactVector`]s once per snapshot; everything else is a
//! cheap lookup or sum over those tables.

mod aggregate;
mod disruption;
mod hits;
mod impact;
mod pi;
mod rii;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use aggregate::{aggregate_impact, group_members, AggregationLevel, GroupSummary, RiiRow, RiiTable};
pub use disruption::{disruption_counts, disruption_index, DisruptionCounts};
pub use hits::{hit_paper_flags, linear_quantile, HitPaperConfig};
pub use impact::{BroadImpact, DirectImpact, ImpactTables, ImpactVector, MetricsConfig};
pub use pi::{h_index, pi_profile, PIProfile};
pub(crate) use pi::profile_at;
pub use rii::{rii, rii_from_counts, ImpactIncidence};

use crate::store::{ImpactMode, OutcomeKind};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("unknown paper `{0}`")]
    UnknownPaper(String),
    #[error("unknown grant `{0}`")]
    UnknownGrant(String),
    #[error("unknown researcher `{0}`")]
    UnknownResearcher(String),
    #[error("group of grants is empty")]
    EmptyGroup,
    #[error("invalid metrics config: {0}")]
    Config(String),
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

/// The nine impact dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpactType {
    DirectPaper,
    DirectHitPaper,
    DirectDisruptivePaper,
    DirectPatent,
    DirectClinical,
    BroadPatent,
    BroadClinical,
    BroadPolicy,
    BroadNewsfeed,
}

impl ImpactType {
    pub const ALL: [ImpactType; 9] = [
        ImpactType::DirectPaper,
        ImpactType::DirectHitPaper,
        ImpactType::DirectDisruptivePaper,
        ImpactType::DirectPatent,
        ImpactType::DirectClinical,
        ImpactType::BroadPatent,
        ImpactType::BroadClinical,
        ImpactType::BroadPolicy,
        ImpactType::BroadNewsfeed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ImpactType::DirectPaper => "direct_paper",
            ImpactType::DirectHitPaper => "direct_hit_paper",
            ImpactType::DirectDisruptivePaper => "direct_disruptive_paper",
            ImpactType::DirectPatent => "direct_patent",
            ImpactType::DirectClinical => "direct_clinical",
            ImpactType::BroadPatent => "broad_patent",
            ImpactType::BroadClinical => "broad_clinical",
            ImpactType::BroadPolicy => "broad_policy",
            ImpactType::BroadNewsfeed => "broad_newsfeed",
        }
    }

    pub fn parse(s: &str) -> Option<ImpactType> {
        ImpactType::ALL.into_iter().find(|t| t.as_str() == s)
    }

    pub fn mode(self) -> ImpactMode {
        match self {
            ImpactType::DirectPaper
            | ImpactType::DirectHitPaper
            | ImpactType::DirectDisruptivePaper
            | ImpactType::DirectPatent
            | ImpactType::DirectClinical => ImpactMode::Direct,
            _ => ImpactMode::Broad,
        }
    }

    /// Kind of document counted by this dimension.
    pub fn outcome_kind(self) -> OutcomeKind {
        match self {
            ImpactType::DirectPaper | ImpactType::DirectHitPaper | ImpactType::DirectDisruptivePaper => {
                OutcomeKind::Paper
            }
            ImpactType::DirectPatent | ImpactType::BroadPatent => OutcomeKind::Patent,
            ImpactType::DirectClinical | ImpactType::BroadClinical => OutcomeKind::ClinicalTrial,
            ImpactType::BroadPolicy => OutcomeKind::Policy,
            ImpactType::BroadNewsfeed => OutcomeKind::Newsfeed,
        }
    }

    /// The dimension a landscape cluster of `kind` is measured by in `mode`.
    pub fn for_cluster(mode: ImpactMode, kind: OutcomeKind) -> Option<ImpactType> {
        match (mode, kind) {
            (ImpactMode::Direct, OutcomeKind::Paper) => Some(ImpactType::DirectPaper),
            (ImpactMode::Direct, OutcomeKind::Patent) => Some(ImpactType::DirectPatent),
            (ImpactMode::Direct, OutcomeKind::ClinicalTrial) => Some(ImpactType::DirectClinical),
            (ImpactMode::Broad, OutcomeKind::Patent) => Some(ImpactType::BroadPatent),
            (ImpactMode::Broad, OutcomeKind::ClinicalTrial) => Some(ImpactType::BroadClinical),
            (ImpactMode::Broad, OutcomeKind::Policy) => Some(ImpactType::BroadPolicy),
            (ImpactMode::Broad, OutcomeKind::Newsfeed) => Some(ImpactType::BroadNewsfeed),
            _ => None,
        }
    }
}

impl fmt::Display for ImpactType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
