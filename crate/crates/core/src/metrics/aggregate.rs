use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::impact::{ImpactTables, ImpactVector};
use super::rii::{rii, ImpactIncidence};
use super::{ImpactType, MetricsError, Result};
use crate::store::{CorpusSnapshot, LinkType};

/// Grouping used by [`aggregate_impact`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "level", rename_all = "snake_case")]
pub enum AggregationLevel {
    /// One group per investigator, over the grants linked by `grant_pi`.
    Pi,
    /// One group per grant field path truncated to `depth` levels.
    Field { depth: usize },
    /// One group per funder organisation.
    Agency,
}

impl AggregationLevel {
    /// Parses `pi`, `agency`, `field` (depth 1) or `field:N`.
    pub fn parse(s: &str) -> Option<AggregationLevel> {
        match s {
            "pi" => Some(AggregationLevel::Pi),
            "agency" => Some(AggregationLevel::Agency),
            "field" => Some(AggregationLevel::Field { depth: 1 }),
            _ => {
                let depth = s.strip_prefix("field:")?.parse().ok()?;
                (depth > 0).then_some(AggregationLevel::Field { depth })
            }
        }
    }
}

impl fmt::Display for AggregationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregationLevel::Pi => f.write_str("pi"),
            AggregationLevel::Agency => f.write_str("agency"),
            AggregationLevel::Field { depth } => write!(f, "field:{depth}"),
        }
    }
}

/// RII per impact type; `None` where there is no baseline.
pub type RiiRow = BTreeMap<ImpactType, Option<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub grant_count: u64,
    pub total_funding: f64,
    pub impact: ImpactVector,
    pub incidence: ImpactIncidence,
    pub rii: RiiRow,
}

/// RII keyed by group, then impact type.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RiiTable {
    pub entries: BTreeMap<String, RiiRow>,
}

impl RiiTable {
    pub fn from_summaries(summaries: &[GroupSummary]) -> Self {
        RiiTable {
            entries: summaries.iter().map(|s| (s.group.clone(), s.rii.clone())).collect(),
        }
    }

    pub fn get(&self, group: &str, t: ImpactType) -> Option<f64> {
        self.entries.get(group).and_then(|row| row.get(&t).copied().flatten())
    }
}

impl ImpactTables {
    /// Incidence over every grant of the snapshot.
    pub fn global_incidence(&self) -> ImpactIncidence {
        ImpactIncidence::from_vectors(&self.grants)
    }

    pub fn incidence(&self, grants: &[usize]) -> ImpactIncidence {
        ImpactIncidence::from_vectors(grants.iter().map(|&g| &self.grants[g]))
    }

    /// RII row of a grant group (snapshot indices) against all grants.
    pub fn rii_row(&self, grants: &[usize]) -> Result<RiiRow> {
        if grants.is_empty() {
            return Err(MetricsError::EmptyGroup);
        }
        let global = self.global_incidence();
        let group = self.incidence(grants);
        ImpactType::ALL
            .into_iter()
            .map(|t| Ok((t, rii(&group, &global, t)?)))
            .collect()
    }
}

/// Grant indices per group key, groups in key order.
pub fn group_members(snapshot: &CorpusSnapshot, level: AggregationLevel) -> BTreeMap<String, Vec<usize>> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    match level {
        AggregationLevel::Pi => {
            for (r, researcher) in snapshot.researchers().iter().enumerate() {
                let grants = snapshot.backward(LinkType::GrantPi, r);
                if !grants.is_empty() {
                    groups.insert(researcher.researcher_id.clone(), grants.to_vec());
                }
            }
        }
        AggregationLevel::Field { depth } => {
            for (g, grant) in snapshot.grants().iter().enumerate() {
                groups
                    .entry(grant.field_path.truncate(depth).to_string())
                    .or_default()
                    .push(g);
            }
        }
        AggregationLevel::Agency => {
            for (g, grant) in snapshot.grants().iter().enumerate() {
                groups.entry(grant.funder_org.clone()).or_default().push(g);
            }
        }
    }
    groups
}

/// Sums member impact vectors per group and attaches the group's RII row.
pub fn aggregate_impact(
    snapshot: &CorpusSnapshot,
    tables: &ImpactTables,
    level: AggregationLevel,
) -> Result<Vec<GroupSummary>> {
    let global = tables.global_incidence();
    group_members(snapshot, level)
        .into_iter()
        .map(|(group, members)| {
            let incidence = tables.incidence(&members);
            let rii = ImpactType::ALL
                .into_iter()
                .map(|t| Ok((t, rii(&incidence, &global, t)?)))
                .collect::<Result<RiiRow>>()?;
            Ok(GroupSummary {
                group,
                grant_count: members.len() as u64,
                total_funding: members.iter().map(|&g| snapshot.grants()[g].funding_amount).sum(),
                impact: tables.sum_over(members.iter().copied()),
                incidence,
                rii,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_parsing_round_trips() {
        for level in [
            AggregationLevel::Pi,
            AggregationLevel::Agency,
            AggregationLevel::Field { depth: 2 },
        ] {
            assert_eq!(AggregationLevel::parse(&level.to_string()), Some(level));
        }
        assert_eq!(AggregationLevel::parse("field"), Some(AggregationLevel::Field { depth: 1 }));
        assert_eq!(AggregationLevel::parse("field:0"), None);
        assert_eq!(AggregationLevel::parse("lab"), None);
    }
}
