use serde::{Deserialize, Serialize};

use super::impact::{ImpactTables, ImpactVector};
use super::{MetricsError, Result};
use crate::store::{CorpusSnapshot, LinkType};

/// Scientific profile of a principal investigator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PIProfile {
    pub researcher_id: String,
    pub name: String,
    pub h_index: u64,
    /// Number of authored papers in the snapshot.
    pub productivity: u64,
    /// `log10(1 + mean(c10))`, 0 without papers.
    pub avg_log_c10: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub career_age: Option<i32>,
    pub grant_count: u64,
    /// Sum of the impact vectors of the PI's grants.
    pub impact: ImpactVector,
}

/// Largest `h` such that `h` of the counts are at least `h`.
pub fn h_index(citations: &[u64]) -> u64 {
    let mut sorted = citations.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|&(i, &c)| c > i as u64)
        .count() as u64
}

pub(crate) fn avg_log_c10(c10: &[u64]) -> f64 {
    if c10.is_empty() {
        return 0.0;
    }
    let mean = c10.iter().sum::<u64>() as f64 / c10.len() as f64;
    (1.0 + mean).log10()
}

pub fn pi_profile(
    snapshot: &CorpusSnapshot,
    tables: &ImpactTables,
    researcher_id: &str,
    query_year: i32,
) -> Result<PIProfile> {
    let r = snapshot
        .researcher_index(researcher_id)
        .ok_or_else(|| MetricsError::UnknownResearcher(researcher_id.to_string()))?;
    Ok(profile_at(snapshot, tables, r, query_year))
}

pub(crate) fn profile_at(
    snapshot: &CorpusSnapshot,
    tables: &ImpactTables,
    r: usize,
    query_year: i32,
) -> PIProfile {
    let researcher = &snapshot.researchers()[r];
    let papers = snapshot.backward(LinkType::PaperAuthor, r);
    let citations: Vec<u64> = papers.iter().map(|&p| snapshot.papers()[p].citation_count).collect();
    let c10: Vec<u64> = papers.iter().map(|&p| snapshot.papers()[p].c10).collect();
    let grants = snapshot.backward(LinkType::GrantPi, r);
    PIProfile {
        researcher_id: researcher.researcher_id.clone(),
        name: researcher.name.clone(),
        h_index: h_index(&citations),
        productivity: papers.len() as u64,
        avg_log_c10: avg_log_c10(&c10),
        career_age: researcher.first_pub_year.map(|y| query_year - y),
        grant_count: grants.len() as u64,
        impact: tables.sum_over(grants.iter().copied()),
    }
}
