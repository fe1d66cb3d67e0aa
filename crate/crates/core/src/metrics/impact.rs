use std::collections::HashSet;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::disruption::counts_at;
use super::hits::{hit_paper_flags, HitPaperConfig};
use super::{ImpactType, MetricsError, Result};
use crate::store::{CorpusSnapshot, DocType, LinkType};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectImpact {
    pub papers: u64,
    pub hit_papers: u64,
    pub disruptive_papers: u64,
    pub patents: u64,
    pub clinical_trials: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroadImpact {
    pub patent_citations: u64,
    pub clinical_citations: u64,
    pub policy_citations: u64,
    pub newsfeed_citations: u64,
}

/// Outcome counts of a grant or a group of grants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpactVector {
    pub direct: DirectImpact,
    pub broad: BroadImpact,
}

impl ImpactVector {
    pub fn get(&self, t: ImpactType) -> u64 {
        match t {
            ImpactType::DirectPaper => self.direct.papers,
            ImpactType::DirectHitPaper => self.direct.hit_papers,
            ImpactType::DirectDisruptivePaper => self.direct.disruptive_papers,
            ImpactType::DirectPatent => self.direct.patents,
            ImpactType::DirectClinical => self.direct.clinical_trials,
            ImpactType::BroadPatent => self.broad.patent_citations,
            ImpactType::BroadClinical => self.broad.clinical_citations,
            ImpactType::BroadPolicy => self.broad.policy_citations,
            ImpactType::BroadNewsfeed => self.broad.newsfeed_citations,
        }
    }
}

impl Add for ImpactVector {
    type Output = ImpactVector;

    fn add(mut self, rhs: ImpactVector) -> ImpactVector {
        self += rhs;
        self
    }
}

impl AddAssign for ImpactVector {
    fn add_assign(&mut self, rhs: ImpactVector) {
        let (d, r) = (&mut self.direct, rhs.direct);
        d.papers += r.papers;
        d.hit_papers += r.hit_papers;
        d.disruptive_papers += r.disruptive_papers;
        d.patents += r.patents;
        d.clinical_trials += r.clinical_trials;
        let (b, r) = (&mut self.broad, rhs.broad);
        b.patent_citations += r.patent_citations;
        b.clinical_citations += r.clinical_citations;
        b.policy_citations += r.policy_citations;
        b.newsfeed_citations += r.newsfeed_citations;
    }
}

impl Sum for ImpactVector {
    fn sum<I: Iterator<Item = ImpactVector>>(iter: I) -> Self {
        iter.fold(ImpactVector::default(), Add::add)
    }
}

impl<'a> Sum<&'a ImpactVector> for ImpactVector {
    fn sum<I: Iterator<Item = &'a ImpactVector>>(iter: I) -> Self {
        iter.copied().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub hit: HitPaperConfig,
    /// Share of papers (ranked by disruption index) counted as disruptive.
    pub disruptive_top_fraction: f64,
    /// Count a broader-impact document once per grant instead of once per
    /// citing funded paper.
    pub dedup_broad: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            hit: HitPaperConfig::default(),
            disruptive_top_fraction: 0.05,
            dedup_broad: false,
        }
    }
}

/// Per-paper flags and per-grant impact vectors of one snapshot.
#[derive(Clone, Debug)]
pub struct ImpactTables {
    pub config: MetricsConfig,
    /// Disruption index per paper, `None` where undefined.
    pub disruption: Vec<Option<f64>>,
    pub hit: Vec<bool>,
    pub disruptive: Vec<bool>,
    /// Impact vector per grant, in snapshot grant order.
    pub grants: Vec<ImpactVector>,
}

impl ImpactTables {
    pub fn compute(snapshot: &CorpusSnapshot, config: &MetricsConfig) -> Result<Self> {
        let f = config.disruptive_top_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(MetricsError::Config(format!(
                "disruptive top fraction must lie in (0, 1], got {f}"
            )));
        }
        let hit = hit_paper_flags(snapshot, &config.hit)?;
        let disruption: Vec<Option<f64>> = (0..snapshot.papers().len())
            .map(|i| counts_at(snapshot, i).index())
            .collect();
        let disruptive = top_fraction(&disruption, f);
        let mut tables = ImpactTables {
            config: config.clone(),
            disruption,
            hit,
            disruptive,
            grants: Vec::new(),
        };
        tables.grants = (0..snapshot.grants().len())
            .map(|g| tables.impact_at(snapshot, g))
            .collect();
        Ok(tables)
    }

    fn impact_at(&self, snapshot: &CorpusSnapshot, g: usize) -> ImpactVector {
        let papers = snapshot.forward(LinkType::GrantPaper, g);
        let direct = DirectImpact {
            papers: papers.len() as u64,
            hit_papers: papers.iter().filter(|&&p| self.hit[p]).count() as u64,
            disruptive_papers: papers.iter().filter(|&&p| self.disruptive[p]).count() as u64,
            patents: snapshot.forward(LinkType::GrantPatent, g).len() as u64,
            clinical_trials: snapshot.forward(LinkType::GrantClinical, g).len() as u64,
        };
        let broad_count = |doc_type: DocType| -> u64 {
            let link = LinkType::broad_for(doc_type);
            if self.config.dedup_broad {
                let distinct: HashSet<usize> = papers
                    .iter()
                    .flat_map(|&p| snapshot.forward(link, p).iter().copied())
                    .collect();
                distinct.len() as u64
            } else {
                papers.iter().map(|&p| snapshot.forward(link, p).len() as u64).sum()
            }
        };
        ImpactVector {
            direct,
            broad: BroadImpact {
                patent_citations: broad_count(DocType::Patent),
                clinical_citations: broad_count(DocType::ClinicalTrial),
                policy_citations: broad_count(DocType::Policy),
                newsfeed_citations: broad_count(DocType::Newsfeed),
            },
        }
    }

    /// Impact vector of one grant.
    pub fn grant_impact(&self, snapshot: &CorpusSnapshot, grant_id: &str) -> Result<ImpactVector> {
        let g = snapshot
            .grant_index(grant_id)
            .ok_or_else(|| MetricsError::UnknownGrant(grant_id.to_string()))?;
        Ok(self.grants[g])
    }

    /// Summed impact of a set of grants (by snapshot index).
    pub fn sum_over(&self, grants: impl IntoIterator<Item = usize>) -> ImpactVector {
        grants.into_iter().map(|g| self.grants[g]).sum()
    }
}

/// Flags the top `fraction` of papers with a defined index: the
/// `ceil(fraction * n)` highest, ties broken by snapshot (id) order.
fn top_fraction(values: &[Option<f64>], fraction: f64) -> Vec<bool> {
    let mut ranked: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let k = (fraction * ranked.len() as f64).ceil() as usize;
    let mut flags = vec![false; values.len()];
    for &(i, _) in ranked.iter().take(k) {
        flags[i] = true;
    }
    flags
}
