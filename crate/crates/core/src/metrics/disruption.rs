use serde::{Deserialize, Serialize};

use super::{MetricsError, Result};
use crate::store::{CorpusSnapshot, LinkType};

/// Citation-neighbourhood counts of a focal paper.
///
/// * `n_i`: papers citing the focal paper but none of its references
/// * `n_j`: papers citing the focal paper and at least one of its references
/// * `n_k`: references of the focal paper not cited by any of its citers
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisruptionCounts {
    pub n_i: u64,
    pub n_j: u64,
    pub n_k: u64,
}

impl DisruptionCounts {
    pub fn new(n_i: u64, n_j: u64, n_k: u64) -> Self {
        DisruptionCounts { n_i, n_j, n_k }
    }

    /// `(n_i - n_j) / (n_i + n_j + n_k)`, `None` when the denominator is 0.
    pub fn index(&self) -> Option<f64> {
        let denom = self.n_i + self.n_j + self.n_k;
        if denom == 0 {
            return None;
        }
        Some((self.n_i as f64 - self.n_j as f64) / denom as f64)
    }
}

fn sorted_intersects(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

pub(crate) fn counts_at(snapshot: &CorpusSnapshot, focal: usize) -> DisruptionCounts {
    let citers = snapshot.backward(LinkType::PaperPaper, focal);
    let refs = snapshot.forward(LinkType::PaperPaper, focal);
    let mut counts = DisruptionCounts::default();
    let mut ref_cited = vec![false; refs.len()];
    for &c in citers {
        let cited_by_c = snapshot.forward(LinkType::PaperPaper, c);
        if sorted_intersects(cited_by_c, refs) {
            counts.n_j += 1;
            for (k, r) in refs.iter().enumerate() {
                if !ref_cited[k] && cited_by_c.binary_search(r).is_ok() {
                    ref_cited[k] = true;
                }
            }
        } else {
            counts.n_i += 1;
        }
    }
    counts.n_k = ref_cited.iter().filter(|c| !**c).count() as u64;
    counts
}

pub fn disruption_counts(snapshot: &CorpusSnapshot, paper_id: &str) -> Result<DisruptionCounts> {
    let focal = snapshot
        .paper_index(paper_id)
        .ok_or_else(|| MetricsError::UnknownPaper(paper_id.to_string()))?;
    Ok(counts_at(snapshot, focal))
}

/// Disruption index of a paper over the corpus' `paper_paper` links;
/// `Ok(None)` when the paper has neither citers nor references.
pub fn disruption_index(snapshot: &CorpusSnapshot, paper_id: &str) -> Result<Option<f64>> {
    Ok(disruption_counts(snapshot, paper_id)?.index())
}
