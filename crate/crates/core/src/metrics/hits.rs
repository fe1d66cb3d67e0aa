use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{MetricsError, Result};
use crate::store::{CorpusSnapshot, TopicPath};

/// Hit papers are those whose citation count strictly exceeds the
/// `(1 - threshold)` quantile of their (field, year) group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HitPaperConfig {
    /// Top fraction considered a hit, in (0, 1).
    pub threshold: f64,
    /// Field-path depth used for grouping (1 = top-level field).
    pub field_level: usize,
}

impl Default for HitPaperConfig {
    fn default() -> Self {
        HitPaperConfig {
            threshold: 0.05,
            field_level: 1,
        }
    }
}

impl HitPaperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(MetricsError::Config(format!(
                "hit threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        if self.field_level == 0 {
            return Err(MetricsError::Config("field level must be at least 1".into()));
        }
        Ok(())
    }
}

/// Linear-interpolation quantile of ascending `sorted` values at `p`.
pub fn linear_quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// One flag per snapshot paper (same order as [`CorpusSnapshot::papers`]).
pub fn hit_paper_flags(snapshot: &CorpusSnapshot, config: &HitPaperConfig) -> Result<Vec<bool>> {
    config.validate()?;
    let papers = snapshot.papers();
    let mut groups: HashMap<(TopicPath, i32), Vec<usize>> = HashMap::new();
    for (i, p) in papers.iter().enumerate() {
        groups
            .entry((p.field_path.truncate(config.field_level), p.publication_year))
            .or_default()
            .push(i);
    }
    let mut flags = vec![false; papers.len()];
    for members in groups.values() {
        if members.len() < 2 {
            continue;
        }
        let mut counts: Vec<f64> = members.iter().map(|&i| papers[i].citation_count as f64).collect();
        counts.sort_by(f64::total_cmp);
        let cut = linear_quantile(&counts, 1.0 - config.threshold);
        for &i in members {
            flags[i] = papers[i].citation_count as f64 > cut;
        }
    }
    Ok(flags)
}
