use serde::{Deserialize, Serialize};

use super::impact::ImpactVector;
use super::{ImpactType, MetricsError, Result};

/// Number of grants with at least one impact of each type, out of `total`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpactIncidence {
    pub total: u64,
    pub with_impact: [u64; 9],
}

impl ImpactIncidence {
    pub fn from_vectors<'a>(vectors: impl IntoIterator<Item = &'a ImpactVector>) -> Self {
        let mut inc = ImpactIncidence::default();
        for v in vectors {
            inc.total += 1;
            for (k, t) in ImpactType::ALL.into_iter().enumerate() {
                if v.get(t) >= 1 {
                    inc.with_impact[k] += 1;
                }
            }
        }
        inc
    }

    pub fn count(&self, t: ImpactType) -> u64 {
        self.with_impact[t as usize]
    }

    /// Share of grants with at least one impact of type `t`.
    pub fn fraction(&self, t: ImpactType) -> Option<f64> {
        (self.total > 0).then(|| self.count(t) as f64 / self.total as f64)
    }
}

/// `(group_hits / group_size) / (global_hits / global_size)`.
///
/// `Ok(None)` when the global fraction is zero (no baseline).
pub fn rii_from_counts(group_hits: u64, group_size: u64, global_hits: u64, global_size: u64) -> Result<Option<f64>> {
    if group_size == 0 {
        return Err(MetricsError::EmptyGroup);
    }
    if global_hits == 0 || global_size == 0 {
        return Ok(None);
    }
    let group = group_hits as f64 / group_size as f64;
    let global = global_hits as f64 / global_size as f64;
    Ok(Some(group / global))
}

/// Relative Impact Index of `group` for impact type `t` against `global`.
pub fn rii(group: &ImpactIncidence, global: &ImpactIncidence, t: ImpactType) -> Result<Option<f64>> {
    rii_from_counts(group.count(t), group.total, global.count(t), global.total)
}
