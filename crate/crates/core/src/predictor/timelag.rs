use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::outcomes::OutcomeIndex;
use super::{PredictorError, Result};
use crate::metrics::ImpactType;
use crate::store::CorpusSnapshot;

/// Years between a grant's start and its typical outcome, per impact type.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeLagTable(pub BTreeMap<ImpactType, u32>);

impl TimeLagTable {
    /// Lags measured on the full grant population.
    pub fn case_one() -> Self {
        use ImpactType::*;
        TimeLagTable(BTreeMap::from([
            (DirectPaper, 5),
            (DirectHitPaper, 5),
            (DirectDisruptivePaper, 5),
            (DirectPatent, 6),
            (DirectClinical, 2),
            (BroadPatent, 9),
            (BroadClinical, 8),
            (BroadPolicy, 10),
            (BroadNewsfeed, 6),
        ]))
    }

    /// Lags of the second case-study subset; it has no clinical outcomes.
    pub fn case_two() -> Self {
        use ImpactType::*;
        TimeLagTable(BTreeMap::from([
            (DirectPaper, 3),
            (DirectHitPaper, 3),
            (DirectDisruptivePaper, 3),
            (DirectPatent, 5),
            (BroadPatent, 8),
            (BroadPolicy, 7),
            (BroadNewsfeed, 3),
        ]))
    }

    pub fn get(&self, impact: ImpactType) -> Option<u32> {
        self.0.get(&impact).copied()
    }
}

/// Mean years from grant start to realized outcome, rounded half-up and
/// clamped so that at least one training year remains in the window.
pub fn compute_time_lag(snapshot: &CorpusSnapshot, index: &OutcomeIndex) -> Result<u32> {
    let grants = snapshot.grants();
    let mut total = 0i64;
    let mut n = 0i64;
    for (g, outs) in index.outcomes.iter().enumerate() {
        let start = grants[g].start_year();
        for o in outs {
            total += (o.year - start) as i64;
            n += 1;
        }
    }
    if n == 0 {
        return Err(PredictorError::NoRealizedPairs(index.impact));
    }
    let window = snapshot.window();
    let max_y = (window.max - window.min).max(1) as i64;
    // Half-up on the exact rational mean: floor(total / n + 1/2).
    let rounded = (2 * total + n).div_euclid(2 * n);
    Ok(rounded.clamp(1, max_y) as u32)
}
