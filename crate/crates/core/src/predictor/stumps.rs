use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PredictorError, Result};

/// A fitted model that scores one feature vector.
pub trait Scorer: Send + Sync {
    /// Probability of the positive class, in `[0, 1]`.
    fn score(&self, x: &[f32]) -> Result<f64>;
}

/// Binary classifier contract. Fitted models travel as opaque, versioned
/// blobs so the registry does not depend on the engine.
pub trait Classifier: Send + Sync {
    fn name(&self) -> String;
    fn fit(&self, x: &[&[f32]], y: &[bool], seed: u64) -> Result<Vec<u8>>;
    fn load(&self, blob: &[u8]) -> Result<Box<dyn Scorer>>;
}

/// Gradient boosting of depth-one regression trees under logistic loss,
/// with Newton leaf values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostedStumps {
    pub rounds: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    /// Smallest hessian sum allowed on either side of a split.
    pub min_child_weight: f64,
    /// Bound on a raw leaf value before shrinkage.
    pub max_leaf: f64,
    /// Share of features considered per round (seeded).
    pub feature_fraction: f64,
}

impl Default for BoostedStumps {
    fn default() -> Self {
        BoostedStumps {
            rounds: 150,
            learning_rate: 0.1,
            lambda: 1.0,
            min_child_weight: 1.0,
            max_leaf: 2.0,
            feature_fraction: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    /// Values at or below go left.
    pub threshold: f32,
    pub left: f64,
    pub right: f64,
}

pub const STUMP_FORMAT: &str = "fundscape-stumps";
pub const STUMP_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StumpModel {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub base_score: f64,
    pub stumps: Vec<Stump>,
}

impl StumpModel {
    pub fn margin(&self, x: &[f32]) -> f64 {
        self.base_score
            + self
                .stumps
                .iter()
                .map(|s| if x[s.feature] <= s.threshold { s.left } else { s.right })
                .sum::<f64>()
    }

    pub fn from_blob(blob: &[u8]) -> Result<Self> {
        let model: StumpModel = serde_json::from_slice(blob).map_err(|e| PredictorError::Model(e.to_string()))?;
        if model.format != STUMP_FORMAT || model.version != STUMP_VERSION {
            return Err(PredictorError::Model(format!(
                "unsupported model {} v{}",
                model.format, model.version
            )));
        }
        if let Some(s) = model.stumps.iter().find(|s| s.feature >= model.dim) {
            return Err(PredictorError::Model(format!("stump feature {} outside {} dims", s.feature, model.dim)));
        }
        Ok(model)
    }

    pub fn to_blob(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("stump models serialize")
    }
}

impl Scorer for StumpModel {
    fn score(&self, x: &[f32]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(PredictorError::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(sigmoid(self.margin(x)))
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

struct Split {
    gain: f64,
    feature: usize,
    threshold: f32,
    left: (f64, f64),
}

/// Best split of one feature given presorted sample order.
fn best_split(feature: usize, order: &[u32], x: &[&[f32]], g: &[f64], h: &[f64], total: (f64, f64), cfg: &BoostedStumps) -> Option<Split> {
    let (gt, ht) = total;
    let parent = gt * gt / (ht + cfg.lambda);
    let (mut gl, mut hl) = (0.0, 0.0);
    let mut best: Option<Split> = None;
    for w in 0..order.len() - 1 {
        let i = order[w] as usize;
        gl += g[i];
        hl += h[i];
        let here = x[i][feature];
        let next = x[order[w + 1] as usize][feature];
        if here == next {
            continue;
        }
        let (gr, hr) = (gt - gl, ht - hl);
        if hl < cfg.min_child_weight || hr < cfg.min_child_weight {
            continue;
        }
        let gain = gl * gl / (hl + cfg.lambda) + gr * gr / (hr + cfg.lambda) - parent;
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            let mid = here + (next - here) / 2.0;
            best = Some(Split {
                gain,
                feature,
                threshold: if mid < next { mid } else { here },
                left: (gl, hl),
            });
        }
    }
    best
}

impl BoostedStumps {
    pub fn train(&self, x: &[&[f32]], y: &[bool], seed: u64) -> Result<StumpModel> {
        let n = x.len();
        if n != y.len() {
            return Err(PredictorError::Model(format!("{n} feature rows but {} labels", y.len())));
        }
        let positives = y.iter().filter(|l| **l).count();
        if positives == 0 || positives == n {
            return Err(PredictorError::SingleClass {
                positives,
                negatives: n - positives,
            });
        }
        let dim = x[0].len();
        if let Some(row) = x.iter().find(|r| r.len() != dim) {
            return Err(PredictorError::Dimension {
                expected: dim,
                got: row.len(),
            });
        }
        // Presort every non-constant feature once.
        let features: Vec<(usize, Vec<u32>)> = (0..dim)
            .into_par_iter()
            .filter_map(|j| {
                let first = x[0][j];
                if x.iter().all(|r| r[j] == first) {
                    return None;
                }
                let mut order: Vec<u32> = (0..n as u32).collect();
                order.sort_by(|&a, &b| x[a as usize][j].total_cmp(&x[b as usize][j]));
                Some((j, order))
            })
            .collect();

        let p0 = positives as f64 / n as f64;
        let base_score = (p0 / (1.0 - p0)).ln();
        let mut margin = vec![base_score; n];
        let mut stumps = Vec::with_capacity(self.rounds);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let per_round = ((features.len() as f64 * self.feature_fraction).ceil() as usize).clamp(1, features.len().max(1));
        for _ in 0..self.rounds {
            if features.is_empty() {
                break;
            }
            let p: Vec<f64> = margin.iter().map(|&m| sigmoid(m)).collect();
            let g: Vec<f64> = p.iter().zip(y).map(|(p, &l)| p - if l { 1.0 } else { 0.0 }).collect();
            let h: Vec<f64> = p.iter().map(|p| (p * (1.0 - p)).max(1e-12)).collect();
            let total = (g.iter().sum::<f64>(), h.iter().sum::<f64>());
            let mut chosen: Vec<usize> = if per_round < features.len() {
                sample(&mut rng, features.len(), per_round).into_vec()
            } else {
                (0..features.len()).collect()
            };
            chosen.sort_unstable();
            let best = chosen
                .par_iter()
                .filter_map(|&k| best_split(features[k].0, &features[k].1, x, &g, &h, total, self))
                .reduce_with(|a, b| if b.gain > a.gain || (b.gain == a.gain && b.feature < a.feature) { b } else { a });
            let Some(split) = best.filter(|s| s.gain > 1e-12) else {
                break;
            };
            let leaf = |gs: f64, hs: f64| (-gs / (hs + self.lambda)).clamp(-self.max_leaf, self.max_leaf) * self.learning_rate;
            let (gl, hl) = split.left;
            let stump = Stump {
                feature: split.feature,
                threshold: split.threshold,
                left: leaf(gl, hl),
                right: leaf(total.0 - gl, total.1 - hl),
            };
            for (m, row) in margin.iter_mut().zip(x) {
                *m += if row[stump.feature] <= stump.threshold { stump.left } else { stump.right };
            }
            stumps.push(stump);
        }
        Ok(StumpModel {
            format: STUMP_FORMAT.to_string(),
            version: STUMP_VERSION,
            dim,
            base_score,
            stumps,
        })
    }
}

impl Classifier for BoostedStumps {
    fn name(&self) -> String {
        format!("{STUMP_FORMAT}-v{STUMP_VERSION}")
    }

    fn fit(&self, x: &[&[f32]], y: &[bool], seed: u64) -> Result<Vec<u8>> {
        Ok(self.train(x, y, seed)?.to_blob())
    }

    fn load(&self, blob: &[u8]) -> Result<Box<dyn Scorer>> {
        Ok(Box::new(StumpModel::from_blob(blob)?))
    }
}
