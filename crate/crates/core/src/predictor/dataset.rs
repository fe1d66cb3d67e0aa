use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::outcomes::OutcomeIndex;
use super::{PredictorError, Result};
use crate::metrics::ImpactType;
use crate::store::{CorpusSnapshot, TopicPath};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Share of each class that goes to training, rounded half-up.
    pub train_fraction: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { train_fraction: 0.8 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    /// Snapshot grant index.
    pub grant: usize,
    pub grant_id: String,
    pub start_year: i32,
    pub label: bool,
}

/// Balanced, split examples for one (impact type, topic). `train` and
/// `test` index into `examples`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub topic: TopicPath,
    pub impact: ImpactType,
    pub y: u32,
    /// Last eligible grant start year.
    pub cutoff_year: i32,
    pub examples: Vec<Example>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Positives available before balancing.
    pub available_positives: usize,
    pub available_negatives: usize,
}

impl TrainingSet {
    pub fn positives(&self) -> usize {
        self.examples.iter().filter(|e| e.label).count()
    }

    pub fn negatives(&self) -> usize {
        self.examples.len() - self.positives()
    }
}

fn half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Grants starting in `[window.min, window.max - y]`, labelled by whether
/// they have an outcome in `topic`. Negatives are a seeded uniform sample
/// of equal size; if negatives are scarcer, positives are subsampled
/// instead. Each class is split separately so both halves stay balanced.
pub fn build_training_set(
    snapshot: &CorpusSnapshot,
    index: &OutcomeIndex,
    topic: &TopicPath,
    y: u32,
    split: &SplitConfig,
    seed: u64,
) -> Result<TrainingSet> {
    let window = snapshot.window();
    let cutoff_year = window.max - y as i32;
    if cutoff_year < window.min {
        return Err(PredictorError::TimeLag {
            impact: index.impact,
            y,
            reference_year: window.max,
        });
    }
    let cannot = |reason: String| PredictorError::CannotTrain {
        impact: index.impact,
        topic: topic.clone(),
        reason,
    };
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for (g, grant) in snapshot.grants().iter().enumerate() {
        let year = grant.start_year();
        if year < window.min || year > cutoff_year {
            continue;
        }
        if index.has_topic(g, topic) {
            positives.push(g);
        } else {
            negatives.push(g);
        }
    }
    let (available_positives, available_negatives) = (positives.len(), negatives.len());
    if positives.is_empty() {
        return Err(cannot(format!("no positive grants started {}..={cutoff_year}", window.min)));
    }
    if negatives.is_empty() {
        return Err(cannot("every eligible grant is positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = positives.len().min(negatives.len());
    positives.shuffle(&mut rng);
    negatives.shuffle(&mut rng);
    positives.truncate(n);
    negatives.truncate(n);

    let n_train = half_up(split.train_fraction * n as f64).min(n);
    let mut examples = Vec::with_capacity(2 * n);
    let mut train = Vec::with_capacity(2 * n_train);
    let mut test = Vec::with_capacity(2 * (n - n_train));
    let grants = snapshot.grants();
    for (class, label) in [(&positives, true), (&negatives, false)] {
        for (k, &g) in class.iter().enumerate() {
            if k < n_train {
                train.push(examples.len());
            } else {
                test.push(examples.len());
            }
            examples.push(Example {
                grant: g,
                grant_id: grants[g].grant_id.clone(),
                start_year: grants[g].start_year(),
                label,
            });
        }
    }
    Ok(TrainingSet {
        topic: topic.clone(),
        impact: index.impact,
        y,
        cutoff_year,
        examples,
        train,
        test,
        available_positives,
        available_negatives,
    })
}
