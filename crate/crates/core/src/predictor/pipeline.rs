use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{build_training_set, SplitConfig, TrainingSet};
use super::embeddings::EmbeddingTable;
use super::outcomes::OutcomeIndex;
use super::registry::{sha256_hex, ModelRegistry, TopicModelRecord, TrainingMetadata};
use super::selection::{select_topics, TopicCandidate};
use super::stumps::{BoostedStumps, Classifier, Scorer};
use super::timelag::{compute_time_lag, TimeLagTable};
use super::{evaluate_auc, PredictorError, Result};
use crate::layout::PredictionOverlay;
use crate::metrics::{profile_at, ImpactTables, ImpactType, PIProfile};
use crate::store::{CorpusSnapshot, LinkType, TopicPath};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Share of impacted grants the selected topics must exceed.
    pub coverage: f64,
    pub min_positives: usize,
    /// Depth at which outcome topics are grouped.
    pub topic_level: usize,
    /// Fixed time lags; impact types missing here are measured.
    pub time_lag: Option<TimeLagTable>,
    pub split: SplitConfig,
    pub seed: u64,
    pub classifier: BoostedStumps,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            coverage: 0.8,
            min_positives: 100,
            topic_level: 2,
            time_lag: None,
            split: SplitConfig::default(),
            seed: 0,
            classifier: BoostedStumps::default(),
        }
    }
}

/// A record together with its model blob, before publication.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub record: TopicModelRecord,
    pub blob: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedTopic {
    pub topic: TopicPath,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub impact: ImpactType,
    pub y: u32,
    pub cutoff_year: i32,
    pub selected: Vec<TopicCandidate>,
    pub trained: Vec<TopicModelRecord>,
    pub skipped: Vec<SkippedTopic>,
}

fn scored(scorer: &dyn Scorer, embeddings: &EmbeddingTable, set: &TrainingSet, idx: &[usize]) -> Result<Vec<(f64, bool)>> {
    idx.iter()
        .map(|&k| {
            let e = &set.examples[k];
            let s = scorer.score(embeddings.get(e.grant))?;
            if !s.is_finite() {
                return Err(PredictorError::NonFiniteScore(s));
            }
            Ok((s, e.label))
        })
        .collect()
}

/// Fits `classifier` on the training half of `set` and evaluates both
/// halves. The returned record is not yet versioned.
pub fn train_topic_model(
    set: &TrainingSet,
    embeddings: &EmbeddingTable,
    classifier: &dyn Classifier,
    seed: u64,
) -> Result<TrainedModel> {
    let x: Vec<&[f32]> = set.train.iter().map(|&k| embeddings.get(set.examples[k].grant)).collect();
    let y: Vec<bool> = set.train.iter().map(|&k| set.examples[k].label).collect();
    let blob = classifier.fit(&x, &y, seed)?;
    let scorer = classifier.load(&blob)?;
    let train = scored(scorer.as_ref(), embeddings, set, &set.train)?;
    let test = scored(scorer.as_ref(), embeddings, set, &set.test)?;
    let correct = train.iter().filter(|(s, l)| (*s > 0.5) == *l).count();
    let auc = |pairs: &[(f64, bool)]| -> Result<Option<f64>> {
        match evaluate_auc(pairs) {
            Ok(a) => Ok(Some(a)),
            Err(PredictorError::SingleClass { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let record = TopicModelRecord {
        impact: set.impact,
        topic: set.topic.clone(),
        version: 0,
        classifier: classifier.name(),
        blob_sha256: sha256_hex(&blob),
        blob_file: String::new(),
        test_auc: auc(&test)?,
        train_auc: auc(&train)?,
        train_accuracy: correct as f64 / train.len().max(1) as f64,
        metadata: TrainingMetadata {
            seed,
            y: set.y,
            cutoff_year: set.cutoff_year,
            positives: set.positives(),
            negatives: set.negatives(),
            train_size: set.train.len(),
            test_size: set.test.len(),
            available_positives: set.available_positives,
            available_negatives: set.available_negatives,
            embedding_provider: embeddings.provider.clone(),
            snapshot_id: embeddings.snapshot_id.clone(),
        },
    };
    Ok(TrainedModel { record, blob })
}

/// Seed of one (impact, topic) job, independent of scheduling order.
pub fn topic_seed(seed: u64, impact: ImpactType, topic: &TopicPath) -> u64 {
    let digest = sha256_hex(format!("{seed}/{impact}/{topic}").as_bytes());
    u64::from_str_radix(&digest[..16], 16).expect("hex digest")
}

/// Time lag of `impact`: the configured value if present, else measured.
pub fn resolve_time_lag(snapshot: &CorpusSnapshot, index: &OutcomeIndex, config: &TrainConfig) -> Result<u32> {
    match config.time_lag.as_ref().and_then(|t| t.get(index.impact)) {
        Some(y) => Ok(y),
        None => compute_time_lag(snapshot, index),
    }
}

/// Selects topics for `impact`, trains one model per topic in parallel and
/// publishes each to `registry` in topic order.
pub fn train_topics(
    snapshot: &CorpusSnapshot,
    tables: &ImpactTables,
    embeddings: &EmbeddingTable,
    impact: ImpactType,
    config: &TrainConfig,
    registry: &ModelRegistry,
) -> Result<TrainingSummary> {
    if embeddings.snapshot_id != snapshot.id() || embeddings.vectors.len() != snapshot.grants().len() {
        return Err(PredictorError::Registry(format!(
            "embeddings were computed for snapshot {}, not {}",
            embeddings.snapshot_id,
            snapshot.id()
        )));
    }
    let index = OutcomeIndex::build(snapshot, tables, impact, config.topic_level);
    let y = resolve_time_lag(snapshot, &index, config)?;
    let window = snapshot.window();
    let cutoff_year = window.max - y as i32;
    if y == 0 || cutoff_year < window.min {
        return Err(PredictorError::TimeLag {
            impact,
            y,
            reference_year: window.max,
        });
    }
    let grants = snapshot.grants();
    let members = index.topic_members(|g| (window.min..=cutoff_year).contains(&grants[g].start_year()));
    let selected = select_topics(&members, config.coverage, config.min_positives);
    log::info!("{impact}: Y = {y}, {} topics selected", selected.len());

    let outcomes: Vec<std::result::Result<TrainedModel, SkippedTopic>> = selected
        .par_iter()
        .map(|c| {
            let seed = topic_seed(config.seed, impact, &c.topic);
            let trained = build_training_set(snapshot, &index, &c.topic, y, &config.split, seed)
                .and_then(|set| train_topic_model(&set, embeddings, &config.classifier, seed));
            match trained {
                Ok(m) => Ok(Ok(m)),
                Err(e @ (PredictorError::CannotTrain { .. } | PredictorError::SingleClass { .. })) => {
                    Ok(Err(SkippedTopic {
                        topic: c.topic.clone(),
                        reason: e.to_string(),
                    }))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut trained = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(m) => trained.push(registry.publish(m.record, &m.blob)?),
            Err(s) => {
                log::warn!("skipping {impact} / {}: {}", s.topic, s.reason);
                skipped.push(s);
            }
        }
    }
    Ok(TrainingSummary {
        impact,
        y,
        cutoff_year,
        selected,
        trained,
        skipped,
    })
}

/// A published model ready to score.
pub struct LoadedModel {
    pub record: TopicModelRecord,
    pub scorer: Box<dyn Scorer>,
}

impl std::fmt::Debug for LoadedModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LoadedModel").field("record", &self.record).finish_non_exhaustive()
    }
}

/// Latest models of `impact`, optionally restricted to `topics`. Requested
/// topics without a usable model are reported as skipped.
pub fn load_models(
    registry: &ModelRegistry,
    impact: ImpactType,
    topics: Option<&[TopicPath]>,
    classifier: &dyn Classifier,
) -> Result<(Vec<LoadedModel>, Vec<SkippedTopic>)> {
    let records = registry.latest_records(impact)?;
    let mut models = Vec::new();
    let mut skipped = Vec::new();
    let wanted: Option<BTreeSet<&TopicPath>> = topics.map(|t| t.iter().collect());
    if let Some(wanted) = &wanted {
        for topic in wanted {
            if !records.iter().any(|r| &&r.topic == topic) {
                log::warn!("no {impact} model for topic {topic}");
                skipped.push(SkippedTopic {
                    topic: (*topic).clone(),
                    reason: "no model in registry".into(),
                });
            }
        }
    }
    for record in records {
        if wanted.as_ref().is_some_and(|w| !w.contains(&record.topic)) {
            continue;
        }
        let loaded = registry.blob(&record).and_then(|blob| classifier.load(&blob));
        match loaded {
            Ok(scorer) => models.push(LoadedModel { record, scorer }),
            Err(e) => {
                log::warn!("cannot load {impact} model for {}: {e}", record.topic);
                skipped.push(SkippedTopic {
                    topic: record.topic,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok((models, skipped))
}

/// Investigator metric used to rank PIs of highlighted grants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiMetric {
    #[default]
    HIndex,
    Productivity,
    AvgLogC10,
    GrantCount,
}

impl PiMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            PiMetric::HIndex => "h_index",
            PiMetric::Productivity => "productivity",
            PiMetric::AvgLogC10 => "avg_log_c10",
            PiMetric::GrantCount => "grant_count",
        }
    }

    pub fn parse(s: &str) -> Option<PiMetric> {
        [PiMetric::HIndex, PiMetric::Productivity, PiMetric::AvgLogC10, PiMetric::GrantCount]
            .into_iter()
            .find(|m| m.as_str() == s)
    }

    pub fn value(self, p: &PIProfile) -> f64 {
        match self {
            PiMetric::HIndex => p.h_index as f64,
            PiMetric::Productivity => p.productivity as f64,
            PiMetric::AvgLogC10 => p.avg_log_c10,
            PiMetric::GrantCount => p.grant_count as f64,
        }
    }
}

impl std::fmt::Display for PiMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionScore {
    pub grant_id: String,
    pub topic: TopicPath,
    pub impact: ImpactType,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicHighlight {
    pub topic: TopicPath,
    pub model_version: u32,
    /// Recent grants scored by this topic's model.
    pub scored: usize,
    pub high_score: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedPi {
    pub rank: usize,
    pub metric_value: f64,
    /// Highlighted grants led by this investigator.
    pub highlighted_grants: Vec<String>,
    pub profile: PIProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighlightReport {
    pub impact: ImpactType,
    pub threshold: f64,
    pub rank_by: PiMetric,
    pub scores: Vec<PredictionScore>,
    pub topics: Vec<TopicHighlight>,
    /// Grants scoring above the threshold for at least one topic, in
    /// snapshot order.
    pub highlighted: Vec<String>,
    pub pis: Vec<RankedPi>,
    pub skipped: Vec<SkippedTopic>,
}

impl HighlightReport {
    /// Best score per grant, for prediction-mode glyphs.
    pub fn overlay(&self) -> PredictionOverlay {
        let mut scores: HashMap<String, f64> = HashMap::new();
        for s in &self.scores {
            let best = scores.entry(s.grant_id.clone()).or_insert(s.score);
            *best = best.max(s.score);
        }
        PredictionOverlay {
            threshold: self.threshold,
            scores,
        }
    }
}

/// Scores every recent grant (start year after `window.max - Y` of the
/// model) with each model, and ranks the PIs of grants scoring above
/// `threshold` by `rank_by`.
pub fn predict_and_highlight<'a>(
    snapshot: &CorpusSnapshot,
    tables: &ImpactTables,
    embeddings: &EmbeddingTable,
    impact: ImpactType,
    models: impl IntoIterator<Item = &'a LoadedModel>,
    threshold: f64,
    rank_by: PiMetric,
) -> Result<HighlightReport> {
    let window = snapshot.window();
    let grants = snapshot.grants();
    let mut scores = Vec::new();
    let mut topics = Vec::new();
    let mut high: BTreeSet<usize> = BTreeSet::new();
    for model in models.into_iter().filter(|m| m.record.impact == impact) {
        let recent_after = window.max - model.record.metadata.y as i32;
        let recent: Vec<usize> = (0..grants.len())
            .filter(|&g| grants[g].start_year() > recent_after && grants[g].start_year() <= window.max)
            .collect();
        let topic_scores: Vec<(usize, f64)> = recent
            .par_iter()
            .map(|&g| {
                let s = model.scorer.score(embeddings.get(g))?;
                if !s.is_finite() {
                    return Err(PredictorError::NonFiniteScore(s));
                }
                Ok((g, s.clamp(0.0, 1.0)))
            })
            .collect::<Result<_>>()?;
        let mut high_score = 0;
        for &(g, s) in &topic_scores {
            if s > threshold {
                high_score += 1;
                high.insert(g);
            }
            scores.push(PredictionScore {
                grant_id: grants[g].grant_id.clone(),
                topic: model.record.topic.clone(),
                impact,
                score: s,
            });
        }
        topics.push(TopicHighlight {
            topic: model.record.topic.clone(),
            model_version: model.record.version,
            scored: topic_scores.len(),
            high_score,
        });
    }

    let mut led: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for &g in &high {
        for &r in snapshot.forward(LinkType::GrantPi, g) {
            led.entry(r).or_default().push(grants[g].grant_id.clone());
        }
    }
    let mut pis: Vec<RankedPi> = led
        .into_iter()
        .map(|(r, highlighted_grants)| {
            let profile = profile_at(snapshot, tables, r, window.max);
            RankedPi {
                rank: 0,
                metric_value: rank_by.value(&profile),
                highlighted_grants,
                profile,
            }
        })
        .collect();
    pis.sort_by(|a, b| {
        b.metric_value
            .total_cmp(&a.metric_value)
            .then_with(|| a.profile.researcher_id.cmp(&b.profile.researcher_id))
    });
    for (i, p) in pis.iter_mut().enumerate() {
        p.rank = i + 1;
    }
    Ok(HighlightReport {
        impact,
        threshold,
        rank_by,
        scores,
        topics,
        highlighted: high.iter().map(|&g| grants[g].grant_id.clone()).collect(),
        pis,
        skipped: Vec::new(),
    })
}
