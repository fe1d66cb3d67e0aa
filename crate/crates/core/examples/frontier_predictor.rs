//! Train per-topic patent models into a registry, then score recent grants
//! and rank the investigators behind the highest-scoring ones.
//!
//! ```bash
//! cargo run --release -p fundscape --example frontier_predictor
//! ```

use fundscape::embed::HashingEmbedder;
use fundscape::metrics::{ImpactTables, ImpactType, MetricsConfig};
use fundscape::predictor::{
    load_models, predict_and_highlight, train_topics, BoostedStumps, EmbeddingTable, ModelRegistry, PiMetric,
    TrainConfig,
};
use fundscape::store::{generate_synthetic_corpus, MarkerRule, PlantedStructure, SynthSizes, TopicPath};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let planted = PlantedStructure {
        marker: Some(MarkerRule {
            token: "zephyrmarker".into(),
            grant_share: 0.3,
            patent_topic: TopicPath::parse("G06/G06N"),
            probability: 1.0,
        }),
        ..PlantedStructure::default()
    };
    let snapshot = generate_synthetic_corpus(11, &SynthSizes::scaled(600), &planted)?;
    let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default())?;
    let dir = tempfile::tempdir()?;
    let registry = ModelRegistry::open(dir.path())?;
    let embeddings = EmbeddingTable::load_or_compute(registry.root(), &snapshot, &HashingEmbedder::default())?;

    let config = TrainConfig {
        min_positives: 10,
        ..TrainConfig::default()
    };
    let summary = train_topics(&snapshot, &tables, &embeddings, ImpactType::DirectPatent, &config, &registry)?;
    println!("time lag {} years, training cutoff {}", summary.y, summary.cutoff_year);
    for r in &summary.trained {
        println!("  {} v{}: test AUC {:?}", r.topic, r.version, r.test_auc);
    }

    let (models, _) = load_models(&registry, ImpactType::DirectPatent, None, &BoostedStumps::default())?;
    let report =
        predict_and_highlight(&snapshot, &tables, &embeddings, ImpactType::DirectPatent, &models, 0.5, PiMetric::HIndex)?;
    println!("{} of {} recent scores above 0.5", report.highlighted.len(), report.scores.len());
    for pi in report.pis.iter().take(5) {
        println!("  #{} {} (h-index {})", pi.rank, pi.profile.name, pi.profile.h_index);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("frontier_predictor failed");
}
