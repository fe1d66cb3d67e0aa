//! Field bubbles placed by abstract similarity, outcome entity histograms
//! and topic keyword clouds.
//!
//! ```bash
//! cargo run -p fundscape --example topic_atlas
//! ```

use fundscape::atlas::{
    aggregate_grants_by_topic, grant_field_bubbles, impact_entity_distribution, node_keywords, BubbleConfig,
    ClassicalMds, EntityDimension, KeywordSource, Stopwords,
};
use fundscape::embed::HashingEmbedder;
use fundscape::predictor::EmbeddingTable;
use fundscape::store::{generate_synthetic_corpus, DocType, PlantedStructure, SynthSizes};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let snapshot = generate_synthetic_corpus(5, &SynthSizes::scaled(300), &PlantedStructure::default())?;
    let embeddings = EmbeddingTable::compute(&snapshot, &HashingEmbedder::default())?;
    let all: Vec<usize> = (0..snapshot.grants().len()).collect();

    let bubbles = grant_field_bubbles(&snapshot, &embeddings.vectors, &all, &BubbleConfig::default(), &ClassicalMds, 0)?;
    for b in &bubbles {
        println!(
            "{:<12} at ({:7.1}, {:7.1}) r {:6.1}, {} grants",
            b.field_path.to_string(),
            b.position[0], b.position[1], b.radius, b.grant_count
        );
    }

    let bins = impact_entity_distribution(snapshot.docs_of(DocType::Patent), DocType::Patent, EntityDimension::Assignee)?;
    let counts: Vec<String> = bins.iter().map(|b| format!("{} {}", b.value, b.count)).collect();
    println!("patents by assignee: {}", counts.join(", "));

    let stopwords = Stopwords::default();
    for node in aggregate_grants_by_topic(&snapshot, None, &all, 1)?.iter().take(2) {
        let words = node_keywords(&snapshot, node, 5, KeywordSource::Abstract, &stopwords)?;
        let tokens: Vec<&str> = words.iter().map(|k| k.token.as_str()).collect();
        println!("{}: {}", node.id, tokens.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("topic_atlas failed");
}
