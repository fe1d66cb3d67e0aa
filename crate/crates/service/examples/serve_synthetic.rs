//! Serve the HTTP API over a synthetic corpus with trained patent models.
//!
//! ```bash
//! cargo run --release -p fundscape-service --example serve_synthetic -- --serve
//! curl 'http://127.0.0.1:8080/api/landscape?mode=broad'
//! ```
//!
//! Without `--serve` the example binds an ephemeral port, issues a few
//! requests against itself and exits.

use std::sync::Arc;

use fundscape::embed::HashingEmbedder;
use fundscape::metrics::{ImpactTables, ImpactType, MetricsConfig};
use fundscape::predictor::{train_topics, EmbeddingTable, ModelRegistry, TrainConfig};
use fundscape::store::{generate_synthetic_corpus, MarkerRule, PlantedStructure, SynthSizes, TopicPath};
use fundscape_service::{router, AppState, ServiceConfig};

pub fn run_example(serve: bool) -> Result<(), Box<dyn std::error::Error>> {
    let planted = PlantedStructure {
        marker: Some(MarkerRule {
            token: "zephyrmarker".into(),
            grant_share: 0.3,
            patent_topic: TopicPath::parse("G06/G06N"),
            probability: 1.0,
        }),
        ..PlantedStructure::default()
    };
    let snapshot = generate_synthetic_corpus(1, &SynthSizes::scaled(500), &planted)?.into_shared();
    let dir = tempfile::tempdir()?;
    let registry = ModelRegistry::open(dir.path())?;
    let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default())?;
    let embeddings = EmbeddingTable::load_or_compute(registry.root(), &snapshot, &HashingEmbedder::default())?;
    let config = TrainConfig {
        min_positives: 10,
        ..TrainConfig::default()
    };
    train_topics(&snapshot, &tables, &embeddings, ImpactType::DirectPatent, &config, &registry)?;

    let state = Arc::new(AppState::from_parts(ServiceConfig::default(), snapshot, Some(&registry))?);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let addr = if serve { "127.0.0.1:8080" } else { "127.0.0.1:0" };
        let listener = tokio::net::TcpListener::bind(addr).await?;
        let addr = listener.local_addr()?;
        println!("listening on http://{addr}/api/health");
        let server = tokio::spawn(async move { axum::serve(listener, router(state)).await });
        if serve {
            tokio::signal::ctrl_c().await?;
            return Ok(());
        }
        for path in ["/api/health", "/api/impact-types?mode=broad", "/api/predictions?threshold=0.5"] {
            let body = tokio::task::spawn_blocking(move || fundscape_testkit::http::get(addr, path)).await??;
            let text = body.text();
            println!("GET {path} -> {} {}", body.status, &text[..text.len().min(160)]);
        }
        server.abort();
        Ok(())
    })
}

#[allow(dead_code)]
fn main() {
    let serve = std::env::args().any(|a| a == "--serve");
    run_example(serve).expect("serve_synthetic failed");
}
