#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use fundscape::embed::HashingEmbedder;
use fundscape::metrics::{ImpactTables, ImpactType, MetricsConfig};
use fundscape::predictor::{train_topics, EmbeddingTable, ModelRegistry, TrainConfig};
use fundscape::store::CorpusSnapshot;
use fundscape_service::schema::{schema, schema_for_path};
use fundscape_service::{router, AppState, ServiceConfig};
use fundscape_testkit::http::{get, HttpResponse};
use fundscape_testkit::predictor::planted_corpus;

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub snapshot: Arc<CorpusSnapshot>,
    pub registry: PathBuf,
}

impl Fixture {
    pub fn registry(&self) -> ModelRegistry {
        ModelRegistry::open(&self.registry).unwrap()
    }
}

/// Planted corpus with direct-patent models trained into a temp registry.
pub fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let snapshot = planted_corpus(11, 600).into_shared();
        let registry_dir = dir.path().join("models");
        let registry = ModelRegistry::open(&registry_dir).unwrap();
        let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default()).unwrap();
        let embeddings =
            EmbeddingTable::load_or_compute(registry.root(), &snapshot, &HashingEmbedder::default()).unwrap();
        let config = TrainConfig {
            min_positives: 10,
            ..TrainConfig::default()
        };
        let summary = train_topics(
            &snapshot,
            &tables,
            &embeddings,
            ImpactType::parse("direct_patent").unwrap(),
            &config,
            &registry,
        )
        .unwrap();
        assert!(!summary.trained.is_empty(), "fixture trained no models");
        Fixture {
            dir,
            snapshot,
            registry: registry_dir,
        }
    })
}

pub fn state(config: ServiceConfig, with_registry: bool) -> Arc<AppState> {
    let f = fixture();
    let registry = with_registry.then(|| f.registry());
    Arc::new(AppState::from_parts(config, f.snapshot.clone(), registry.as_ref()).unwrap())
}

/// Serves `state` on an ephemeral port from a background runtime.
pub fn spawn(state: Arc<AppState>) -> SocketAddr {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router(state)).await.unwrap();
        });
    });
    rx.recv().unwrap()
}

/// Errors of `instance` against the named shipped schema.
pub fn schema_errors(name: &str, instance: &serde_json::Value) -> Vec<String> {
    let text = schema(name).unwrap_or_else(|| panic!("no schema {name}"));
    let schema: serde_json::Value = serde_json::from_str(text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap_or_else(|e| panic!("schema {name}: {e}"));
    validator.iter_errors(instance).map(|e| format!("{}: {e}", e.instance_path())).collect()
}

/// GETs `path` and checks the body against the endpoint schema, or the
/// error schema for non-2xx answers.
pub fn fetch(addr: SocketAddr, path: &str) -> (HttpResponse, serde_json::Value) {
    let response = get(addr, path).unwrap();
    let body = response.json();
    let name = if response.status == 200 {
        let route = path.split('?').next().unwrap();
        schema_for_path(route).unwrap_or_else(|| panic!("no schema for {route}"))
    } else {
        "error"
    };
    let errors = schema_errors(name, &body);
    assert!(errors.is_empty(), "{path} violates {name} schema: {errors:#?}");
    (response, body)
}
