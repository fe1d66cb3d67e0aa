use std::collections::BTreeMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use lru::LruCache;

use fundscape::atlas::Stopwords;
use fundscape::embed::{EmbeddingProvider, HashingEmbedder};
use fundscape::layout::LandscapeLayout;
use fundscape::metrics::{ImpactTables, ImpactType};
use fundscape::predictor::{load_models, BoostedStumps, EmbeddingTable, LoadedModel, ModelRegistry, SkippedTopic};
use fundscape::store::{CorpusSnapshot, ImpactMode};

use crate::config::ServiceConfig;
use crate::error::{ApiError, ServiceError};

/// Identity of one computed landscape.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LandscapeKey {
    pub snapshot_id: String,
    pub field: String,
    pub mode: ImpactMode,
    pub seed: u64,
    /// Prediction overlay: impact type and threshold bits.
    pub prediction: Option<(ImpactType, u64)>,
}

type Slot = Arc<OnceLock<Result<Arc<LandscapeLayout>, ApiError>>>;

/// Bounded LRU of landscapes. Concurrent requests for the same key share
/// one computation.
pub struct LandscapeCache {
    slots: Mutex<LruCache<LandscapeKey, Slot>>,
}

impl LandscapeCache {
    pub fn new(capacity: usize) -> Self {
        LandscapeCache {
            slots: Mutex::new(LruCache::new(NonZeroUsize::new(capacity.max(1)).expect("positive"))),
        }
    }

    pub fn get_or_compute(
        &self,
        key: LandscapeKey,
        compute: impl FnOnce() -> Result<LandscapeLayout, ApiError>,
    ) -> Result<Arc<LandscapeLayout>, ApiError> {
        let slot = {
            let mut slots = self.slots.lock().unwrap_or_else(|e| e.into_inner());
            slots.get_or_insert(key, || Arc::new(OnceLock::new())).clone()
        };
        slot.get_or_init(|| compute().map(Arc::new)).clone()
    }

    pub fn len(&self) -> usize {
        self.slots.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything a request may read. Built once at startup and never mutated
/// apart from the landscape cache.
pub struct AppState {
    pub config: ServiceConfig,
    pub snapshot: Arc<CorpusSnapshot>,
    pub tables: ImpactTables,
    pub embeddings: EmbeddingTable,
    pub registry_loaded: bool,
    pub models: BTreeMap<ImpactType, Vec<LoadedModel>>,
    pub skipped_models: Vec<SkippedTopic>,
    pub stopwords: Stopwords,
    pub cache: LandscapeCache,
}

impl AppState {
    /// Loads the snapshot and, if configured, the registry's models.
    pub fn load(config: ServiceConfig) -> Result<Self, ServiceError> {
        let snapshot = CorpusSnapshot::load(&config.snapshot)?;
        let registry = config.registry.as_ref().map(ModelRegistry::open).transpose()?;
        Self::from_parts(config, snapshot.into_shared(), registry.as_ref())
    }

    pub fn from_parts(
        config: ServiceConfig,
        snapshot: Arc<CorpusSnapshot>,
        registry: Option<&ModelRegistry>,
    ) -> Result<Self, ServiceError> {
        config.validate()?;
        let tables = ImpactTables::compute(&snapshot, &config.metrics)?;
        let provider = HashingEmbedder::default();
        let embeddings = match registry {
            Some(r) => EmbeddingTable::load_or_compute(r.root(), &snapshot, &provider)?,
            None => EmbeddingTable::compute(&snapshot, &provider)?,
        };
        let mut models: BTreeMap<ImpactType, Vec<LoadedModel>> = BTreeMap::new();
        let mut skipped_models = Vec::new();
        if let Some(r) = registry {
            for impact in ImpactType::ALL {
                let (loaded, skipped) = load_models(r, impact, None, &BoostedStumps::default())?;
                skipped_models.extend(skipped);
                for m in loaded {
                    if m.record.metadata.embedding_provider != provider.name() {
                        log::warn!(
                            "model {} / {} needs embeddings from {}, skipping",
                            impact,
                            m.record.topic,
                            m.record.metadata.embedding_provider
                        );
                        skipped_models.push(SkippedTopic {
                            topic: m.record.topic.clone(),
                            reason: format!("embedding provider {} unavailable", m.record.metadata.embedding_provider),
                        });
                        continue;
                    }
                    models.entry(impact).or_default().push(m);
                }
            }
            log::info!("loaded {} models", models.values().map(Vec::len).sum::<usize>());
        }
        let cache = LandscapeCache::new(config.cache_capacity);
        Ok(AppState {
            config,
            snapshot,
            tables,
            embeddings,
            registry_loaded: registry.is_some(),
            models,
            skipped_models,
            stopwords: Stopwords::default(),
            cache,
        })
    }

    pub fn model_count(&self) -> usize {
        self.models.values().map(Vec::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;

    fn key(field: &str) -> LandscapeKey {
        LandscapeKey {
            snapshot_id: "s".into(),
            field: field.into(),
            mode: ImpactMode::Direct,
            seed: 0,
            prediction: None,
        }
    }

    #[test]
    fn concurrent_requests_compute_once() {
        let cache = Arc::new(LandscapeCache::new(4));
        let calls = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (cache, calls) = (cache.clone(), calls.clone());
                std::thread::spawn(move || {
                    cache
                        .get_or_compute(key("A"), || {
                            calls.fetch_add(1, Ordering::SeqCst);
                            std::thread::sleep(std::time::Duration::from_millis(20));
                            Err(ApiError::NotFound("A".into()))
                        })
                        .unwrap_err()
                })
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), ApiError::NotFound("A".into()));
        }
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn capacity_bounds_entries() {
        let cache = LandscapeCache::new(2);
        for f in ["A", "B", "C"] {
            let _ = cache.get_or_compute(key(f), || Err(ApiError::NotFound(f.into())));
        }
        assert_eq!(cache.len(), 2);
    }
}
