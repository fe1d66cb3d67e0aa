use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{io_err, PredictorError, Result};
use crate::metrics::ImpactType;
use crate::store::TopicPath;

pub const MANIFEST_FILE: &str = "manifest.json";
const MANIFEST_VERSION: u32 = 1;

/// Provenance of a trained topic model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub y: u32,
    pub cutoff_year: i32,
    pub positives: usize,
    pub negatives: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub available_positives: usize,
    pub available_negatives: usize,
    pub embedding_provider: String,
    pub snapshot_id: String,
}

/// Metadata of one published (impact type, topic) model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicModelRecord {
    pub impact: ImpactType,
    pub topic: TopicPath,
    /// Assigned on publication, counting from 1 per (impact, topic).
    pub version: u32,
    pub classifier: String,
    pub blob_sha256: String,
    /// Blob path relative to the registry root.
    pub blob_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_auc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_auc: Option<f64>,
    pub train_accuracy: f64,
    pub metadata: TrainingMetadata,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub impact: ImpactType,
    pub topic: TopicPath,
    pub version: u32,
    /// Record path relative to the registry root.
    pub record_file: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryManifest {
    pub format_version: u32,
    pub entries: Vec<ModelEntry>,
}

impl Default for RegistryManifest {
    fn default() -> Self {
        RegistryManifest {
            format_version: MANIFEST_VERSION,
            entries: Vec::new(),
        }
    }
}

impl RegistryManifest {
    /// Newest entry per (impact, topic), in (impact, topic) order.
    pub fn latest(&self) -> Vec<&ModelEntry> {
        let mut best: std::collections::BTreeMap<(ImpactType, &TopicPath), &ModelEntry> = Default::default();
        for e in &self.entries {
            let slot = best.entry((e.impact, &e.topic)).or_insert(e);
            if e.version > slot.version {
                *slot = e;
            }
        }
        best.into_values().collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn topic_slug(topic: &TopicPath) -> String {
    let text = topic.to_string();
    let readable: String = text
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .take(48)
        .collect();
    format!("{readable}-{}", &sha256_hex(text.as_bytes())[..8])
}

/// Writes through a temporary sibling and renames, so readers see either
/// the old file or the complete new one.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("file");
    let tmp = dir.join(format!(
        ".{name}.{}.{}.tmp",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Append-only model store: every publication adds a new version and the
/// manifest is swapped in last.
#[derive(Debug)]
pub struct ModelRegistry {
    root: PathBuf,
    lock: Mutex<()>,
}

impl ModelRegistry {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let registry = ModelRegistry {
            root,
            lock: Mutex::new(()),
        };
        if !registry.manifest_path().exists() {
            registry.write_manifest(&RegistryManifest::default())?;
        }
        Ok(registry)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST_FILE)
    }

    fn write_manifest(&self, manifest: &RegistryManifest) -> Result<()> {
        let bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
        write_atomic(&self.manifest_path(), &bytes)
    }

    pub fn manifest(&self) -> Result<RegistryManifest> {
        let path = self.manifest_path();
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let manifest: RegistryManifest = serde_json::from_slice(&bytes)
            .map_err(|e| PredictorError::Registry(format!("bad manifest {}: {e}", path.display())))?;
        if manifest.format_version != MANIFEST_VERSION {
            return Err(PredictorError::Registry(format!("unsupported manifest version {}", manifest.format_version)));
        }
        Ok(manifest)
    }

    /// Stores `blob` and `record` as the next version of the record's
    /// (impact, topic); the version and blob fields of `record` are filled
    /// in here.
    pub fn publish(&self, mut record: TopicModelRecord, blob: &[u8]) -> Result<TopicModelRecord> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut manifest = self.manifest()?;
        let version = manifest
            .entries
            .iter()
            .filter(|e| e.impact == record.impact && e.topic == record.topic)
            .map(|e| e.version)
            .max()
            .unwrap_or(0)
            + 1;
        let dir = format!("models/{}/{}", record.impact, topic_slug(&record.topic));
        record.version = version;
        record.blob_sha256 = sha256_hex(blob);
        record.blob_file = format!("{dir}/v{version:04}.model");
        let record_file = format!("{dir}/v{version:04}.json");
        write_atomic(&self.root.join(&record.blob_file), blob)?;
        let bytes = serde_json::to_vec_pretty(&record).expect("record serializes");
        write_atomic(&self.root.join(&record_file), &bytes)?;
        manifest.entries.push(ModelEntry {
            impact: record.impact,
            topic: record.topic.clone(),
            version,
            record_file,
        });
        self.write_manifest(&manifest)?;
        Ok(record)
    }

    pub fn record(&self, entry: &ModelEntry) -> Result<TopicModelRecord> {
        let path = self.root.join(&entry.record_file);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        serde_json::from_slice(&bytes).map_err(|e| PredictorError::Registry(format!("bad record {}: {e}", path.display())))
    }

    /// The model blob of `record`, verified against its hash.
    pub fn blob(&self, record: &TopicModelRecord) -> Result<Vec<u8>> {
        let path = self.root.join(&record.blob_file);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let actual = sha256_hex(&bytes);
        if actual != record.blob_sha256 {
            return Err(PredictorError::Registry(format!(
                "{} hash {actual} does not match record {}",
                path.display(),
                record.blob_sha256
            )));
        }
        Ok(bytes)
    }

    /// Newest record of every topic for `impact`.
    pub fn latest_records(&self, impact: ImpactType) -> Result<Vec<TopicModelRecord>> {
        let manifest = self.manifest()?;
        manifest
            .latest()
            .into_iter()
            .filter(|e| e.impact == impact)
            .map(|e| self.record(e))
            .collect()
    }

    pub fn latest_record(&self, impact: ImpactType, topic: &TopicPath) -> Result<Option<TopicModelRecord>> {
        let manifest = self.manifest()?;
        let entry = manifest.latest().into_iter().find(|e| e.impact == impact && &e.topic == topic).cloned();
        entry.map(|e| self.record(&e)).transpose()
    }
}
