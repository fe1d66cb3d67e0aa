use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{io_err, PredictorError, Result};
use crate::embed::EmbeddingProvider;
use crate::store::CorpusSnapshot;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Header {
    provider: String,
    snapshot_id: String,
    dim: usize,
    count: usize,
}

/// Abstract embeddings of every grant in a snapshot, in grant order.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub provider: String,
    pub snapshot_id: String,
    pub dim: usize,
    pub vectors: Vec<Vec<f32>>,
}

impl EmbeddingTable {
    pub fn compute(snapshot: &CorpusSnapshot, provider: &dyn EmbeddingProvider) -> Result<Self> {
        let vectors = snapshot
            .grants()
            .par_iter()
            .map(|g| provider.embed(&g.abstract_text))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EmbeddingTable {
            provider: provider.name(),
            snapshot_id: snapshot.id().to_string(),
            dim: provider.dim(),
            vectors,
        })
    }

    pub fn get(&self, grant: usize) -> &[f32] {
        &self.vectors[grant]
    }

    /// Cache file for a (provider, snapshot) pair inside `dir`.
    pub fn cache_path(dir: &Path, provider: &str, snapshot_id: &str) -> PathBuf {
        let clean: String = provider
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
            .collect();
        let id: String = snapshot_id.chars().take(16).collect();
        dir.join(format!("embeddings-{clean}-{id}.bin"))
    }

    /// A JSON header line followed by little-endian `f32` rows.
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let tmp = path.with_extension("tmp");
        let file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        let mut w = BufWriter::new(file);
        let header = Header {
            provider: self.provider.clone(),
            snapshot_id: self.snapshot_id.clone(),
            dim: self.dim,
            count: self.vectors.len(),
        };
        let mut line = serde_json::to_vec(&header).expect("header serializes");
        line.push(b'\n');
        w.write_all(&line).map_err(io_err(&tmp))?;
        for v in &self.vectors {
            for x in v {
                w.write_all(&x.to_le_bytes()).map_err(io_err(&tmp))?;
            }
        }
        w.flush().map_err(io_err(&tmp))?;
        drop(w);
        fs::rename(&tmp, path).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(io_err(path))?;
        let mut r = BufReader::new(file);
        let mut line = String::new();
        r.read_line(&mut line).map_err(io_err(path))?;
        let header: Header = serde_json::from_str(&line)
            .map_err(|e| PredictorError::Registry(format!("bad embedding header in {}: {e}", path.display())))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(io_err(path))?;
        if bytes.len() != header.count * header.dim * 4 {
            return Err(PredictorError::Registry(format!("truncated embedding cache {}", path.display())));
        }
        let floats: Vec<f32> = bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        Ok(EmbeddingTable {
            provider: header.provider,
            snapshot_id: header.snapshot_id,
            dim: header.dim,
            vectors: floats.chunks(header.dim.max(1)).take(header.count).map(<[f32]>::to_vec).collect(),
        })
    }

    /// Loads the cached table for this snapshot and provider, computing and
    /// storing it on a miss.
    pub fn load_or_compute(dir: &Path, snapshot: &CorpusSnapshot, provider: &dyn EmbeddingProvider) -> Result<Self> {
        let path = Self::cache_path(dir, &provider.name(), snapshot.id());
        if path.exists() {
            let table = Self::load(&path)?;
            if table.snapshot_id == snapshot.id() && table.provider == provider.name() && table.vectors.len() == snapshot.grants().len() {
                return Ok(table);
            }
            log::warn!("stale embedding cache {}, recomputing", path.display());
        }
        let table = Self::compute(snapshot, provider)?;
        table.save(&path)?;
        Ok(table)
    }
}
