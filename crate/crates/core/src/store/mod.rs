//! Heterogeneous corpus of grants, papers, impact documents, researchers
//! and the typed citation links between them.
//!
//! A [`CorpusSnapshot`] is immutable once built. It is produced by
//! [`ingest_corpus`] from NDJSON files, by [`generate_synthetic_corpus`], or
//! by loading a previously saved snapshot file. Every constructor checks
//! referential closure: each link endpoint resolves to an entity of the kind
//! its link type names.

mod export;
mod ingest;
mod model;
mod query;
mod synth;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use export::{export_corpus, write_ndjson};
pub use ingest::{ingest_corpus, ingest_dir, IngestReport};
pub use model::{
    CitationLink, DocType, EntityKind, Gender, GrantRecord, ImpactDocRecord, LinkType,
    PaperRecord, ResearcherRecord, TopicPath, YearWindow,
};
pub use query::{linked_documents, GrantFilter, ImpactMode, OutcomeCitation, OutcomeKind};
pub use synth::{generate_synthetic_corpus, taxonomy_leaves, MarkerRule, PlantedField, PlantedStructure, SynthSizes};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: malformed record at `{field}`: {message}")]
    Malformed {
        file: String,
        line: usize,
        field: String,
        message: String,
    },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unrecognized corpus file `{0}`")]
    UnknownFile(String),
    #[error("empty year window {0}:{1}")]
    EmptyWindow(i32, i32),
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("{kind} outcomes are not defined in {mode} mode")]
    UnsupportedCombination { kind: OutcomeKind, mode: ImpactMode },
    #[error("snapshot is not referentially closed: {0}")]
    NotClosed(String),
    #[error("invalid synthetic corpus config: {0}")]
    Config(String),
    #[error("snapshot encoding: {0}")]
    Encoding(#[from] serde_json::Error),
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

/// Serialized content of a snapshot. Collections are kept sorted by id
/// (links by type, source, target) so equal corpora encode identically.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SnapshotData {
    pub window: YearWindow,
    pub grants: Vec<GrantRecord>,
    pub papers: Vec<PaperRecord>,
    pub docs: Vec<ImpactDocRecord>,
    pub researchers: Vec<ResearcherRecord>,
    pub links: Vec<CitationLink>,
}

impl SnapshotData {
    fn canonicalize(&mut self) {
        self.grants.sort_by(|a, b| a.grant_id.cmp(&b.grant_id));
        self.papers.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
        self.docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        self.researchers
            .sort_by(|a, b| a.researcher_id.cmp(&b.researcher_id));
        self.links.sort_by(|a, b| {
            (a.link_type, &a.source_id, &a.target_id).cmp(&(b.link_type, &b.source_id, &b.target_id))
        });
        self.links.dedup();
    }
}

#[derive(Debug, Default)]
struct Adjacency {
    forward: Vec<Vec<usize>>,
    backward: Vec<Vec<usize>>,
}

#[derive(Debug, Default)]
struct SnapshotIndex {
    grants: HashMap<String, usize>,
    papers: HashMap<String, usize>,
    docs: HashMap<String, usize>,
    researchers: HashMap<String, usize>,
    adjacency: HashMap<LinkType, Adjacency>,
}

/// Immutable, indexed corpus. Cheap to share behind an [`Arc`].
#[derive(Debug)]
pub struct CorpusSnapshot {
    data: SnapshotData,
    index: SnapshotIndex,
    id: String,
}

impl PartialEq for CorpusSnapshot {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}

impl CorpusSnapshot {
    /// Builds and indexes a snapshot, rejecting duplicate ids and dangling
    /// link endpoints.
    pub fn from_data(mut data: SnapshotData) -> Result<Self> {
        if data.window.is_empty() {
            return Err(StoreError::EmptyWindow(data.window.min, data.window.max));
        }
        data.canonicalize();
        let index = build_index(&data)?;
        let id = content_id(&data)?;
        Ok(CorpusSnapshot { data, index, id })
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn data(&self) -> &SnapshotData {
        &self.data
    }

    /// Content hash; equal corpora have equal ids.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn window(&self) -> YearWindow {
        self.data.window
    }

    pub fn grants(&self) -> &[GrantRecord] {
        &self.data.grants
    }

    pub fn papers(&self) -> &[PaperRecord] {
        &self.data.papers
    }

    pub fn docs(&self) -> &[ImpactDocRecord] {
        &self.data.docs
    }

    pub fn docs_of(&self, doc_type: DocType) -> impl Iterator<Item = &ImpactDocRecord> {
        self.data.docs.iter().filter(move |d| d.doc_type == doc_type)
    }

    pub fn researchers(&self) -> &[ResearcherRecord] {
        &self.data.researchers
    }

    pub fn links(&self) -> &[CitationLink] {
        &self.data.links
    }

    pub fn grant_index(&self, id: &str) -> Option<usize> {
        self.index.grants.get(id).copied()
    }

    pub fn paper_index(&self, id: &str) -> Option<usize> {
        self.index.papers.get(id).copied()
    }

    pub fn doc_index(&self, id: &str) -> Option<usize> {
        self.index.docs.get(id).copied()
    }

    pub fn researcher_index(&self, id: &str) -> Option<usize> {
        self.index.researchers.get(id).copied()
    }

    pub fn grant(&self, id: &str) -> Option<&GrantRecord> {
        self.grant_index(id).map(|i| &self.data.grants[i])
    }

    pub fn paper(&self, id: &str) -> Option<&PaperRecord> {
        self.paper_index(id).map(|i| &self.data.papers[i])
    }

    pub fn doc(&self, id: &str) -> Option<&ImpactDocRecord> {
        self.doc_index(id).map(|i| &self.data.docs[i])
    }

    pub fn researcher(&self, id: &str) -> Option<&ResearcherRecord> {
        self.researcher_index(id).map(|i| &self.data.researchers[i])
    }

    /// Target indices of `link_type` links leaving the entity at `source`.
    pub fn forward(&self, link_type: LinkType, source: usize) -> &[usize] {
        self.index
            .adjacency
            .get(&link_type)
            .and_then(|a| a.forward.get(source))
            .map_or(&[], Vec::as_slice)
    }

    /// Source indices of `link_type` links arriving at the entity at `target`.
    pub fn backward(&self, link_type: LinkType, target: usize) -> &[usize] {
        self.index
            .adjacency
            .get(&link_type)
            .and_then(|a| a.backward.get(target))
            .map_or(&[], Vec::as_slice)
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(&self.data)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_json_bytes()?;
        fs::write(path, bytes).map_err(|source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let data: SnapshotData = serde_json::from_slice(&bytes)?;
        CorpusSnapshot::from_data(data)
    }
}

fn content_id(data: &SnapshotData) -> Result<String> {
    let bytes = serde_json::to_vec(data)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

fn index_ids<'a>(
    kind: &'static str,
    ids: impl Iterator<Item = &'a str>,
) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if map.insert(id.to_string(), i).is_some() {
            return Err(StoreError::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(map)
}

fn build_index(data: &SnapshotData) -> Result<SnapshotIndex> {
    let mut index = SnapshotIndex {
        grants: index_ids("grant", data.grants.iter().map(|g| g.grant_id.as_str()))?,
        papers: index_ids("paper", data.papers.iter().map(|p| p.paper_id.as_str()))?,
        docs: index_ids("impact document", data.docs.iter().map(|d| d.doc_id.as_str()))?,
        researchers: index_ids(
            "researcher",
            data.researchers.iter().map(|r| r.researcher_id.as_str()),
        )?,
        adjacency: HashMap::new(),
    };
    let lens = |kind: EntityKind| match kind {
        EntityKind::Grant => data.grants.len(),
        EntityKind::Paper => data.papers.len(),
        EntityKind::Doc(_) => data.docs.len(),
        EntityKind::Researcher => data.researchers.len(),
    };
    for link_type in LinkType::ALL {
        let (src, dst) = link_type.endpoints();
        index.adjacency.insert(
            link_type,
            Adjacency {
                forward: vec![Vec::new(); lens(src)],
                backward: vec![Vec::new(); lens(dst)],
            },
        );
    }
    for link in &data.links {
        let (src_kind, dst_kind) = link.link_type.endpoints();
        let s = resolve(&index, data, src_kind, &link.source_id);
        let t = resolve(&index, data, dst_kind, &link.target_id);
        let (Some(s), Some(t)) = (s, t) else {
            return Err(StoreError::NotClosed(format!(
                "{} link {} -> {}",
                link.link_type, link.source_id, link.target_id
            )));
        };
        let adj = index.adjacency.get_mut(&link.link_type).expect("all types");
        adj.forward[s].push(t);
        adj.backward[t].push(s);
    }
    for adj in index.adjacency.values_mut() {
        adj.forward.iter_mut().for_each(|v| v.sort_unstable());
        adj.backward.iter_mut().for_each(|v| v.sort_unstable());
    }
    Ok(index)
}

fn resolve(index: &SnapshotIndex, data: &SnapshotData, kind: EntityKind, id: &str) -> Option<usize> {
    match kind {
        EntityKind::Grant => index.grants.get(id).copied(),
        EntityKind::Paper => index.papers.get(id).copied(),
        EntityKind::Researcher => index.researchers.get(id).copied(),
        EntityKind::Doc(t) => index
            .docs
            .get(id)
            .copied()
            .filter(|&i| data.docs[i].doc_type == t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn grant(id: &str) -> GrantRecord {
        GrantRecord {
            grant_id: id.into(),
            title: "t".into(),
            abstract_text: "a".into(),
            funding_amount: 1.0,
            funder_org: "F".into(),
            research_orgs: vec![],
            grant_start_date: NaiveDate::from_ymd_opt(2005, 1, 1).unwrap(),
            grant_end_date: NaiveDate::from_ymd_opt(2006, 1, 1).unwrap(),
            investigator_ids: vec![],
            field_path: TopicPath::parse("A"),
        }
    }

    #[test]
    fn rejects_duplicate_ids() {
        let data = SnapshotData {
            grants: vec![grant("g1"), grant("g1")],
            ..Default::default()
        };
        assert!(matches!(
            CorpusSnapshot::from_data(data),
            Err(StoreError::DuplicateId { kind: "grant", .. })
        ));
    }

    #[test]
    fn rejects_dangling_links() {
        let data = SnapshotData {
            grants: vec![grant("g1")],
            links: vec![CitationLink {
                source_id: "g1".into(),
                target_id: "p9".into(),
                link_type: LinkType::GrantPaper,
            }],
            ..Default::default()
        };
        assert!(matches!(
            CorpusSnapshot::from_data(data),
            Err(StoreError::NotClosed(_))
        ));
    }

    #[test]
    fn id_depends_only_on_content_not_order() {
        let a = SnapshotData {
            grants: vec![grant("g1"), grant("g2")],
            ..Default::default()
        };
        let b = SnapshotData {
            grants: vec![grant("g2"), grant("g1")],
            ..Default::default()
        };
        let a = CorpusSnapshot::from_data(a).unwrap();
        let b = CorpusSnapshot::from_data(b).unwrap();
        assert_eq!(a.id(), b.id());
        assert_eq!(a, b);
    }

    #[test]
    fn topic_path_prefix() {
        let p = TopicPath::parse("A/B/C");
        assert!(p.starts_with(&TopicPath::parse("A/B")));
        assert!(!p.starts_with(&TopicPath::parse("A/C")));
        assert_eq!(p.truncate(2).to_string(), "A/B");
        assert_eq!(p.truncate(5), p);
    }
}
