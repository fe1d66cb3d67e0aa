use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::model::*;
use super::{CorpusSnapshot, Result, SnapshotData, StoreError};

/// Counts of what ingestion kept and what it dropped.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub grants: usize,
    pub papers: usize,
    pub docs: usize,
    pub researchers: usize,
    pub links: usize,
    /// Records outside the year window, keyed by entity file stem.
    pub dropped_out_of_window: BTreeMap<String, usize>,
    /// Links removed because an endpoint was dropped by the window.
    pub links_dropped_with_records: usize,
    /// Links whose endpoint does not exist (or has the wrong kind).
    pub dangling_links: usize,
    pub duplicate_links: usize,
    pub warnings: Vec<String>,
}

impl IngestReport {
    pub fn warning_count(&self) -> usize {
        self.dangling_links + self.duplicate_links
    }
}

const MAX_WARNINGS: usize = 50;

enum EntityFile {
    Grants,
    Papers,
    Docs(DocType),
    Researchers,
}

fn classify(path: &Path) -> Result<EntityFile> {
    let name = file_name(path);
    Ok(match name.as_str() {
        "grants.ndjson" => EntityFile::Grants,
        "papers.ndjson" => EntityFile::Papers,
        "researchers.ndjson" => EntityFile::Researchers,
        other => match DocType::ALL.into_iter().find(|t| t.file_name() == other) {
            Some(t) => EntityFile::Docs(t),
            None => return Err(StoreError::UnknownFile(name)),
        },
    })
}

fn link_type_of(path: &Path) -> Result<LinkType> {
    let name = file_name(path);
    LinkType::ALL
        .into_iter()
        .find(|t| t.file_name() == name)
        .ok_or(StoreError::UnknownFile(name))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn malformed(path: &Path, line: usize, field: impl Into<String>, message: impl Into<String>) -> StoreError {
    StoreError::Malformed {
        file: file_name(path),
        line,
        field: field.into(),
        message: message.into(),
    }
}

/// Reads one NDJSON file, reporting the line and field path of the first
/// record that fails to parse. Blank lines are skipped.
fn read_ndjson<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let de = &mut serde_json::Deserializer::from_str(&line);
        let record = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            malformed(path, i + 1, field, e.into_inner().to_string())
        })?;
        out.push((i + 1, record));
    }
    Ok(out)
}

#[derive(Deserialize)]
struct LinkRow {
    source_id: String,
    target_id: String,
}

fn validate_grant(path: &Path, line: usize, g: &GrantRecord) -> Result<()> {
    if g.grant_start_date > g.grant_end_date {
        return Err(malformed(path, line, "grant_end_date", "end date precedes start date"));
    }
    if !(g.funding_amount.is_finite() && g.funding_amount >= 0.0) {
        return Err(malformed(path, line, "funding_amount", "must be a non-negative number"));
    }
    if g.field_path.is_empty() {
        return Err(malformed(path, line, "field_path", "must be non-empty"));
    }
    Ok(())
}

fn validate_doc(path: &Path, line: usize, expected: DocType, d: &ImpactDocRecord) -> Result<()> {
    if d.doc_type != expected {
        return Err(malformed(
            path,
            line,
            "doc_type",
            format!("`{}` record in {} file", d.doc_type, expected),
        ));
    }
    for key in expected.required_attributes() {
        if d.attributes.get(*key).is_none_or(serde_json::Value::is_null) {
            return Err(malformed(path, line, format!("attributes.{key}"), "required attribute missing"));
        }
    }
    if d.topic_path.as_ref().is_some_and(TopicPath::is_empty) {
        return Err(malformed(path, line, "topic_path", "must be non-empty when present"));
    }
    Ok(())
}

/// Parses entity and link files into a window-filtered, referentially
/// closed snapshot.
///
/// Records outside `window` are dropped along with their links. Links with
/// unresolvable endpoints are dropped and counted as warnings. Duplicate
/// entity ids are a hard error.
pub fn ingest_corpus(
    entity_files: &[PathBuf],
    link_files: &[PathBuf],
    window: YearWindow,
) -> Result<(CorpusSnapshot, IngestReport)> {
    if window.is_empty() {
        return Err(StoreError::EmptyWindow(window.min, window.max));
    }
    let mut report = IngestReport::default();
    let mut data = SnapshotData {
        window,
        ..Default::default()
    };
    // ids removed by the window, per kind; their links are not "dangling"
    let mut dropped_grants = HashSet::new();
    let mut dropped_papers = HashSet::new();
    let mut dropped_docs = HashSet::new();

    for path in entity_files {
        let stem = file_name(path).trim_end_matches(".ndjson").to_string();
        let mut dropped = 0usize;
        match classify(path)? {
            EntityFile::Grants => {
                for (line, g) in read_ndjson::<GrantRecord>(path)? {
                    validate_grant(path, line, &g)?;
                    if window.contains(g.start_year()) {
                        data.grants.push(g);
                    } else {
                        dropped += 1;
                        dropped_grants.insert(g.grant_id);
                    }
                }
            }
            EntityFile::Papers => {
                for (line, p) in read_ndjson::<PaperRecord>(path)? {
                    if p.field_path.is_empty() {
                        return Err(malformed(path, line, "field_path", "must be non-empty"));
                    }
                    if window.contains(p.publication_year) {
                        data.papers.push(p);
                    } else {
                        dropped += 1;
                        dropped_papers.insert(p.paper_id);
                    }
                }
            }
            EntityFile::Docs(doc_type) => {
                for (line, d) in read_ndjson::<ImpactDocRecord>(path)? {
                    validate_doc(path, line, doc_type, &d)?;
                    if window.contains(d.year) {
                        data.docs.push(d);
                    } else {
                        dropped += 1;
                        dropped_docs.insert(d.doc_id);
                    }
                }
            }
            EntityFile::Researchers => {
                data.researchers
                    .extend(read_ndjson::<ResearcherRecord>(path)?.into_iter().map(|(_, r)| r));
            }
        }
        if dropped > 0 {
            *report.dropped_out_of_window.entry(stem).or_default() += dropped;
        }
    }

    check_unique("grant", data.grants.iter().map(|g| g.grant_id.as_str()))?;
    check_unique("paper", data.papers.iter().map(|p| p.paper_id.as_str()))?;
    check_unique("impact document", data.docs.iter().map(|d| d.doc_id.as_str()))?;
    check_unique("researcher", data.researchers.iter().map(|r| r.researcher_id.as_str()))?;

    let grants: HashSet<&str> = data.grants.iter().map(|g| g.grant_id.as_str()).collect();
    let papers: HashSet<&str> = data.papers.iter().map(|p| p.paper_id.as_str()).collect();
    let docs: std::collections::HashMap<&str, DocType> = data
        .docs
        .iter()
        .map(|d| (d.doc_id.as_str(), d.doc_type))
        .collect();
    let researchers: HashSet<&str> = data
        .researchers
        .iter()
        .map(|r| r.researcher_id.as_str())
        .collect();

    let exists = |kind: EntityKind, id: &str| match kind {
        EntityKind::Grant => grants.contains(id),
        EntityKind::Paper => papers.contains(id),
        EntityKind::Doc(t) => docs.get(id) == Some(&t),
        EntityKind::Researcher => researchers.contains(id),
    };
    let was_dropped = |kind: EntityKind, id: &str| match kind {
        EntityKind::Grant => dropped_grants.contains(id),
        EntityKind::Paper => dropped_papers.contains(id),
        EntityKind::Doc(_) => dropped_docs.contains(id),
        EntityKind::Researcher => false,
    };

    let mut seen = HashSet::new();
    let mut links = Vec::new();
    for path in link_files {
        let link_type = link_type_of(path)?;
        let (src_kind, dst_kind) = link_type.endpoints();
        for (line, row) in read_ndjson::<LinkRow>(path)? {
            if was_dropped(src_kind, &row.source_id) || was_dropped(dst_kind, &row.target_id) {
                report.links_dropped_with_records += 1;
                continue;
            }
            if !exists(src_kind, &row.source_id) || !exists(dst_kind, &row.target_id) {
                report.dangling_links += 1;
                if report.warnings.len() < MAX_WARNINGS {
                    report.warnings.push(format!(
                        "{}:{line}: dangling {link_type} link {} -> {}",
                        file_name(path),
                        row.source_id,
                        row.target_id
                    ));
                }
                continue;
            }
            let link = CitationLink {
                source_id: row.source_id,
                target_id: row.target_id,
                link_type,
            };
            if !seen.insert(link.clone()) {
                report.duplicate_links += 1;
                continue;
            }
            links.push(link);
        }
    }
    data.links = links;

    if report.dangling_links > 0 {
        log::warn!("dropped {} dangling links", report.dangling_links);
    }

    let snapshot = CorpusSnapshot::from_data(data)?;
    report.grants = snapshot.grants().len();
    report.papers = snapshot.papers().len();
    report.docs = snapshot.docs().len();
    report.researchers = snapshot.researchers().len();
    report.links = snapshot.links().len();
    Ok((snapshot, report))
}

fn check_unique<'a>(kind: &'static str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(StoreError::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

/// Ingests every recognized `*.ndjson` file in `dir`.
pub fn ingest_dir(dir: &Path, window: YearWindow) -> Result<(CorpusSnapshot, IngestReport)> {
    let entries = std::fs::read_dir(dir).map_err(|source| StoreError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut entity_files = Vec::new();
    let mut link_files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|source| StoreError::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        let name = file_name(&path);
        if !name.ends_with(".ndjson") {
            continue;
        }
        if name.starts_with("links_") {
            link_files.push(path);
        } else {
            entity_files.push(path);
        }
    }
    entity_files.sort();
    link_files.sort();
    ingest_corpus(&entity_files, &link_files, window)
}
