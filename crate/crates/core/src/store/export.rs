use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::model::{DocType, LinkType};
use super::{CorpusSnapshot, Result, StoreError};

/// Writes `records` as one JSON document per line.
pub fn write_ndjson<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let io_err = |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for record in records {
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

#[derive(Serialize)]
struct LinkRow<'a> {
    source_id: &'a str,
    target_id: &'a str,
}

/// Writes the snapshot as the NDJSON exchange format: one file per entity
/// type and one `links_<type>.ndjson` per link type.
pub fn export_corpus(snapshot: &CorpusSnapshot, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| StoreError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write_ndjson(&dir.join("grants.ndjson"), snapshot.grants())?;
    write_ndjson(&dir.join("papers.ndjson"), snapshot.papers())?;
    write_ndjson(&dir.join("researchers.ndjson"), snapshot.researchers())?;
    for doc_type in DocType::ALL {
        write_ndjson(&dir.join(doc_type.file_name()), snapshot.docs_of(doc_type))?;
    }
    for link_type in LinkType::ALL {
        let rows = snapshot
            .links()
            .iter()
            .filter(|l| l.link_type == link_type)
            .map(|l| LinkRow {
                source_id: &l.source_id,
                target_id: &l.target_id,
            });
        write_ndjson(&dir.join(link_type.file_name()), rows)?;
    }
    Ok(())
}
