//! Generate a synthetic corpus, export it as NDJSON and ingest it back.
//!
//! ```bash
//! cargo run -p fundscape --example synth_and_ingest
//! ```

use fundscape::store::{
    export_corpus, generate_synthetic_corpus, ingest_dir, GrantFilter, PlantedStructure, SynthSizes, YearWindow,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let snapshot = generate_synthetic_corpus(7, &SynthSizes::scaled(200), &PlantedStructure::default())?;
    let dir = tempfile::tempdir()?;
    export_corpus(&snapshot, dir.path())?;

    let (ingested, report) = ingest_dir(dir.path(), YearWindow::new(2000, 2021))?;
    println!(
        "ingested {} grants, {} papers, {} documents, {} links ({} warnings)",
        report.grants,
        report.papers,
        report.docs,
        report.links,
        report.warning_count()
    );
    println!("snapshot id {} (generated {})", ingested.id(), snapshot.id());

    let filter = GrantFilter {
        field: Some("Biomedical".into()),
        year_min: Some(2015),
        ..GrantFilter::default()
    };
    let grants = ingested.query_grants(&filter)?;
    println!("{} Biomedical grants started in 2015 or later", grants.len());
    for g in grants.iter().take(3) {
        println!("  {} {} ({})", g.grant_id, g.title, g.field_path);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("synth_and_ingest failed");
}
