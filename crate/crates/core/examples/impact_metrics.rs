//! Impact vectors, relative impact by field and investigator profiles.
//!
//! ```bash
//! cargo run -p fundscape --example impact_metrics
//! ```

use fundscape::metrics::{aggregate_impact, pi_profile, AggregationLevel, ImpactTables, ImpactType, MetricsConfig};
use fundscape::store::{generate_synthetic_corpus, PlantedField, PlantedStructure, SynthSizes, TopicPath};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let planted = PlantedStructure {
        fields: vec![PlantedField {
            field: TopicPath::parse("Physics/Optics"),
            patent_probability: 0.95,
        }],
        ..PlantedStructure::default()
    };
    let snapshot = generate_synthetic_corpus(3, &SynthSizes::scaled(400), &planted)?;
    let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default())?;
    println!(
        "{} hit papers, {} disruptive papers",
        tables.hit.iter().filter(|&&h| h).count(),
        tables.disruptive.iter().filter(|&&d| d).count()
    );

    println!("{:<28} {:>7} {:>14}", "field", "grants", "RII patents");
    for group in aggregate_impact(&snapshot, &tables, AggregationLevel::Field { depth: 2 })? {
        let rii = group.rii[&ImpactType::DirectPatent].map_or("n/a".into(), |r| format!("{r:.2}"));
        println!("{:<28} {:>7} {:>14}", group.group, group.grant_count, rii);
    }

    let researcher = &snapshot.researchers()[0].researcher_id;
    let profile = pi_profile(&snapshot, &tables, researcher, snapshot.window().max)?;
    println!(
        "{}: h-index {}, {} papers, {} grants, {} direct patents",
        profile.name, profile.h_index, profile.productivity, profile.grant_count, profile.impact.direct.patents
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("impact_metrics failed");
}
