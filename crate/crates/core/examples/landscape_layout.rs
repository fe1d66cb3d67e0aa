//! Impact landscape of one field: force-directed grant topics, bubble
//! treemap clusters, bundled edges and ripple glyphs.
//!
//! ```bash
//! cargo run -p fundscape --example landscape_layout
//! ```

use fundscape::layout::{build_landscape, LandscapeConfig, NodeKind};
use fundscape::metrics::{ImpactTables, MetricsConfig};
use fundscape::store::{generate_synthetic_corpus, ImpactMode, PlantedStructure, SynthSizes};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let snapshot = generate_synthetic_corpus(9, &SynthSizes::scaled(300), &PlantedStructure::default())?;
    let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default())?;
    for mode in [ImpactMode::Direct, ImpactMode::Broad] {
        let layout = build_landscape(&snapshot, &tables, "Engineering", mode, &LandscapeConfig::default(), 1, None)?;
        println!(
            "{mode}: {} grant topics, {} clusters, {} edges; {} ticks, overlap residual {:.3}",
            layout.nodes.iter().filter(|n| n.kind == NodeKind::GrantTopic).count(),
            layout.clusters.len(),
            layout.edges.len(),
            layout.simulation.ticks,
            layout.simulation.overlap_residual
        );
        for node in layout.nodes.iter().filter(|n| n.kind == NodeKind::GrantTopic) {
            println!("  {:<28} ({:7.1}, {:7.1}) r {:5.1}", node.id, node.x, node.y, node.r);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("landscape_layout failed");
}
