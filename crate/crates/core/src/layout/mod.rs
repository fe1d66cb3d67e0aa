//! Impact landscape geometry: entity anchors, bubble-treemap impact
//! clusters, force-directed grant topic nodes, bundled edges and ripple
//! glyphs.

mod anchors;
mod bundle;
mod forces;
mod glyph;
mod landscape;
mod sim;
mod treemap;

pub use anchors::{entity_level_layout, AnchorLayout, ImpactAnchor};
pub use bundle::{bundle_edges, BundledEdge, EdgeRequest};
pub use forces::{collision_force, containment_force, impact_force, Vec2};
pub use glyph::{ripple_glyph, Belt, GlyphConfig, GlyphMode, RippleGlyphSpec, SECTOR_ORDER};
pub use landscape::{
    build_landscape, ImpactCluster, LandscapeConfig, LandscapeLayout, LandscapeNode, NodeGlyph, PredictionOverlay,
};
pub use sim::{
    containment_residual, overlap_residual, phyllotaxis, ForceBreakdown, ForceParams, LayoutNode, NodeKind, Simulation,
    SimulationReport,
};
pub use treemap::{bubble_treemap_pack, enclose, pack_siblings, PackNode, PackedCircle, TreemapConfig};

#[derive(Debug, thiserror::Error)]
pub enum LayoutError {
    #[error("invalid layout parameters: {0}")]
    Params(String),
    #[error("node `{node}` reached a non-finite position at tick {tick}")]
    NonFinite { node: String, tick: usize },
    #[error("{anchors} anchors cannot be {min_separation} apart on a ring of radius {ring_radius}")]
    CanvasTooSmall {
        anchors: usize,
        ring_radius: f64,
        min_separation: f64,
    },
    #[error("invalid glyph input: {0}")]
    Glyph(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error(transparent)]
    Atlas(#[from] crate::atlas::AtlasError),
    #[error(transparent)]
    Store(#[from] crate::store::StoreError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
}

pub type Result<T, E = LayoutError> = std::result::Result<T, E>;
