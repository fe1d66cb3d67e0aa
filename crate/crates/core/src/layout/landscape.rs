use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::anchors::{entity_level_layout, AnchorLayout};
use super::bundle::{bundle_edges, BundledEdge, EdgeRequest};
use super::forces::Vec2;
use super::glyph::{ripple_glyph, GlyphConfig, GlyphMode, RippleGlyphSpec};
use super::sim::{phyllotaxis, ForceParams, LayoutNode, NodeKind, Simulation, SimulationReport};
use super::treemap::{bubble_treemap_pack, PackNode, PackedCircle, TreemapConfig};
use super::{LayoutError, Result};
use crate::atlas::{
    aggregate_docs_by_topic, aggregate_grants_by_topic, aggregate_papers_by_topic, TopicNodeKind, TopicNodeSummary,
    UNCLASSIFIED,
};
use crate::metrics::{ImpactTables, ImpactType, RiiRow};
use crate::store::{linked_documents, CorpusSnapshot, ImpactMode, OutcomeKind, TopicPath};

/// Landscape geometry settings. Sizes are fractions of `force.d_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeConfig {
    pub force: ForceParams,
    /// Grant topic depth; defaults to one level below the selected field.
    pub grant_level: Option<usize>,
    /// Topic depth of impact nodes.
    pub impact_level: usize,
    /// Share of the containment disc covered by grant topic nodes.
    pub node_fill: f64,
    /// Largest grant topic node radius.
    pub max_node_radius: f64,
    /// Largest impact cluster radius.
    pub max_cluster_radius: f64,
    /// Smallest distance between two impact anchors.
    pub min_anchor_separation: f64,
    pub treemap: TreemapConfig,
    pub glyph: GlyphConfig,
    pub edge_width_scale: f64,
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        LandscapeConfig {
            force: ForceParams::default(),
            grant_level: None,
            impact_level: 2,
            node_fill: 0.15,
            max_node_radius: 0.2,
            max_cluster_radius: 0.3,
            min_anchor_separation: 0.5,
            treemap: TreemapConfig::default(),
            glyph: GlyphConfig::default(),
            edge_width_scale: 0.75,
        }
    }
}

/// Predicted scores per grant id; grants scoring above `threshold` count
/// toward a topic's prediction ring.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictionOverlay {
    pub threshold: f64,
    pub scores: HashMap<String, f64>,
}

impl PredictionOverlay {
    fn high_scores<'a>(&self, grant_ids: impl IntoIterator<Item = &'a String>) -> i64 {
        grant_ids
            .into_iter()
            .filter(|g| self.scores.get(*g).is_some_and(|&s| s > self.threshold))
            .count() as i64
    }
}

/// One drawable circle of the landscape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeNode {
    pub id: String,
    pub kind: NodeKind,
    /// Outcome kind of impact nodes and anchors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<OutcomeKind>,
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub count: u64,
}

/// Ripple glyph of one grant topic node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeGlyph {
    pub node_id: String,
    #[serde(flatten)]
    pub spec: RippleGlyphSpec,
}

/// Packed impact nodes of one outcome kind around its anchor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpactCluster {
    pub kind: OutcomeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impact_type: Option<ImpactType>,
    pub anchor: [f64; 2],
    pub circles: Vec<PackedCircle>,
}

/// Complete landscape of one field, centered on the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeLayout {
    pub field: String,
    pub mode: ImpactMode,
    pub glyph_mode: GlyphMode,
    pub seed: u64,
    pub d_max: f64,
    /// Radius of a disc holding every drawn circle.
    pub canvas_radius: f64,
    pub nodes: Vec<LandscapeNode>,
    pub topics: Vec<TopicNodeSummary>,
    pub clusters: Vec<ImpactCluster>,
    pub edges: Vec<BundledEdge>,
    pub glyphs: Vec<NodeGlyph>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchors: Option<AnchorLayout>,
    pub simulation: SimulationReport,
}

impl LandscapeLayout {
    pub fn node(&self, id: &str) -> Option<&LandscapeNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn glyph(&self, node_id: &str) -> Option<&RippleGlyphSpec> {
        self.glyphs.iter().find(|g| g.node_id == node_id).map(|g| &g.spec)
    }
}

/// Impact-side view of one outcome kind: topic nodes and, per grant topic,
/// the number of citation chains into each node.
struct KindLinks {
    kind: OutcomeKind,
    nodes: Vec<TopicNodeSummary>,
    links: BTreeMap<(usize, String), u64>,
}

fn impact_links(
    snapshot: &CorpusSnapshot,
    grant_topics: &[TopicNodeSummary],
    kind: OutcomeKind,
    mode: ImpactMode,
    dedup: bool,
    level: usize,
) -> Result<KindLinks> {
    let unclassified = TopicPath::parse(UNCLASSIFIED);
    let mut members = BTreeSet::new();
    let mut links: BTreeMap<(usize, String), u64> = BTreeMap::new();
    for (ti, topic) in grant_topics.iter().enumerate() {
        let ids: Vec<&str> = topic.member_ids.iter().map(String::as_str).collect();
        for c in linked_documents(snapshot, &ids, kind, mode, dedup)? {
            let (index, path) = match kind {
                OutcomeKind::Paper => {
                    let p = snapshot.paper_index(c.doc_id).expect("linked paper exists");
                    (p, &snapshot.papers()[p].field_path)
                }
                _ => {
                    let d = snapshot.doc_index(c.doc_id).expect("linked document exists");
                    let path = snapshot.docs()[d].topic_path.as_ref().filter(|t| !t.is_empty());
                    (d, path.unwrap_or(&unclassified))
                }
            };
            members.insert(index);
            let node = TopicNodeSummary::node_id(TopicNodeKind::from(kind), &path.truncate(level));
            *links.entry((ti, node)).or_default() += 1;
        }
    }
    let members: Vec<usize> = members.into_iter().collect();
    let nodes = match kind {
        OutcomeKind::Paper => aggregate_papers_by_topic(snapshot, &members, level)?,
        _ => aggregate_docs_by_topic(snapshot, &members, level)?,
    };
    Ok(KindLinks { kind, nodes, links })
}

/// Two-level hierarchy of a kind's impact nodes: top-level topic groups
/// holding the nodes.
fn cluster_hierarchy(kind: OutcomeKind, nodes: &[TopicNodeSummary]) -> PackNode {
    let mut groups: BTreeMap<TopicPath, Vec<PackNode>> = BTreeMap::new();
    for n in nodes {
        groups.entry(n.topic_path.truncate(1)).or_default().push(PackNode::Leaf {
            id: n.id.clone(),
            count: n.count,
        });
    }
    let children = groups
        .into_iter()
        .map(|(top, mut leaves)| {
            if leaves.len() == 1 && nodes.iter().any(|n| n.id == leaves[0].id() && n.topic_path == top) {
                leaves.pop().expect("one leaf")
            } else {
                PackNode::Group {
                    id: format!("cluster:{kind}:{top}"),
                    children: leaves,
                }
            }
        })
        .collect();
    PackNode::Group {
        id: format!("cluster:{kind}"),
        children,
    }
}

/// Packs a cluster, shrinking leaves until it fits within `max_radius`.
fn pack_within(root: &PackNode, config: &TreemapConfig, max_radius: f64) -> Vec<PackedCircle> {
    let mut cfg = *config;
    let mut circles = bubble_treemap_pack(root, Vec2::zeros(), &cfg);
    for _ in 0..8 {
        let r = circles[0].r;
        if r <= max_radius {
            break;
        }
        cfg.leaf_scale *= 0.95 * max_radius / r;
        cfg.padding = cfg.padding.min(cfg.leaf_scale);
        circles = bubble_treemap_pack(root, Vec2::zeros(), &cfg);
    }
    circles
}

/// Starting point that already leans toward over-represented impact types:
/// a blend of the anchors weighted by RII excess, damped toward the center
/// by the total deviation. The simulation then only fine-tunes.
fn initial_position(center: Vec2, anchors: &[Vec2], rii: &[Option<f64>]) -> Vec2 {
    let mut pull = Vec2::zeros();
    let mut deviation = 1.0;
    for (a, r) in anchors.iter().zip(rii) {
        if let Some(r) = r {
            pull += (a - center) * (r - 1.0).max(0.0);
            deviation += (r - 1.0).abs();
        }
    }
    center + pull * (0.6 / deviation)
}

/// Lays out the impact landscape of the grants under `field` (a topic
/// path; empty selects every grant).
pub fn build_landscape(
    snapshot: &CorpusSnapshot,
    tables: &ImpactTables,
    field: &str,
    mode: ImpactMode,
    config: &LandscapeConfig,
    seed: u64,
    overlay: Option<&PredictionOverlay>,
) -> Result<LandscapeLayout> {
    config.force.validate()?;
    let d_max = config.force.d_max;
    let center = Vec2::zeros();
    let field_path = TopicPath::parse(field);
    let grants: Vec<usize> = snapshot
        .grants()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.field_path.starts_with(&field_path))
        .map(|(i, _)| i)
        .collect();
    if grants.is_empty() {
        return Err(LayoutError::UnknownField(field.to_string()));
    }
    let grant_level = config.grant_level.unwrap_or(field_path.depth() + 1);
    let grant_topics = aggregate_grants_by_topic(snapshot, Some(tables), &grants, grant_level)?;

    let mut kinds = Vec::new();
    for &kind in mode.outcome_kinds() {
        let k = impact_links(snapshot, &grant_topics, kind, mode, tables.config.dedup_broad, config.impact_level)?;
        if !k.nodes.is_empty() {
            kinds.push(k);
        }
    }

    let present: Vec<OutcomeKind> = kinds.iter().map(|k| k.kind).collect();
    let anchors = if present.is_empty() {
        None
    } else {
        Some(entity_level_layout(&present, center, d_max, config.min_anchor_separation * d_max, seed)?)
    };

    // Clusters sit just outside the containment disc, touching their anchor.
    let mut clusters = Vec::new();
    let mut canvas_radius = d_max;
    if let Some(layout) = &anchors {
        for k in &kinds {
            let anchor = layout.position(k.kind).expect("anchor for present kind");
            let mut circles = pack_within(&cluster_hierarchy(k.kind, &k.nodes), &config.treemap, config.max_cluster_radius * d_max);
            let outward = (anchor - center).try_normalize(0.0).unwrap_or(Vec2::new(0.0, -1.0));
            let shift = anchor + outward * circles[0].r;
            for c in &mut circles {
                c.x += shift.x;
                c.y += shift.y;
            }
            canvas_radius = canvas_radius.max((shift - center).norm() + circles[0].r);
            clusters.push(ImpactCluster {
                kind: k.kind,
                impact_type: ImpactType::for_cluster(mode, k.kind),
                anchor: [anchor.x, anchor.y],
                circles,
            });
        }
    }

    // Grant topic nodes: area proportional to grant count.
    let total: u64 = grant_topics.iter().map(|t| t.count).sum();
    let scale = d_max * (config.node_fill / total.max(1) as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = phyllotaxis(grant_topics.len(), Vec2::zeros(), 0.25 * d_max);
    let anchor_points: Vec<Vec2> = present
        .iter()
        .map(|&k| anchors.as_ref().and_then(|a| a.position(k)).expect("anchor for present kind"))
        .collect();
    let rii_of = |row: &RiiRow, kind: OutcomeKind| {
        ImpactType::for_cluster(mode, kind).and_then(|t| row.get(&t).copied().flatten())
    };
    let nodes: Vec<LayoutNode> = grant_topics
        .iter()
        .zip(&spread)
        .map(|(t, offset)| {
            let jitter = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let radius = (scale * (t.count as f64).sqrt()).min(config.max_node_radius * d_max);
            let row = t.rii.clone().unwrap_or_default();
            let rii: Vec<Option<f64>> = present.iter().map(|&k| rii_of(&row, k)).collect();
            let start = initial_position(center, &anchor_points, &rii) + offset + jitter;
            LayoutNode::mobile(t.id.clone(), start, radius, rii)
        })
        .collect();
    let mut sim = Simulation {
        nodes,
        anchors: anchor_points,
        center,
    };
    let report = sim.run(&config.force, seed)?;

    let glyph_mode = if overlay.is_some() { GlyphMode::Prediction } else { GlyphMode::Historical };
    let mut out_nodes = Vec::new();
    let mut glyphs = Vec::new();
    for (t, n) in grant_topics.iter().zip(&sim.nodes) {
        let high = overlay.map(|o| o.high_scores(&t.member_ids));
        let glyph = ripple_glyph(n.radius, t.rii.as_ref().unwrap_or(&RiiRow::new()), glyph_mode, high, &config.glyph)?;
        out_nodes.push(LandscapeNode {
            id: t.id.clone(),
            kind: NodeKind::GrantTopic,
            outcome: None,
            label: t.topic_path.to_string(),
            x: n.position.x,
            y: n.position.y,
            r: n.radius,
            count: t.count,
        });
        glyphs.push(NodeGlyph {
            node_id: t.id.clone(),
            spec: glyph,
        });
    }
    let mut leaf_pos: HashMap<&str, Vec2> = HashMap::new();
    for (k, cluster) in kinds.iter().zip(&clusters) {
        out_nodes.push(LandscapeNode {
            id: format!("anchor:{}", k.kind),
            kind: NodeKind::EntityAnchor,
            outcome: Some(k.kind),
            label: k.kind.to_string(),
            x: cluster.anchor[0],
            y: cluster.anchor[1],
            r: 0.0,
            count: k.nodes.iter().map(|n| n.count).sum(),
        });
        for c in cluster.circles.iter().filter(|c| c.leaf) {
            let summary = k.nodes.iter().find(|n| n.id == c.id).expect("leaf is an impact node");
            leaf_pos.insert(summary.id.as_str(), c.center());
            out_nodes.push(LandscapeNode {
                id: c.id.clone(),
                kind: NodeKind::ImpactNode,
                outcome: Some(k.kind),
                label: summary.topic_path.to_string(),
                x: c.x,
                y: c.y,
                r: c.r,
                count: c.count,
                });
        }
    }

    let requests: Vec<EdgeRequest> = kinds
        .iter()
        .flat_map(|k| {
            k.links.iter().map(|((ti, node), &count)| EdgeRequest {
                grant_topic: grant_topics[*ti].id.as_str(),
                from: sim.nodes[*ti].position,
                impact_node: node.as_str(),
                to: leaf_pos[node.as_str()],
                impact_kind: k.kind,
                count,
            })
        })
        .collect();
    let edges = bundle_edges(
        requests,
        |kind| anchors.as_ref().and_then(|a| a.position(kind)),
        config.edge_width_scale,
    );
    for n in &out_nodes {
        let extent = (Vec2::new(n.x, n.y) - center).norm() + n.r;
        canvas_radius = canvas_radius.max(extent);
    }

    let mut topics = grant_topics;
    topics.extend(kinds.into_iter().flat_map(|k| k.nodes));
    Ok(LandscapeLayout {
        field: field_path.to_string(),
        mode,
        glyph_mode,
        seed,
        d_max,
        canvas_radius,
        nodes: out_nodes,
        topics,
        clusters,
        edges,
        glyphs,
        anchors,
        simulation: report,
    })
}
