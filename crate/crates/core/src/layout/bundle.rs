use serde::{Deserialize, Serialize};

use super::forces::Vec2;
use crate::store::OutcomeKind;

/// Link between a grant topic node and an impact node, routed through the
/// anchor of its impact type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundledEdge {
    pub grant_topic: String,
    pub impact_node: String,
    pub impact_kind: OutcomeKind,
    pub count: u64,
    /// Quadratic curve: start, shared waypoint, end.
    pub control_points: [[f64; 2]; 3],
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRequest<'a> {
    pub grant_topic: &'a str,
    pub from: Vec2,
    pub impact_node: &'a str,
    pub to: Vec2,
    pub impact_kind: OutcomeKind,
    pub count: u64,
}

/// Routes each link through `waypoint(kind)`; width grows with the
/// square root of the link count.
pub fn bundle_edges<'a>(
    links: impl IntoIterator<Item = EdgeRequest<'a>>,
    waypoint: impl Fn(OutcomeKind) -> Option<Vec2>,
    width_scale: f64,
) -> Vec<BundledEdge> {
    links
        .into_iter()
        .map(|l| {
            let mid = waypoint(l.impact_kind).unwrap_or((l.from + l.to) / 2.0);
            BundledEdge {
                grant_topic: l.grant_topic.to_string(),
                impact_node: l.impact_node.to_string(),
                impact_kind: l.impact_kind,
                count: l.count,
                control_points: [[l.from.x, l.from.y], [mid.x, mid.y], [l.to.x, l.to.y]],
                width: width_scale * (l.count as f64).sqrt(),
            }
        })
        .collect()
}
