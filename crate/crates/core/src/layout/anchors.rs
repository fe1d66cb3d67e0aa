use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forces::Vec2;
use super::{LayoutError, Result};
use crate::store::OutcomeKind;

/// Entity-level layout: the grant anchor at the canvas center and one
/// anchor per impact type on the boundary ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorLayout {
    pub center: [f64; 2],
    pub ring_radius: f64,
    pub anchors: Vec<ImpactAnchor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpactAnchor {
    pub kind: OutcomeKind,
    pub position: [f64; 2],
    /// Clockwise angle from 12 o'clock, in radians.
    pub angle: f64,
}

impl AnchorLayout {
    pub fn position(&self, kind: OutcomeKind) -> Option<Vec2> {
        self.anchors
            .iter()
            .find(|a| a.kind == kind)
            .map(|a| Vec2::new(a.position[0], a.position[1]))
    }

    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.anchors.iter().enumerate() {
            for b in &self.anchors[i + 1..] {
                best = best.min((a.position[0] - b.position[0]).hypot(a.position[1] - b.position[1]));
            }
        }
        best
    }
}

fn wrap(t: f64) -> f64 {
    t.rem_euclid(TAU)
}

/// Places impact anchors on a ring of `ring_radius` around `center` by
/// angular repulsion from seeded starting angles. Fails when `kinds`
/// cannot be spaced `min_separation` apart on the ring.
pub fn entity_level_layout(
    kinds: &[OutcomeKind],
    center: Vec2,
    ring_radius: f64,
    min_separation: f64,
    seed: u64,
) -> Result<AnchorLayout> {
    let n = kinds.len();
    if n == 0 {
        return Err(LayoutError::Params("at least one impact type is required".into()));
    }
    let best_possible = if n == 1 { f64::INFINITY } else { 2.0 * ring_radius * (std::f64::consts::PI / n as f64).sin() };
    if ring_radius.is_nan() || ring_radius <= 0.0 || best_possible < min_separation {
        return Err(LayoutError::CanvasTooSmall {
            anchors: n,
            ring_radius,
            min_separation,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    // Angular repulsion between all anchor pairs; converges toward even spacing.
    for step in 0..500 {
        let mut push = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut diff = wrap(angles[i] - angles[j]);
                if diff > std::f64::consts::PI {
                    diff -= TAU;
                }
                let gap = diff.abs().max(1e-6);
                push[i] += diff.signum() / (gap * gap);
            }
        }
        let rate = 0.002 * (1.0 - step as f64 / 500.0) + 1e-4;
        for i in 0..n {
            angles[i] = wrap(angles[i] + rate * push[i].clamp(-50.0, 50.0));
        }
    }
    // Snap to exact even spacing, keeping the cyclic order and the mean
    // phase found by the repulsion.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    let step = TAU / n as f64;
    let phase = order
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let mut d = wrap(angles[i] - k as f64 * step);
            if d > std::f64::consts::PI {
                d -= TAU;
            }
            d
        })
        .sum::<f64>()
        / n as f64;
    let mut placed = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        placed[i] = wrap(phase + k as f64 * step);
    }
    let anchors = kinds
        .iter()
        .zip(placed)
        .map(|(&kind, angle)| ImpactAnchor {
            kind,
            position: [center.x + ring_radius * angle.sin(), center.y - ring_radius * angle.cos()],
            angle,
        })
        .collect();
    let layout = AnchorLayout {
        center: [center.x, center.y],
        ring_radius,
        anchors,
    };
    if n > 1 && layout.min_separation() + 1e-9 < min_separation {
        return Err(LayoutError::CanvasTooSmall {
            anchors: n,
            ring_radius,
            min_separation,
        });
    }
    Ok(layout)
}
