//! Seeded layout scenarios and geometric audits.

use std::f64::consts::TAU;

use fundscape::layout::{ForceParams, LayoutNode, PackNode, PackedCircle, Simulation, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ring(n: usize, radius: f64) -> Vec<Vec2> {
    (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            Vec2::new(radius * t.sin(), -radius * t.cos())
        })
        .collect()
}

fn random_rii(rng: &mut ChaCha8Rng) -> Option<f64> {
    if rng.random_bool(0.1) {
        None
    } else {
        Some(rng.random_range(0.0..3.0))
    }
}

/// `n` mobile nodes scattered over 1.2 `d_max` (some start outside the
/// containment disc) with random radii and random RII toward four anchors
/// on the `d_max` ring.
pub fn convergence_scenario(seed: u64, n: usize, params: &ForceParams) -> Simulation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchors = ring(4, params.d_max);
    let nodes = (0..n)
        .map(|i| {
            let t = rng.random_range(0.0..TAU);
            let r = 1.2 * params.d_max * rng.random_range(0.0f64..1.0).sqrt();
            let radius = rng.random_range(6.0..20.0);
            let rii = (0..anchors.len()).map(|_| random_rii(&mut rng)).collect();
            LayoutNode::mobile(format!("n{i}"), Vec2::new(r * t.cos(), r * t.sin()), radius, rii)
        })
        .collect();
    Simulation {
        nodes,
        anchors,
        center: Vec2::zeros(),
    }
}

/// Two-anchor controlled experiment: anchor A at `(-d_max, 0)`, B at
/// `(d_max, 0)`. Node 0 has RII 2 toward A and 1 toward B; node 1 (the
/// control) has 1 toward both and starts at node 0's mirror image across
/// the x axis, so both begin equidistant from A. Eight neutral-to-random
/// background nodes share the disc.
pub fn attraction_scenario(seed: u64, params: &ForceParams) -> Simulation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = params.d_max;
    let anchors = vec![Vec2::new(-d, 0.0), Vec2::new(d, 0.0)];
    let x = rng.random_range(-0.5 * d..0.5 * d);
    let y = rng.random_range(0.1 * d..0.5 * d);
    let mut nodes = vec![
        LayoutNode::mobile("high", Vec2::new(x, y), 12.0, vec![Some(2.0), Some(1.0)]),
        LayoutNode::mobile("control", Vec2::new(x, -y), 12.0, vec![Some(1.0), Some(1.0)]),
    ];
    for i in 0..8 {
        let t = rng.random_range(0.0..TAU);
        let r = 0.9 * d * rng.random_range(0.0f64..1.0).sqrt();
        let rii = vec![random_rii(&mut rng), random_rii(&mut rng)];
        nodes.push(LayoutNode::mobile(format!("bg{i}"), Vec2::new(r * t.cos(), r * t.sin()), rng.random_range(6.0..16.0), rii));
    }
    Simulation {
        nodes,
        anchors,
        center: Vec2::zeros(),
    }
}

/// Random two-level hierarchy with 1..=`max_leaves` leaves; leaf counts
/// span three orders of magnitude.
pub fn random_hierarchy(seed: u64, max_leaves: usize) -> PackNode {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leaves = rng.random_range(1..=max_leaves.max(1));
    let groups = rng.random_range(1..=leaves.min(8));
    let mut children: Vec<Vec<PackNode>> = vec![Vec::new(); groups];
    for i in 0..leaves {
        // Every group gets at least one leaf.
        let g = if i < groups { i } else { rng.random_range(0..groups) };
        let count = 10f64.powf(rng.random_range(0.0..3.0)).round() as u64;
        children[g].push(PackNode::Leaf {
            id: format!("leaf{i}"),
            count: count.max(1),
        });
    }
    PackNode::Group {
        id: "root".into(),
        children: children
            .into_iter()
            .enumerate()
            .map(|(g, c)| PackNode::Group {
                id: format!("group{g}"),
                children: c,
            })
            .collect(),
    }
}

fn dist(a: &PackedCircle, b: &PackedCircle) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Pairs of siblings whose disks overlap by more than `tol`.
pub fn sibling_overlaps(circles: &[PackedCircle], tol: f64) -> usize {
    let mut bad = 0;
    for (i, a) in circles.iter().enumerate() {
        for b in &circles[i + 1..] {
            if a.parent.is_some() && a.parent == b.parent && dist(a, b) < a.r + b.r - tol {
                bad += 1;
            }
        }
    }
    bad
}

/// Circles that reach outside their parent's disk by more than `tol`.
pub fn containment_violations(circles: &[PackedCircle], tol: f64) -> usize {
    circles
        .iter()
        .filter(|c| c.parent.is_some_and(|p| dist(c, &circles[p]) + c.r > circles[p].r + tol))
        .count()
}
