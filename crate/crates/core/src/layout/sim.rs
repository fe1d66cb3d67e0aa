use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forces::{collision_force, containment_force, impact_force, Vec2};
use super::{LayoutError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    GrantTopic,
    ImpactNode,
    EntityAnchor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayoutNode {
    pub id: String,
    pub kind: NodeKind,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub fixed: bool,
    /// RII toward each simulation anchor, aligned with
    /// [`Simulation::anchors`]; `None` where undefined.
    pub rii: Vec<Option<f64>>,
}

impl LayoutNode {
    pub fn mobile(id: impl Into<String>, position: Vec2, radius: f64, rii: Vec<Option<f64>>) -> Self {
        LayoutNode {
            id: id.into(),
            kind: NodeKind::GrantTopic,
            position,
            velocity: Vec2::zeros(),
            radius,
            fixed: false,
            rii,
        }
    }
}

/// Simulation constants. `alpha` cools geometrically toward
/// `alpha_target`; the run stops once it drops below `alpha_min`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForceParams {
    pub alpha: f64,
    pub alpha_min: f64,
    pub alpha_decay: f64,
    pub alpha_target: f64,
    pub velocity_decay: f64,
    /// Weight of the impact force.
    pub impact_weight: f64,
    /// Weight of the containment force.
    pub contain_weight: f64,
    /// Weight of the collision force.
    pub collide_weight: f64,
    pub k_contain: f64,
    pub k_collide: f64,
    pub d_max: f64,
    pub padding: f64,
    pub max_ticks: usize,
    /// Measure impact distances in units of `d_max`.
    pub normalize_impact: bool,
}

impl Default for ForceParams {
    fn default() -> Self {
        ForceParams {
            alpha: 1.0,
            alpha_min: 0.001,
            alpha_decay: 0.0228,
            alpha_target: 0.0,
            velocity_decay: 0.4,
            impact_weight: 0.001,
            contain_weight: 1.0,
            collide_weight: 1.0,
            k_contain: 1.0,
            k_collide: 3.0,
            d_max: 400.0,
            padding: 2.0,
            max_ticks: 1000,
            normalize_impact: false,
        }
    }
}

impl ForceParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(LayoutError::Params(what.to_string()));
        if !(self.alpha_decay > 0.0 && self.alpha_decay < 1.0) {
            return bad("alpha_decay must lie in (0, 1)");
        }
        if !(self.velocity_decay > 0.0 && self.velocity_decay < 1.0) {
            return bad("velocity_decay must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.alpha) || self.alpha_min < 0.0 || self.alpha_target >= self.alpha_min {
            return bad("require 0 <= alpha_target < alpha_min and alpha in [0, 1]");
        }
        let weights = [self.impact_weight, self.contain_weight, self.collide_weight, self.padding];
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) {
            return bad("weights and padding must be non-negative");
        }
        if !(self.k_contain > 0.0 && self.k_collide > 0.0 && self.d_max > 0.0) {
            return bad("k_contain, k_collide and d_max must be positive");
        }
        Ok(())
    }
}

/// Mobile and fixed nodes plus the impact anchors they are drawn to.
#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub nodes: Vec<LayoutNode>,
    pub anchors: Vec<Vec2>,
    pub center: Vec2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub ticks: usize,
    pub final_alpha: f64,
    pub containment_residual: f64,
    pub overlap_residual: f64,
}

/// The three force components on every node, in node order.
#[derive(Clone, Debug, PartialEq)]
pub struct ForceBreakdown {
    pub impact: Vec<Vec2>,
    pub contain: Vec<Vec2>,
    pub collide: Vec<Vec2>,
}

impl ForceBreakdown {
    pub fn total(&self, params: &ForceParams, i: usize) -> Vec2 {
        self.impact[i] * params.impact_weight
            + self.contain[i] * params.contain_weight
            + self.collide[i] * params.collide_weight
    }
}

impl Simulation {
    /// Unweighted force components at the current positions. Fixed nodes
    /// receive zero force and do not take part in collisions.
    pub fn forces(&self, params: &ForceParams, rng: &mut impl Rng) -> ForceBreakdown {
        let n = self.nodes.len();
        let mut out = ForceBreakdown {
            impact: vec![Vec2::zeros(); n],
            contain: vec![Vec2::zeros(); n],
            collide: vec![Vec2::zeros(); n],
        };
        let normalize = params.normalize_impact.then_some(params.d_max);
        for (i, node) in self.nodes.iter().enumerate() {
            if node.fixed {
                continue;
            }
            out.impact[i] = impact_force(node.position, self.anchors.iter().zip(node.rii.iter().copied()), normalize);
            out.contain[i] = containment_force(node.position, self.center, params.d_max, params.k_contain);
        }
        for i in 0..n {
            if self.nodes[i].fixed {
                continue;
            }
            for j in (i + 1)..n {
                if self.nodes[j].fixed {
                    continue;
                }
                let (a, b) = (&self.nodes[i], &self.nodes[j]);
                let fallback = if a.position == b.position {
                    let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    Vec2::new(t.cos(), t.sin())
                } else {
                    Vec2::x()
                };
                let f = collision_force(a.position, a.radius, b.position, b.radius, params.padding, params.k_collide, fallback);
                out.collide[i] += f;
                out.collide[j] -= f;
            }
        }
        out
    }

    /// Runs the cooled simulation in place.
    pub fn run(&mut self, params: &ForceParams, seed: u64) -> Result<SimulationReport> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut alpha = params.alpha;
        let mut ticks = 0;
        while ticks < params.max_ticks && alpha >= params.alpha_min {
            let forces = self.forces(params, &mut rng);
            for (i, node) in self.nodes.iter_mut().enumerate() {
                if node.fixed {
                    continue;
                }
                node.velocity = (node.velocity + forces.total(params, i) * alpha) * params.velocity_decay;
                node.position += node.velocity;
                if !(node.position.x.is_finite() && node.position.y.is_finite()) {
                    return Err(LayoutError::NonFinite {
                        node: node.id.clone(),
                        tick: ticks,
                    });
                }
            }
            alpha += (params.alpha_target - alpha) * params.alpha_decay;
            ticks += 1;
        }
        Ok(SimulationReport {
            ticks,
            final_alpha: alpha,
            containment_residual: containment_residual(&self.nodes, self.center, params.d_max),
            overlap_residual: overlap_residual(&self.nodes, params.padding),
        })
    }
}

/// Largest distance by which a mobile node lies beyond `d_max`.
pub fn containment_residual(nodes: &[LayoutNode], center: Vec2, d_max: f64) -> f64 {
    nodes
        .iter()
        .filter(|n| !n.fixed)
        .map(|n| ((n.position - center).norm() - d_max).max(0.0))
        .fold(0.0, f64::max)
}

/// Largest overlap `r1 + r2 + padding - d` between two mobile nodes.
pub fn overlap_residual(nodes: &[LayoutNode], padding: f64) -> f64 {
    let mobile: Vec<&LayoutNode> = nodes.iter().filter(|n| !n.fixed).collect();
    let mut worst = 0.0f64;
    for (i, a) in mobile.iter().enumerate() {
        for b in &mobile[i + 1..] {
            worst = worst.max(a.radius + b.radius + padding - (a.position - b.position).norm());
        }
    }
    worst
}

/// Sunflower (phyllotaxis) arrangement: `n` points spread evenly over a
/// disc of radius `extent` around `center`.
pub fn phyllotaxis(n: usize, center: Vec2, extent: f64) -> Vec<Vec2> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let r = extent * ((i as f64 + 0.5) / n.max(1) as f64).sqrt();
            let t = i as f64 * golden;
            center + Vec2::new(r * t.cos(), r * t.sin())
        })
        .collect()
}
