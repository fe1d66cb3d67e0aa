use std::collections::HashMap;

use fundscape::layout::{
    build_landscape, bubble_treemap_pack, collision_force, containment_force, entity_level_layout, impact_force,
    ForceParams, LandscapeConfig, LayoutError, LayoutNode, NodeKind, PredictionOverlay, Simulation, TreemapConfig,
    Vec2,
};
use fundscape::metrics::{ImpactTables, MetricsConfig};
use fundscape::store::{generate_synthetic_corpus, ImpactMode, OutcomeKind, PlantedStructure, SynthSizes};
use fundscape_testkit::layout::{
    attraction_scenario, containment_violations, convergence_scenario, random_hierarchy, sibling_overlaps,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: Vec2, b: Vec2) -> bool {
    (a - b).norm() <= 1e-12
}

fn random_point(rng: &mut ChaCha8Rng, extent: f64) -> Vec2 {
    Vec2::new(rng.random_range(-extent..extent), rng.random_range(-extent..extent))
}

#[test]
fn force_law_examples() {
    let a = Vec2::new(100.0, 0.0);
    assert!(close(impact_force(Vec2::zeros(), [(&a, Some(2.0))], None), Vec2::new(100.0, 0.0)));
    let b = Vec2::new(0.0, 2.0);
    assert!(close(impact_force(Vec2::zeros(), [(&b, Some(0.5))], None), Vec2::new(0.0, -0.25)));
    assert!(close(containment_force(Vec2::new(120.0, 0.0), Vec2::zeros(), 100.0, 1.0), Vec2::new(-20.0, 0.0)));
    assert_eq!(containment_force(Vec2::new(60.0, 80.0), Vec2::zeros(), 100.0, 1.0), Vec2::zeros());
    let f = collision_force(Vec2::zeros(), 10.0, Vec2::new(20.0, 0.0), 10.0, 2.0, 1.0, Vec2::x());
    assert!(close(f, Vec2::new(-2.0, 0.0)));
    let g = collision_force(Vec2::new(20.0, 0.0), 10.0, Vec2::zeros(), 10.0, 2.0, 1.0, Vec2::x());
    assert!(close(f + g, Vec2::zeros()));
    assert_eq!(collision_force(Vec2::zeros(), 10.0, Vec2::new(22.0, 0.0), 10.0, 2.0, 1.0, Vec2::x()), Vec2::zeros());
}

#[test]
fn neutral_rii_never_pulls() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let node = random_point(&mut rng, 500.0);
        let anchors: Vec<Vec2> = (0..rng.random_range(1..6)).map(|_| random_point(&mut rng, 500.0)).collect();
        let f = impact_force(node, anchors.iter().map(|a| (a, Some(1.0))), None);
        assert_eq!(f, Vec2::zeros());
    }
}

#[test]
fn containment_points_back_to_center() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let center = random_point(&mut rng, 50.0);
        let node = random_point(&mut rng, 400.0);
        let d_max = rng.random_range(1.0..300.0);
        let f = containment_force(node, center, d_max, rng.random_range(0.1..3.0));
        let r = node - center;
        if r.norm() <= d_max {
            assert_eq!(f, Vec2::zeros());
        } else {
            let cos = f.dot(&r) / (f.norm() * r.norm());
            assert!((cos + 1.0).abs() < 1e-12, "not anti-parallel: cos = {cos}");
        }
    }
}

#[test]
fn collisions_cancel_pairwise() {
    let params = ForceParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..50 {
        let mut sim = convergence_scenario(seed, 30, &params);
        // Pack the nodes tightly so many pairs collide, including one exact coincidence.
        for n in &mut sim.nodes {
            n.position *= 0.1;
        }
        sim.nodes[1].position = sim.nodes[0].position;
        let forces = sim.forces(&params, &mut rng);
        let sum: Vec2 = forces.collide.iter().sum();
        assert!(sum.norm() < 1e-9, "collision forces sum to {sum}");
        assert!(forces.collide[0].norm() > 0.0);
    }
}

#[test]
fn total_force_is_linear_in_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..50 {
        let params = ForceParams {
            impact_weight: rng.random_range(0.0..2.0),
            contain_weight: rng.random_range(0.0..2.0),
            collide_weight: rng.random_range(0.0..2.0),
            ..ForceParams::default()
        };
        let mut sim = convergence_scenario(seed, 30, &params);
        for n in &mut sim.nodes {
            n.position *= 0.2;
        }
        let forces = sim.forces(&params, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut doubled = params.clone();
        doubled.collide_weight *= 2.0;
        for i in 0..sim.nodes.len() {
            let rest = forces.impact[i] * params.impact_weight + forces.contain[i] * params.contain_weight;
            let single = forces.total(&params, i) - rest;
            let double = forces.total(&doubled, i) - rest;
            assert!((double - single * 2.0).norm() <= 1e-9 * (1.0 + single.norm()));
        }
    }
}

#[test]
fn alpha_schedule_sets_the_tick_count() {
    let params = ForceParams::default();
    let mut expected = 0;
    let mut alpha = params.alpha;
    while alpha >= params.alpha_min {
        let next = alpha + (params.alpha_target - alpha) * params.alpha_decay;
        assert!(next < alpha);
        alpha = next;
        expected += 1;
    }
    let mut sim = convergence_scenario(0, 30, &params);
    let report = sim.run(&params, 0).unwrap();
    assert_eq!(report.ticks, expected);
    assert!(report.ticks <= params.max_ticks);
    assert!(report.final_alpha < params.alpha_min);

    let capped = ForceParams { max_ticks: 50, ..params };
    assert_eq!(convergence_scenario(0, 30, &capped).run(&capped, 0).unwrap().ticks, 50);
}

#[test]
fn thirty_nodes_converge_deterministically() {
    let params = ForceParams::default();
    for seed in 0..20 {
        let mut a = convergence_scenario(seed, 30, &params);
        let mut b = a.clone();
        let ra = a.run(&params, seed).unwrap();
        let rb = b.run(&params, seed).unwrap();
        assert!(ra.ticks <= 1000);
        assert!(ra.containment_residual <= 1e-3 * params.d_max, "seed {seed}: {ra:?}");
        assert!(ra.overlap_residual <= 0.5, "seed {seed}: {ra:?}");
        assert_eq!(ra, rb);
        for (x, y) in a.nodes.iter().zip(&b.nodes) {
            assert_eq!(x.position.x.to_bits(), y.position.x.to_bits());
            assert_eq!(x.position.y.to_bits(), y.position.y.to_bits());
        }
    }
}

#[test]
fn zero_forces_leave_nodes_in_place() {
    let mut sim = Simulation {
        nodes: vec![
            LayoutNode::mobile("a", Vec2::new(-50.0, 0.0), 5.0, vec![Some(1.0)]),
            LayoutNode::mobile("b", Vec2::new(50.0, 0.0), 5.0, vec![None]),
        ],
        anchors: vec![Vec2::new(400.0, 0.0)],
        center: Vec2::zeros(),
    };
    let before = sim.clone();
    sim.run(&ForceParams::default(), 1).unwrap();
    assert_eq!(sim.nodes, before.nodes);
}

#[test]
fn non_finite_position_is_reported() {
    let mut sim = Simulation {
        nodes: vec![LayoutNode::mobile("bad", Vec2::new(f64::NAN, 0.0), 5.0, vec![])],
        anchors: vec![],
        center: Vec2::zeros(),
    };
    let err = sim.run(&ForceParams::default(), 0).unwrap_err();
    assert!(matches!(err, LayoutError::NonFinite { ref node, tick: 0 } if node == "bad"));
}

#[test]
fn high_rii_node_ends_closer_to_its_anchor() {
    let params = ForceParams::default();
    let mut wins = 0;
    for seed in 0..20 {
        let mut sim = attraction_scenario(seed, &params);
        sim.run(&params, seed).unwrap();
        let a = sim.anchors[0];
        if (sim.nodes[0].position - a).norm() < (sim.nodes[1].position - a).norm() {
            wins += 1;
        }
    }
    assert!(wins >= 19, "only {wins} of 20 seeds");
}

#[test]
fn treemaps_have_no_overlap_or_escape() {
    let cfg = TreemapConfig::default();
    for seed in 0..300 {
        let root = random_hierarchy(seed, 50);
        let anchor = Vec2::new(120.0, -40.0);
        let circles = bubble_treemap_pack(&root, anchor, &cfg);
        assert_eq!(sibling_overlaps(&circles, 1e-9), 0, "seed {seed}");
        assert_eq!(containment_violations(&circles, 1e-9), 0, "seed {seed}");
        assert_eq!((circles[0].x, circles[0].y), (anchor.x, anchor.y));
        for c in circles.iter().filter(|c| c.leaf) {
            assert!((c.r - cfg.leaf_scale * (c.count as f64).sqrt()).abs() < 1e-9);
        }
    }
}

#[test]
fn anchors_keep_their_distance() {
    let kinds = [OutcomeKind::Patent, OutcomeKind::ClinicalTrial, OutcomeKind::Policy, OutcomeKind::Newsfeed];
    for seed in 0..50 {
        let layout = entity_level_layout(&kinds, Vec2::zeros(), 400.0, 300.0, seed).unwrap();
        assert_eq!(layout.anchors.len(), 4);
        assert!(layout.min_separation() >= 300.0);
        for a in &layout.anchors {
            assert!((a.position[0].hypot(a.position[1]) - 400.0).abs() < 1e-9);
        }
        assert_eq!(layout, entity_level_layout(&kinds, Vec2::zeros(), 400.0, 300.0, seed).unwrap());
    }
    let single = entity_level_layout(&kinds[..1], Vec2::new(10.0, 10.0), 50.0, 1.0, 0).unwrap();
    let p = single.anchors[0].position;
    assert!(((p[0] - 10.0).hypot(p[1] - 10.0) - 50.0).abs() < 1e-9);
    assert!(matches!(
        entity_level_layout(&kinds, Vec2::zeros(), 100.0, 200.0, 0),
        Err(LayoutError::CanvasTooSmall { anchors: 4, .. })
    ));
}

fn synthetic() -> (fundscape::store::CorpusSnapshot, ImpactTables) {
    let snap = generate_synthetic_corpus(42, &SynthSizes::scaled(300), &PlantedStructure::default()).unwrap();
    let tables = ImpactTables::compute(&snap, &MetricsConfig::default()).unwrap();
    (snap, tables)
}

#[test]
fn landscape_edges_meet_their_nodes() {
    let (snap, tables) = synthetic();
    for mode in [ImpactMode::Direct, ImpactMode::Broad] {
        let layout = build_landscape(&snap, &tables, "", mode, &LandscapeConfig::default(), 9, None).unwrap();
        assert!(!layout.edges.is_empty());
        let anchors = layout.anchors.as_ref().unwrap();
        for e in &layout.edges {
            let from = layout.node(&e.grant_topic).unwrap();
            let to = layout.node(&e.impact_node).unwrap();
            assert_eq!(to.kind, NodeKind::ImpactNode);
            assert!((e.control_points[0][0] - from.x).hypot(e.control_points[0][1] - from.y) < 1e-9);
            assert!((e.control_points[2][0] - to.x).hypot(e.control_points[2][1] - to.y) < 1e-9);
            let w = anchors.position(e.impact_kind).unwrap();
            assert_eq!(e.control_points[1], [w.x, w.y]);
            assert!((e.width - 0.75 * (e.count as f64).sqrt()).abs() < 1e-12);
        }
        let grant_nodes = layout.nodes.iter().filter(|n| n.kind == NodeKind::GrantTopic).count();
        assert_eq!(layout.glyphs.len(), grant_nodes);
        assert!(layout.simulation.containment_residual <= 1e-3 * layout.d_max);
        assert!(layout.simulation.overlap_residual <= 0.5, "{:?}", layout.simulation);
        for c in &layout.clusters {
            assert_eq!(sibling_overlaps(&c.circles, 1e-9), 0);
            assert_eq!(containment_violations(&c.circles, 1e-9), 0);
        }
        let again = build_landscape(&snap, &tables, "", mode, &LandscapeConfig::default(), 9, None).unwrap();
        assert_eq!(layout, again);
    }
}

#[test]
fn landscape_of_one_field_with_prediction_rings() {
    let (snap, tables) = synthetic();
    let scores: HashMap<String, f64> =
        snap.grants().iter().enumerate().map(|(i, g)| (g.grant_id.clone(), (i % 10) as f64 / 10.0)).collect();
    let overlay = PredictionOverlay { threshold: 0.5, scores };
    let layout =
        build_landscape(&snap, &tables, "Engineering", ImpactMode::Direct, &LandscapeConfig::default(), 1, Some(&overlay))
            .unwrap();
    assert!(layout.glyphs.iter().all(|g| g.spec.prediction_ring_radius.is_some() && g.spec.belts.is_empty()));
    for t in layout.topics.iter().filter(|t| t.id.starts_with("grant:")) {
        assert!(t.topic_path.to_string().starts_with("Engineering/"));
        assert_eq!(t.topic_path.depth(), 2);
    }
    assert!(matches!(
        build_landscape(&snap, &tables, "Nope", ImpactMode::Direct, &LandscapeConfig::default(), 1, None),
        Err(LayoutError::UnknownField(_))
    ));
}
