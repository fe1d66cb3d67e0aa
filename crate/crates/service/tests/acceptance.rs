//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! test harness so every line is printed, then exits non-zero on failure.

mod common;

use std::io::{BufRead, BufReader};
use std::net::SocketAddr;
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fundscape::embed::HashingEmbedder;
use fundscape::layout::{
    bubble_treemap_pack, collision_force, containment_force, impact_force, ForceParams, TreemapConfig, Vec2,
};
use fundscape::metrics::{
    disruption_index, pi_profile, rii_from_counts, DisruptionCounts, ImpactTables, ImpactType, MetricsConfig,
};
use fundscape::predictor::{
    build_training_set, evaluate_auc, roc_auc_trapezoid, train_topic_model, BoostedStumps, EmbeddingTable,
    OutcomeIndex, RealizedOutcome, SplitConfig, TimeLagTable,
};
use fundscape::store::{
    generate_synthetic_corpus, linked_documents, DocType, ImpactMode, LinkType, OutcomeKind, PlantedStructure,
    SynthSizes, TopicPath,
};
use fundscape_service::schema::schema_for_path;
use fundscape_testkit::layout::{
    attraction_scenario, containment_violations, convergence_scenario, random_hierarchy, sibling_overlaps,
};
use fundscape_testkit::predictor::{marker_corpus, MARKER_TOKEN, MARKER_TOPIC, PATENT_FIELD};
use fundscape_testkit::{http, oracles, random_corpus};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn metric_oracles() -> Outcome {
    let mut compared = 0usize;
    let mut mismatches = Vec::new();
    for seed in 0..50u64 {
        let snap = random_corpus(seed, 200);
        let data = snap.data();
        let tables = ImpactTables::compute(&snap, &MetricsConfig::default()).map_err(|e| e.to_string())?;
        let hit = oracles::hit_flags(data, 1, 20, 1);
        let disruptive = oracles::disruptive_flags(data, 1, 20);
        for (i, p) in snap.papers().iter().enumerate() {
            compared += 3;
            if tables.hit[i] != hit[&p.paper_id] {
                mismatches.push(format!("seed {seed}: hit flag of {}", p.paper_id));
            }
            if tables.disruptive[i] != disruptive[&p.paper_id] {
                mismatches.push(format!("seed {seed}: disruptive flag of {}", p.paper_id));
            }
            if disruption_index(&snap, &p.paper_id).ok().flatten() != oracles::disruption_index(data, &p.paper_id) {
                mismatches.push(format!("seed {seed}: disruption of {}", p.paper_id));
            }
        }
        for g in snap.grants() {
            compared += 1;
            let v = tables.grant_impact(&snap, &g.grant_id).map_err(|e| e.to_string())?;
            let got = ImpactType::ALL.map(|t| v.get(t));
            if got != oracles::grant_impact(data, &g.grant_id, &hit, &disruptive) {
                mismatches.push(format!("seed {seed}: impact of {}", g.grant_id));
            }
            for t in DocType::ALL {
                compared += 1;
                let mut chains: Vec<(String, String)> =
                    linked_documents(&snap, &[&g.grant_id], OutcomeKind::from(t), ImpactMode::Broad, false)
                        .map_err(|e| e.to_string())?
                        .into_iter()
                        .map(|c| (c.paper_id.unwrap_or_default().to_string(), c.doc_id.to_string()))
                        .collect();
                chains.sort();
                if chains != oracles::broad_chains(data, &g.grant_id, t) {
                    mismatches.push(format!("seed {seed}: broad {t:?} multiset of {}", g.grant_id));
                }
            }
        }
        for r in snap.researchers() {
            compared += 1;
            let profile = pi_profile(&snap, &tables, &r.researcher_id, 2021).map_err(|e| e.to_string())?;
            let cites: Vec<u64> = data
                .links
                .iter()
                .filter(|l| l.link_type == LinkType::PaperAuthor && l.target_id == r.researcher_id)
                .filter_map(|l| snap.paper(&l.source_id).map(|p| p.citation_count))
                .collect();
            if profile.h_index != oracles::h_index(&cites) {
                mismatches.push(format!("seed {seed}: h-index of {}", r.researcher_id));
            }
        }
    }
    check(mismatches.is_empty(), || {
        format!("{} mismatches, first: {}", mismatches.len(), mismatches[0])
    })?;
    Ok(format!("50 corpora, {compared} comparisons, 0 mismatches"))
}

fn disruption_arithmetic() -> Outcome {
    let cases = [((3, 0, 0), 1.0), ((0, 4, 0), -1.0), ((2, 1, 1), 0.25)];
    for ((i, j, k), want) in cases {
        let got = DisruptionCounts::new(i, j, k).index();
        check(got == Some(want), || format!("({i},{j},{k}) gave {got:?}, want {want}"))?;
    }
    Ok("(3,0,0)=1, (0,4,0)=-1, (2,1,1)=0.25 exact".into())
}

fn rii_cases() -> Outcome {
    let field = rii_from_counts(4, 10, 20, 100).map_err(|e| e.to_string())?;
    check(field == Some(2.0), || format!("4/10 vs 20/100 gave {field:?}"))?;
    let mut defined = 0;
    for seed in 0..10 {
        let snap = generate_synthetic_corpus(seed, &SynthSizes::scaled(150), &PlantedStructure::default())
            .map_err(|e| e.to_string())?;
        let tables = ImpactTables::compute(&snap, &MetricsConfig::default()).map_err(|e| e.to_string())?;
        let all: Vec<usize> = (0..snap.grants().len()).collect();
        let row = tables.rii_row(&all).map_err(|e| e.to_string())?;
        let global = tables.global_incidence();
        for t in ImpactType::ALL {
            let want = (global.count(t) > 0).then_some(1.0);
            check(row[&t] == want, || format!("seed {seed} {t}: {:?}, want {want:?}", row[&t]))?;
            defined += usize::from(want.is_some());
        }
    }
    let undefined = rii_from_counts(0, 5, 0, 100).map_err(|e| e.to_string())?;
    check(undefined.is_none(), || format!("zero baseline gave {undefined:?}"))?;
    Ok(format!("2.0 exact; {defined} whole-corpus values all 1.0; zero baseline undefined"))
}

fn force_laws() -> Outcome {
    let close = |a: Vec2, b: Vec2| (a - b).norm() <= 1e-12;
    let a = Vec2::new(100.0, 0.0);
    let f = impact_force(Vec2::zeros(), [(&a, Some(2.0))], None);
    check(close(f, Vec2::new(100.0, 0.0)), || format!("impact example gave {f}"))?;
    let c = containment_force(Vec2::new(120.0, 0.0), Vec2::zeros(), 100.0, 1.0);
    check(close(c, Vec2::new(-20.0, 0.0)), || format!("containment example gave {c}"))?;
    let k = collision_force(Vec2::zeros(), 10.0, Vec2::new(20.0, 0.0), 10.0, 2.0, 1.0, Vec2::x());
    check(close(k, Vec2::new(-2.0, 0.0)), || format!("collision example gave {k}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..1000 {
        let mut point = || Vec2::new(rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0));
        let node = point();
        let anchors: Vec<Vec2> = (0..4).map(|_| point()).collect();
        let f = impact_force(node, anchors.iter().map(|a| (a, Some(1.0))), None);
        check(f == Vec2::zeros(), || format!("configuration {i}: RII 1 pulls with {f}"))?;
    }
    Ok("3 examples within 1e-12; RII=1 zero force in 1000 configurations".into())
}

fn layout_convergence() -> Outcome {
    let params = ForceParams::default();
    let mut worst = (0usize, 0.0f64, 0.0f64);
    for seed in 0..10 {
        let mut a = convergence_scenario(seed, 30, &params);
        let mut b = a.clone();
        let ra = a.run(&params, seed).map_err(|e| e.to_string())?;
        let rb = b.run(&params, seed).map_err(|e| e.to_string())?;
        check(ra.ticks <= 1000, || format!("seed {seed}: {} ticks", ra.ticks))?;
        check(ra.containment_residual <= 1e-3 * params.d_max, || format!("seed {seed}: {ra:?}"))?;
        check(ra.overlap_residual <= 0.5, || format!("seed {seed}: {ra:?}"))?;
        let bitwise = a.nodes.iter().zip(&b.nodes).all(|(x, y)| {
            x.position.x.to_bits() == y.position.x.to_bits() && x.position.y.to_bits() == y.position.y.to_bits()
        });
        check(ra == rb && bitwise, || format!("seed {seed}: runs differ"))?;
        worst = (
            worst.0.max(ra.ticks),
            worst.1.max(ra.containment_residual),
            worst.2.max(ra.overlap_residual),
        );
    }
    Ok(format!(
        "10 seeds: max {} ticks, containment {:.2e}, overlap {:.2e}, bitwise repeatable",
        worst.0, worst.1, worst.2
    ))
}

fn attraction() -> Outcome {
    let params = ForceParams::default();
    let mut wins = 0;
    for seed in 0..20 {
        let mut sim = attraction_scenario(seed, &params);
        sim.run(&params, seed).map_err(|e| e.to_string())?;
        let anchor = sim.anchors[0];
        if (sim.nodes[0].position - anchor).norm() < (sim.nodes[1].position - anchor).norm() {
            wins += 1;
        }
    }
    check(wins >= 19, || format!("RII-2 node closer in only {wins} of 20 seeds"))?;
    Ok(format!("RII-2 node closer in {wins} of 20 seeds"))
}

fn treemaps() -> Outcome {
    let config = TreemapConfig::default();
    let (mut overlaps, mut escapes) = (0, 0);
    for seed in 0..200 {
        let circles = bubble_treemap_pack(&random_hierarchy(seed, 50), Vec2::new(50.0, -20.0), &config);
        overlaps += sibling_overlaps(&circles, 1e-9);
        escapes += containment_violations(&circles, 1e-9);
    }
    check(overlaps + escapes == 0, || format!("{overlaps} overlaps, {escapes} escapes"))?;
    Ok("200 hierarchies: 0 sibling overlaps, 0 containment violations".into())
}

fn predictor_pipeline() -> Outcome {
    let snapshot = marker_corpus(11, 2400, 0.2);
    let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default()).map_err(|e| e.to_string())?;
    let index = OutcomeIndex::build(&snapshot, &tables, ImpactType::DirectPatent, 2);
    let y = TimeLagTable::case_one().get(ImpactType::DirectPatent).unwrap_or_default();
    check(y == 6, || format!("direct_patent lag {y}"))?;
    let grants = snapshot.grants();
    let mut audited = 0;
    for topic in index.topic_members(|_| true).keys() {
        for seed in 0..3 {
            let Ok(set) = build_training_set(&snapshot, &index, topic, y, &SplitConfig::default(), seed) else {
                continue;
            };
            check(set.cutoff_year == 2015, || format!("cutoff {}", set.cutoff_year))?;
            for e in &set.examples {
                let start = grants[e.grant].start_year();
                check((2000..=2015).contains(&start), || format!("{} starts {start}", e.grant_id))?;
                audited += 1;
            }
            check(set.positives() == set.negatives(), || {
                format!("{topic}: {} positives, {} negatives", set.positives(), set.negatives())
            })?;
        }
    }

    let topic = TopicPath::parse("X/Y");
    let mut outcomes = vec![Vec::new(); grants.len()];
    for g in (0..grants.len()).filter(|&g| grants[g].start_year() <= 2015).take(120) {
        outcomes[g].push(RealizedOutcome {
            topic: topic.clone(),
            year: 2016,
        });
    }
    let planted = OutcomeIndex {
        impact: ImpactType::DirectPatent,
        topic_level: 2,
        outcomes,
    };
    let set = build_training_set(&snapshot, &planted, &topic, y, &SplitConfig::default(), 0).map_err(|e| e.to_string())?;
    let split = (set.positives(), set.negatives(), set.train.len(), set.test.len());
    check(split == (120, 120, 192, 48), || format!("120 positives split as {split:?}"))?;
    Ok(format!("{audited} examples within 2000..2015; classes balanced; 120 positives -> 192/48"))
}

fn predictor_skill() -> Outcome {
    let snapshot = marker_corpus(11, 2400, 0.2);
    let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default()).map_err(|e| e.to_string())?;
    let embeddings = EmbeddingTable::compute(&snapshot, &HashingEmbedder::default()).map_err(|e| e.to_string())?;
    let index = OutcomeIndex::build(&snapshot, &tables, ImpactType::DirectPatent, 2);
    let topic = TopicPath::parse(MARKER_TOPIC);
    let mut set = build_training_set(&snapshot, &index, &topic, 6, &SplitConfig::default(), 7).map_err(|e| e.to_string())?;
    check(set.positives() >= 300, || format!("only {} positives", set.positives()))?;
    let model = train_topic_model(&set, &embeddings, &BoostedStumps::default(), 7).map_err(|e| e.to_string())?;
    let auc = model.record.test_auc.unwrap_or(f64::NAN);
    check(auc >= 0.90, || format!("marker test AUC {auc:.4}"))?;

    let mut labels: Vec<bool> = set.examples.iter().map(|e| e.label).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(99));
    for (e, l) in set.examples.iter_mut().zip(labels) {
        e.label = l;
    }
    let control = train_topic_model(&set, &embeddings, &BoostedStumps::default(), 7).map_err(|e| e.to_string())?;
    let control_auc = control.record.test_auc.unwrap_or(f64::NAN);
    check((0.35..=0.65).contains(&control_auc), || format!("control AUC {control_auc:.4}"))?;

    let unit = [
        (vec![(0.9, true), (0.1, false)], 1.0),
        (vec![(0.5, true), (0.5, false), (0.5, true), (0.5, false)], 0.5),
        (vec![(0.8, true), (0.4, true), (0.6, false), (0.2, false)], 0.75),
    ];
    for (scored, want) in unit {
        let got = evaluate_auc(&scored).map_err(|e| e.to_string())?;
        check(got == want, || format!("unit case gave {got}, want {want}"))?;
    }
    Ok(format!(
        "{} positives: test AUC {auc:.4}; shuffled control {control_auc:.4}; unit cases 1.0/0.5/0.75 exact",
        set.positives()
    ))
}

fn auc_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = rng.random_range(2..200);
        let mut scored: Vec<(f64, bool)> = (0..n)
            .map(|_| {
                let s = if case % 2 == 0 {
                    rng.random_range(0..10) as f64 / 10.0
                } else {
                    rng.random::<f64>()
                };
                (s, rng.random_bool(0.4))
            })
            .collect();
        scored[0].1 = true;
        scored[1].1 = false;
        let mw = evaluate_auc(&scored).map_err(|e| e.to_string())?;
        let trap = roc_auc_trapezoid(&scored).map_err(|e| e.to_string())?;
        worst = worst.max((mw - trap).abs());
    }
    check(worst <= 1e-9, || format!("largest difference {worst:e}"))?;
    Ok(format!("100 score sets, largest difference {worst:.1e}"))
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn fundscape(args: &[&str], dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fundscape"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| format!("cannot run fundscape: {e}"))?;
    check(out.status.success(), || {
        format!("fundscape {} failed: {}", args[0], String::from_utf8_lossy(&out.stderr))
    })
}

fn start_server(dir: &Path) -> Result<(Server, SocketAddr), String> {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fundscape"))
        .args(["serve", "--snapshot", "snapshot.json", "--registry", "models", "--port", "0"])
        .current_dir(dir)
        .env("RUST_LOG", "info")
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| format!("cannot start server: {e}"))?;
    let stderr = child.stderr.take().ok_or("no server stderr")?;
    let server = Server(child);
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        for line in BufReader::new(stderr).lines().map_while(Result::ok) {
            if let Some(addr) = line.split("http://").nth(1) {
                let _ = tx.send(addr.trim().to_string());
            }
        }
    });
    let addr = rx
        .recv_timeout(Duration::from_secs(60))
        .map_err(|_| "server did not report its address".to_string())?;
    let addr = addr.parse().map_err(|e| format!("bad address {addr}: {e}"))?;
    Ok((server, addr))
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = dir.path();
    let started = Instant::now();
    let planted = format!("{PATENT_FIELD}=0.95");
    fundscape(
        &["synth", "--seed", "5", "--grants", "1000", "--out", "corpus", "--planted-field", &planted, "--marker", MARKER_TOKEN],
        dir,
    )?;
    fundscape(&["ingest", "--input", "corpus", "--out", "snapshot.json"], dir)?;
    fundscape(&["metrics", "--snapshot", "snapshot.json", "--out", "metrics.json"], dir)?;
    fundscape(&["layout", "--snapshot", "snapshot.json", "--out", "landscape.json"], dir)?;
    fundscape(
        &[
            "train", "--snapshot", "snapshot.json", "--impact", "direct_patent", "--min-positives", "10", "--seed", "1",
            "--registry", "models",
        ],
        dir,
    )?;
    fundscape(&["predict", "--registry", "models", "--threshold", "0.5", "--out", "scores.ndjson"], dir)?;
    let (server, addr) = start_server(dir)?;

    let field = PATENT_FIELD.split('/').next().unwrap_or_default();
    let paths = [
        "/api/health".to_string(),
        "/api/grants?year_min=2018".into(),
        "/api/fields".into(),
        format!("/api/pis?field={field}&rank_by=h_index"),
        "/api/pis?rank_by=productivity".into(),
        "/api/pis?rank_by=avg_log_c10".into(),
        "/api/landscape?mode=direct".into(),
        format!("/api/landscape?mode=broad&field={field}"),
        "/api/landscape?mode=direct&threshold=0.5".into(),
        "/api/impact-types".into(),
        format!("/api/impact-types?field={PATENT_FIELD}"),
        "/api/entity-distribution?doc_type=patent&dimension=assignee".into(),
        format!("/api/topics/grant:{field}/keywords?top_n=20"),
        "/api/predictions?impact_type=direct_patent&threshold=0.5".into(),
        "/api/predictions?impact_type=direct_patent&topic=G06/G06N".into(),
    ];
    let mut validated = 0;
    for path in &paths {
        let response = http::get(addr, path).map_err(|e| format!("{path}: {e}"))?;
        check(response.status == 200, || format!("{path}: status {} {}", response.status, response.text()))?;
        let name = schema_for_path(path.split('?').next().unwrap_or_default()).ok_or(format!("no schema for {path}"))?;
        let errors = common::schema_errors(name, &response.json());
        check(errors.is_empty(), || format!("{path}: {errors:?}"))?;
        validated += 1;
    }
    let health = http::get(addr, "/api/health").map_err(|e| e.to_string())?.json();
    check(health["grants"] == 1000, || format!("health reports {}", health["grants"]))?;
    check(health["models"].as_u64().unwrap_or(0) > 0, || "no models loaded".into())?;
    drop(server);
    let elapsed = started.elapsed();
    check(elapsed < Duration::from_secs(120), || format!("pipeline took {elapsed:.1?}"))?;
    Ok(format!("1000 grants in {elapsed:.1?}; {validated} responses valid"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("metric oracle equivalence", metric_oracles),
        ("disruption arithmetic", disruption_arithmetic),
        ("relative impact index", rii_cases),
        ("force laws", force_laws),
        ("layout convergence", layout_convergence),
        ("attraction monotonicity", attraction),
        ("treemap geometry", treemaps),
        ("predictor pipeline", predictor_pipeline),
        ("predictor skill", predictor_skill),
        ("AUC cross-check", auc_cross_check),
        ("end-to-end pipeline and schemas", end_to_end),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
