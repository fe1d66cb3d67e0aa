use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fundscape::embed::{cosine, tokenize, EmbeddingProvider, HashingEmbedder};
use fundscape::metrics::{ImpactTables, ImpactType, MetricsConfig};
use fundscape::predictor::{
    build_training_set, evaluate_auc, load_models, predict_and_highlight, roc_auc_trapezoid, select_topics,
    train_topic_model, train_topics, BoostedStumps, EmbeddingTable, ModelRegistry, OutcomeIndex,
    PiMetric, PredictorError, RealizedOutcome, Scorer, SplitConfig, TimeLagTable, TrainConfig,
};
use fundscape::store::{generate_synthetic_corpus, CorpusSnapshot, LinkType, PlantedStructure, SynthSizes, TopicPath};
use fundscape_testkit::oracles::pairwise_auc;
use fundscape_testkit::predictor::{
    direct_patent_topics, greedy_topics, marker_corpus, planted_separation, MARKER_TOKEN, MARKER_TOPIC,
};

struct Fixture {
    snapshot: CorpusSnapshot,
    tables: ImpactTables,
    embeddings: EmbeddingTable,
}

fn fixture(snapshot: CorpusSnapshot) -> Fixture {
    let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default()).unwrap();
    let embeddings = EmbeddingTable::compute(&snapshot, &HashingEmbedder::default()).unwrap();
    Fixture {
        snapshot,
        tables,
        embeddings,
    }
}

fn marker_fixture() -> Fixture {
    fixture(marker_corpus(11, 2400, 0.2))
}

fn marker_index(f: &Fixture) -> OutcomeIndex {
    OutcomeIndex::build(&f.snapshot, &f.tables, ImpactType::DirectPatent, 2)
}

#[test]
fn marker_token_has_its_own_hash_slot() {
    let f = marker_fixture();
    let embedder = HashingEmbedder::default();
    let slot = embedder.slot(MARKER_TOKEN).0;
    for g in f.snapshot.grants() {
        for t in tokenize(&g.abstract_text) {
            assert!(t == MARKER_TOKEN || embedder.slot(&t).0 != slot, "{t} shares the marker slot");
        }
    }
}

#[test]
fn override_lag_bounds_every_example() {
    let f = marker_fixture();
    let index = marker_index(&f);
    let y = TimeLagTable::case_one().get(ImpactType::DirectPatent).unwrap();
    assert_eq!(y, 6);
    let set = build_training_set(&f.snapshot, &index, &TopicPath::parse(MARKER_TOPIC), y, &SplitConfig::default(), 3)
        .unwrap();
    assert_eq!(set.cutoff_year, 2015);
    for e in &set.examples {
        let start = f.snapshot.grants()[e.grant].start_year();
        assert!((2000..=2015).contains(&start), "{} starts {start}", e.grant_id);
        assert_eq!(e.start_year, start);
    }
    let too_long = build_training_set(&f.snapshot, &index, &TopicPath::parse(MARKER_TOPIC), 30, &SplitConfig::default(), 3);
    assert!(matches!(too_long, Err(PredictorError::TimeLag { .. })));
}

#[test]
fn balanced_split_of_120_positives() {
    let snapshot = generate_synthetic_corpus(5, &SynthSizes::scaled(800), &PlantedStructure::default()).unwrap();
    let topic = TopicPath::parse("X/Y");
    let eligible: Vec<usize> = (0..snapshot.grants().len())
        .filter(|&g| snapshot.grants()[g].start_year() <= 2015)
        .collect();
    assert!(eligible.len() > 240);
    let mut outcomes = vec![Vec::new(); snapshot.grants().len()];
    for &g in eligible.iter().take(120) {
        outcomes[g].push(RealizedOutcome {
            topic: topic.clone(),
            year: 2016,
        });
    }
    // recent grants with outcomes must never leak into the set
    for g in (0..snapshot.grants().len()).filter(|&g| snapshot.grants()[g].start_year() > 2015) {
        outcomes[g].push(RealizedOutcome {
            topic: topic.clone(),
            year: 2021,
        });
    }
    let index = OutcomeIndex {
        impact: ImpactType::DirectPatent,
        topic_level: 2,
        outcomes,
    };
    for seed in 0..5 {
        let set = build_training_set(&snapshot, &index, &topic, 6, &SplitConfig::default(), seed).unwrap();
        assert_eq!((set.positives(), set.negatives()), (120, 120));
        assert_eq!((set.train.len(), set.test.len()), (192, 48));
        let train: BTreeSet<usize> = set.train.iter().copied().collect();
        assert!(set.test.iter().all(|k| !train.contains(k)));
        let pos_train = set.train.iter().filter(|&&k| set.examples[k].label).count();
        let pos_test = set.test.iter().filter(|&&k| set.examples[k].label).count();
        assert_eq!((pos_train, pos_test), (96, 24));
        let grants: BTreeSet<usize> = set.examples.iter().map(|e| e.grant).collect();
        assert_eq!(grants.len(), 240);
        assert!(set.examples.iter().all(|e| e.start_year <= 2015));
        let again = build_training_set(&snapshot, &index, &topic, 6, &SplitConfig::default(), seed).unwrap();
        assert_eq!(set, again);
    }
}

#[test]
fn no_positives_cannot_train() {
    let f = marker_fixture();
    let index = marker_index(&f);
    let r = build_training_set(&f.snapshot, &index, &TopicPath::parse("Z99/Z99Z"), 6, &SplitConfig::default(), 0);
    assert!(matches!(r, Err(PredictorError::CannotTrain { .. })));
}

#[test]
fn topic_selection_matches_greedy_oracle() {
    for seed in 0..8 {
        let snapshot =
            generate_synthetic_corpus(seed, &SynthSizes::scaled(600), &PlantedStructure::default()).unwrap();
        let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default()).unwrap();
        let index = OutcomeIndex::build(&snapshot, &tables, ImpactType::DirectPatent, 2);
        let cutoff = 2015;
        let grants = snapshot.grants();
        let members = index.topic_members(|g| grants[g].start_year() <= cutoff);
        for (coverage, min_positives) in [(0.8, 10), (0.5, 5), (0.95, 1), (0.8, 1000)] {
            let got: Vec<String> =
                select_topics(&members, coverage, min_positives).iter().map(|c| c.topic.to_string()).collect();
            let want = greedy_topics(&direct_patent_topics(snapshot.data(), 2, cutoff), coverage, min_positives);
            assert_eq!(got, want, "seed {seed} coverage {coverage} min {min_positives}");
        }
    }
}

#[test]
fn marker_topic_model_ranks_marked_grants_first() {
    let f = marker_fixture();
    let index = marker_index(&f);
    let set = build_training_set(&f.snapshot, &index, &TopicPath::parse(MARKER_TOPIC), 6, &SplitConfig::default(), 7)
        .unwrap();
    assert!(set.positives() >= 300, "only {} positives", set.positives());
    let model = train_topic_model(&set, &f.embeddings, &BoostedStumps::default(), 7).unwrap();
    let auc = model.record.test_auc.unwrap();
    assert!(auc >= 0.90, "test AUC {auc}");
    assert!((0.0..=1.0).contains(&auc));
    assert_eq!(model.record.metadata.y, 6);
    assert_eq!(model.record.metadata.positives, set.positives());
}

#[test]
fn shuffled_labels_score_near_chance() {
    let f = marker_fixture();
    let index = marker_index(&f);
    let mut set =
        build_training_set(&f.snapshot, &index, &TopicPath::parse(MARKER_TOPIC), 6, &SplitConfig::default(), 7)
            .unwrap();
    let mut labels: Vec<bool> = set.examples.iter().map(|e| e.label).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(99));
    for (e, l) in set.examples.iter_mut().zip(labels) {
        e.label = l;
    }
    let model = train_topic_model(&set, &f.embeddings, &BoostedStumps::default(), 7).unwrap();
    let auc = model.record.test_auc.unwrap();
    assert!((0.35..=0.65).contains(&auc), "control AUC {auc}");
}

#[test]
fn same_seed_same_blob() {
    let f = marker_fixture();
    let index = marker_index(&f);
    let topic = TopicPath::parse(MARKER_TOPIC);
    let set = build_training_set(&f.snapshot, &index, &topic, 6, &SplitConfig::default(), 1).unwrap();
    let stumps = BoostedStumps {
        feature_fraction: 0.5,
        rounds: 40,
        ..BoostedStumps::default()
    };
    let a = train_topic_model(&set, &f.embeddings, &stumps, 42).unwrap();
    let b = train_topic_model(&set, &f.embeddings, &stumps, 42).unwrap();
    assert_eq!(a.record.blob_sha256, b.record.blob_sha256);
    assert_eq!(a.blob, b.blob);
}

#[test]
fn separable_embeddings_are_learned() {
    let (rows, labels) = planted_separation(3, 400, 768);
    let x: Vec<&[f32]> = rows.iter().map(Vec::as_slice).collect();
    let stumps = BoostedStumps {
        rounds: 400,
        learning_rate: 0.3,
        ..BoostedStumps::default()
    };
    let model = stumps.train(&x, &labels, 0).unwrap();
    let correct = x.iter().zip(&labels).filter(|(r, &l)| (model.score(r).unwrap() > 0.5) == l).count();
    let accuracy = correct as f64 / x.len() as f64;
    assert!(accuracy >= 0.95, "training accuracy {accuracy}");
}

#[test]
fn auc_formulations_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for case in 0..100 {
        let n = rng.random_range(2..200);
        let mut scored: Vec<(f64, bool)> = (0..n)
            .map(|_| {
                // coarse scores force ties
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
        let mw = evaluate_auc(&scored).unwrap();
        let trap = roc_auc_trapezoid(&scored).unwrap();
        let (scores, labels): (Vec<f64>, Vec<bool>) = scored.iter().copied().unzip();
        let brute = pairwise_auc(&scores, &labels).unwrap();
        assert!((mw - trap).abs() <= 1e-9, "case {case}: {mw} vs {trap}");
        assert!((mw - brute).abs() <= 1e-12, "case {case}: {mw} vs {brute}");
        for transform in [|s: f64| 3.0 * s + 1.0, |s: f64| s.exp(), |s: f64| (s - 0.5).atan()] {
            let moved: Vec<(f64, bool)> = scored.iter().map(|&(s, l)| (transform(s), l)).collect();
            assert_eq!(evaluate_auc(&moved).unwrap(), mw, "case {case}");
        }
    }
}

#[test]
fn disjoint_vocabularies_are_nearly_orthogonal() {
    let embedder = HashingEmbedder::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let a: Vec<String> = (0..40).map(|_| format!("alpha{}", rng.random_range(0..500))).collect();
        let b: Vec<String> = (0..40).map(|_| format!("beta{}", rng.random_range(0..500))).collect();
        let va = embedder.embed(&a.join(" ")).unwrap();
        let vb = embedder.embed(&b.join(" ")).unwrap();
        let sim = cosine(&va, &vb);
        assert!(sim.abs() <= 0.15, "cosine {sim}");
    }
}

#[test]
fn embedding_cache_round_trips() {
    let f = fixture(generate_synthetic_corpus(2, &SynthSizes::scaled(60), &PlantedStructure::default()).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let provider = HashingEmbedder::default();
    let first = EmbeddingTable::load_or_compute(dir.path(), &f.snapshot, &provider).unwrap();
    let path = EmbeddingTable::cache_path(dir.path(), &provider.name(), f.snapshot.id());
    assert!(path.exists());
    let second = EmbeddingTable::load_or_compute(dir.path(), &f.snapshot, &provider).unwrap();
    assert_eq!(first, second);
    assert_eq!(first, f.embeddings);
}

#[test]
fn train_publish_predict_and_highlight() {
    let f = marker_fixture();
    let dir = tempfile::tempdir().unwrap();
    let registry = ModelRegistry::open(dir.path()).unwrap();
    let config = TrainConfig {
        min_positives: 10,
        time_lag: Some(TimeLagTable::case_one()),
        seed: 5,
        ..TrainConfig::default()
    };
    let summary = train_topics(&f.snapshot, &f.tables, &f.embeddings, ImpactType::DirectPatent, &config, &registry)
        .unwrap();
    assert_eq!((summary.y, summary.cutoff_year), (6, 2015));
    let marker = TopicPath::parse(MARKER_TOPIC);
    assert_eq!(summary.selected[0].topic, marker);
    assert!(summary.trained.iter().any(|r| r.topic == marker && r.version == 1));
    assert!(summary.trained.iter().all(|r| r.metadata.cutoff_year == 2015));

    // retraining appends a version with identical content
    let again = train_topics(&f.snapshot, &f.tables, &f.embeddings, ImpactType::DirectPatent, &config, &registry)
        .unwrap();
    for (a, b) in summary.trained.iter().zip(&again.trained) {
        assert_eq!((a.topic.clone(), a.version + 1, &a.blob_sha256), (b.topic.clone(), b.version, &b.blob_sha256));
    }

    let classifier = BoostedStumps::default();
    let missing = TopicPath::parse("Z99/Z99Z");
    let (models, skipped) =
        load_models(&registry, ImpactType::DirectPatent, Some(&[marker.clone(), missing.clone()]), &classifier)
            .unwrap();
    assert_eq!(models.len(), 1);
    assert_eq!(skipped[0].topic, missing);

    let grants = f.snapshot.grants();
    let report = predict_and_highlight(
        &f.snapshot,
        &f.tables,
        &f.embeddings,
        ImpactType::DirectPatent,
        &models,
        0.5,
        PiMetric::HIndex,
    )
    .unwrap();
    let recent: Vec<usize> = (0..grants.len()).filter(|&g| grants[g].start_year() > 2015).collect();
    assert_eq!(report.scores.len(), recent.len());
    assert!(report.scores.iter().all(|s| s.score.is_finite() && (0.0..=1.0).contains(&s.score)));
    let highlighted: BTreeSet<&str> = report.highlighted.iter().map(String::as_str).collect();
    for &g in &recent {
        if grants[g].abstract_text.to_lowercase().contains(MARKER_TOKEN) {
            assert!(highlighted.contains(grants[g].grant_id.as_str()), "{} not highlighted", grants[g].grant_id);
        }
    }
    assert_eq!(report.topics[0].high_score, highlighted.len());

    // PI list is exactly the investigators of highlighted grants, ranked
    let want: BTreeSet<String> = highlighted
        .iter()
        .flat_map(|id| {
            let g = f.snapshot.grant_index(id).unwrap();
            f.snapshot.forward(LinkType::GrantPi, g).iter().map(|&r| f.snapshot.researchers()[r].researcher_id.clone())
        })
        .collect();
    let got: BTreeSet<String> = report.pis.iter().map(|p| p.profile.researcher_id.clone()).collect();
    assert_eq!(got, want);
    for w in report.pis.windows(2) {
        assert!(w[0].metric_value >= w[1].metric_value);
        assert_eq!(w[0].rank + 1, w[1].rank);
    }

    let none = predict_and_highlight(
        &f.snapshot,
        &f.tables,
        &f.embeddings,
        ImpactType::DirectPatent,
        &models,
        1.0,
        PiMetric::Productivity,
    )
    .unwrap();
    assert!(none.highlighted.is_empty() && none.pis.is_empty());

    let overlay = report.overlay();
    assert_eq!(overlay.scores.len(), recent.len());
}

#[test]
fn training_sets_never_contain_recent_grants() {
    let f = marker_fixture();
    let index = marker_index(&f);
    let grants = f.snapshot.grants();
    for (impact_y, topic) in [(6, MARKER_TOPIC), (3, MARKER_TOPIC), (9, MARKER_TOPIC)] {
        let set =
            build_training_set(&f.snapshot, &index, &TopicPath::parse(topic), impact_y, &SplitConfig::default(), 0)
                .unwrap();
        let cutoff = 2021 - impact_y as i32;
        for &k in set.train.iter().chain(&set.test) {
            assert!(grants[set.examples[k].grant].start_year() <= cutoff);
        }
    }
}
