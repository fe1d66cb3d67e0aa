//! Planted corpora and references for the impact predictor.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::Datelike;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fundscape::store::{
    generate_synthetic_corpus, CorpusSnapshot, LinkType, MarkerRule, PlantedField, PlantedStructure, SnapshotData,
    SynthSizes, TopicPath,
};

/// Chosen so its hashed slot is not shared with any synthetic vocabulary word.
pub const MARKER_TOKEN: &str = "zephyrmarker";
pub const MARKER_TOPIC: &str = "G06/G06N";

/// Corpus where a share of abstracts carry [`MARKER_TOKEN`] and exactly
/// those grants acknowledge patents in [`MARKER_TOPIC`].
pub fn marker_corpus(seed: u64, grants: usize, grant_share: f64) -> CorpusSnapshot {
    let planted = PlantedStructure {
        marker: Some(MarkerRule {
            token: MARKER_TOKEN.into(),
            grant_share,
            patent_topic: TopicPath::parse(MARKER_TOPIC),
            probability: 1.0,
        }),
        ..PlantedStructure::default()
    };
    generate_synthetic_corpus(seed, &SynthSizes::scaled(grants), &planted).expect("marker corpus")
}

/// Field whose grants almost all acknowledge a patent in [`planted_corpus`].
pub const PATENT_FIELD: &str = "Physics/Optics";

/// [`marker_corpus`] plus a [`PATENT_FIELD`] with patent probability 0.95.
pub fn planted_corpus(seed: u64, grants: usize) -> CorpusSnapshot {
    let planted = PlantedStructure {
        fields: vec![PlantedField {
            field: TopicPath::parse(PATENT_FIELD),
            patent_probability: 0.95,
        }],
        marker: Some(MarkerRule {
            token: MARKER_TOKEN.into(),
            grant_share: 0.3,
            patent_topic: TopicPath::parse(MARKER_TOPIC),
            probability: 1.0,
        }),
        ..PlantedStructure::default()
    };
    generate_synthetic_corpus(seed, &SynthSizes::scaled(grants), &planted).expect("planted corpus")
}

/// Grant ids per direct-patent topic (truncated to `level`), for grants
/// starting no later than `cutoff`, read from the raw link list.
pub fn direct_patent_topics(data: &SnapshotData, level: usize, cutoff: i32) -> BTreeMap<String, BTreeSet<String>> {
    let start: HashMap<&str, i32> = data
        .grants
        .iter()
        .map(|g| (g.grant_id.as_str(), g.grant_start_date.year()))
        .collect();
    let topic: HashMap<&str, String> = data
        .docs
        .iter()
        .map(|d| {
            let t = d
                .topic_path
                .as_ref()
                .filter(|t| !t.is_empty())
                .map(|t| t.levels().iter().take(level).cloned().collect::<Vec<_>>().join("/"))
                .unwrap_or_else(|| "unclassified".into());
            (d.doc_id.as_str(), t)
        })
        .collect();
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for l in data.links.iter().filter(|l| l.link_type == LinkType::GrantPatent) {
        let year = start[l.source_id.as_str()];
        if year >= data.window.min && year <= cutoff {
            out.entry(topic[l.target_id.as_str()].clone()).or_default().insert(l.source_id.clone());
        }
    }
    out
}

/// Greedy set selection: repeatedly take the largest remaining topic until
/// the chosen topics cover more than `coverage` of all impacted grants,
/// then drop topics below `min_positives`.
pub fn greedy_topics(sets: &BTreeMap<String, BTreeSet<String>>, coverage: f64, min_positives: usize) -> Vec<String> {
    let all: BTreeSet<&String> = sets.values().flatten().collect();
    let mut left: Vec<&String> = sets.keys().collect();
    let mut chosen: Vec<&String> = Vec::new();
    let mut covered: BTreeSet<&String> = BTreeSet::new();
    while !left.is_empty() && (covered.len() as f64) <= coverage * all.len() as f64 {
        let mut best = 0;
        for i in 1..left.len() {
            let (a, b) = (sets[left[i]].len(), sets[left[best]].len());
            if a > b || (a == b && left[i] < left[best]) {
                best = i;
            }
        }
        let t = left.remove(best);
        covered.extend(sets[t].iter());
        chosen.push(t);
    }
    chosen.into_iter().filter(|t| sets[*t].len() >= min_positives).cloned().collect()
}

/// `n` rows of `dim` Gaussian-ish features; label is the sign of a planted
/// linear direction with a margin.
pub fn planted_separation(seed: u64, n: usize, dim: usize) -> (Vec<Vec<f32>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while rows.len() < n {
        let x: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z: f32 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        if z.abs() < 0.5 {
            continue;
        }
        labels.push(z > 0.0);
        rows.push(x);
    }
    (rows, labels)
}
