//! Seeded generator of desk-scale corpora with optional planted structure.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::model::*;
use super::{CorpusSnapshot, Result, SnapshotData, StoreError};

/// Exact entity counts of a synthetic corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSizes {
    pub grants: usize,
    pub papers: usize,
    pub patents: usize,
    pub clinical_trials: usize,
    pub policies: usize,
    pub newsfeeds: usize,
    pub researchers: usize,
    pub window: YearWindow,
}

impl Default for SynthSizes {
    fn default() -> Self {
        SynthSizes {
            grants: 100,
            papers: 300,
            patents: 60,
            clinical_trials: 30,
            policies: 40,
            newsfeeds: 40,
            researchers: 80,
            window: YearWindow::default(),
        }
    }
}

impl SynthSizes {
    /// Proportional sizes for a corpus of `grants` grants.
    pub fn scaled(grants: usize) -> Self {
        SynthSizes {
            grants,
            papers: grants * 3,
            patents: (grants * 3 / 5).max(1),
            clinical_trials: (grants * 3 / 10).max(1),
            policies: (grants * 2 / 5).max(1),
            newsfeeds: (grants * 2 / 5).max(1),
            researchers: (grants * 4 / 5).max(1),
            window: YearWindow::default(),
        }
    }
}

/// Every grant whose field starts with `field` acknowledges a patent with
/// probability `patent_probability`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedField {
    pub field: TopicPath,
    pub patent_probability: f64,
}

/// Grants whose abstract carries `token` acknowledge a patent in
/// `patent_topic` with probability `probability`; no other grant does.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkerRule {
    pub token: String,
    /// Fraction of grants that receive the marker token.
    pub grant_share: f64,
    pub patent_topic: TopicPath,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedStructure {
    pub fields: Vec<PlantedField>,
    pub marker: Option<MarkerRule>,
    /// Probability that a patent acknowledges some grant directly.
    pub patent_grant_rate: f64,
    /// Probability that a clinical trial acknowledges some grant directly.
    pub clinical_grant_rate: f64,
    /// Probability that a paper acknowledges at least one grant.
    pub funded_paper_rate: f64,
}

impl Default for PlantedStructure {
    fn default() -> Self {
        PlantedStructure {
            fields: Vec::new(),
            marker: None,
            patent_grant_rate: 0.35,
            clinical_grant_rate: 0.3,
            funded_paper_rate: 0.75,
        }
    }
}

impl PlantedStructure {
    fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(StoreError::Config(format!("{name} must be a probability, got {p}")))
            }
        };
        prob("patent_grant_rate", self.patent_grant_rate)?;
        prob("clinical_grant_rate", self.clinical_grant_rate)?;
        prob("funded_paper_rate", self.funded_paper_rate)?;
        for f in &self.fields {
            prob("patent_probability", f.patent_probability)?;
            if f.field.is_empty() {
                return Err(StoreError::Config("planted field path is empty".into()));
            }
        }
        if let Some(m) = &self.marker {
            prob("grant_share", m.grant_share)?;
            prob("probability", m.probability)?;
            if m.patent_topic.is_empty() || m.token.trim().is_empty() {
                return Err(StoreError::Config("marker rule needs a token and a patent topic".into()));
            }
        }
        Ok(())
    }
}

type FieldVocab = (&'static str, &'static [(&'static str, &'static [&'static str])]);

const FIELDS: &[FieldVocab] = &[
    (
        "Engineering",
        &[
            ("Robotics", &["robot", "actuator", "manipulator", "locomotion", "gripper", "autonomy"]),
            ("Materials", &["alloy", "polymer", "composite", "ceramic", "fatigue", "coating"]),
            ("Electronics", &["circuit", "transistor", "semiconductor", "sensor", "wafer", "voltage"]),
        ],
    ),
    (
        "Biomedical",
        &[
            ("Oncology", &["tumor", "cancer", "metastasis", "chemotherapy", "oncogene", "biopsy"]),
            ("Neuroscience", &["neuron", "synapse", "cortex", "cognition", "dopamine", "plasticity"]),
            ("Immunology", &["antibody", "vaccine", "cytokine", "antigen", "lymphocyte", "immunity"]),
        ],
    ),
    (
        "Computing",
        &[
            ("Machine Learning", &["learning", "neural", "classifier", "training", "gradient", "inference"]),
            ("Visualization", &["visual", "interactive", "glyph", "layout", "rendering", "dashboard"]),
            ("Networks", &["routing", "protocol", "bandwidth", "wireless", "packet", "latency"]),
        ],
    ),
    (
        "Environment",
        &[
            ("Climate", &["climate", "warming", "carbon", "emission", "atmosphere", "drought"]),
            ("Ecology", &["species", "habitat", "biodiversity", "predator", "ecosystem", "pollinator"]),
            ("Hydrology", &["river", "groundwater", "flood", "watershed", "rainfall", "aquifer"]),
        ],
    ),
    (
        "Physics",
        &[
            ("Optics", &["laser", "photon", "lens", "waveguide", "spectroscopy", "optical"]),
            ("Quantum", &["quantum", "qubit", "entanglement", "superposition", "decoherence", "spin"]),
            ("Condensed Matter", &["lattice", "phonon", "superconductor", "magnetism", "crystal", "topological"]),
        ],
    ),
];

const GENERIC_WORDS: &[&str] = &[
    "study", "analysis", "novel", "approach", "system", "model", "data", "results", "framework",
    "method", "impact", "design", "evaluation", "development", "structure", "dynamics", "scale",
    "performance", "mechanism", "process", "theory", "experimental", "efficient", "robust",
    "platform", "integration", "measurement", "simulation", "prediction", "discovery",
];

const CPC: &[(&str, &[&str])] = &[
    ("A61", &["A61K", "A61B", "A61P"]),
    ("G06", &["G06N", "G06F", "G06T"]),
    ("H01", &["H01L", "H01M", "H01S"]),
    ("C12", &["C12N", "C12Q"]),
    ("B25", &["B25J"]),
];

const MESH: &[(&str, &[&str])] = &[
    ("Neoplasms", &["Breast Neoplasms", "Lung Neoplasms"]),
    ("Nervous System Diseases", &["Alzheimer Disease", "Parkinson Disease"]),
    ("Infections", &["Virus Diseases", "Bacterial Infections"]),
    ("Cardiovascular Diseases", &["Hypertension", "Heart Failure"]),
];

const POLICY_CLASSES: &[(&str, &[&str])] = &[
    ("Health", &["Public Health", "Health Policy"]),
    ("Environment", &["Climate Policy", "Conservation"]),
    ("Economics", &["Innovation Policy", "Labour"]),
    ("Technology", &["Digital Policy", "Energy"]),
];

const FUNDERS: &[&str] = &["NSF-X", "NIH-Y", "DOE-Z", "ERC-W"];
const ORGS: &[&str] = &[
    "North University", "South Institute", "East College", "West Polytechnic", "Central Lab",
];
const ASSIGNEES: &[&str] = &["Acme Corp", "Globex", "Initech", "Umbrella", "Stark Industries", "Wayne Labs"];
const PHASES: &[&str] = &["Phase 1", "Phase 2", "Phase 3", "Phase 4"];
const INTERVENTIONS: &[&str] = &["Drug", "Device", "Behavioral", "Biological", "Procedure"];
const POLICY_SOURCE_TYPES: &[&str] = &["government", "IGO", "think tank"];
const POLICY_SOURCES: &[&str] = &[
    "World Health Organization", "Department of Energy", "OECD", "Brookings", "European Commission",
];
const COUNTRIES: &[&str] = &["US", "UK", "DE", "FR", "JP", "IGO"];
const OUTLETS: &[&str] = &["Daily Science", "Tech Wire", "Global News", "The Observer", "Health Today"];

fn leaves() -> Vec<(TopicPath, &'static [&'static str])> {
    FIELDS
        .iter()
        .flat_map(|(top, subs)| {
            subs.iter()
                .map(move |(sub, words)| (TopicPath::new([*top, *sub]), *words))
        })
        .collect()
}

fn two_level(table: &[(&str, &[&str])], rng: &mut ChaCha8Rng) -> TopicPath {
    let (top, subs) = table.choose(rng).expect("non-empty table");
    let sub = subs.choose(rng).expect("non-empty subs");
    TopicPath::new([*top, *sub])
}

fn words(rng: &mut ChaCha8Rng, field_words: &[&str], n: usize, field_share: f64) -> Vec<String> {
    (0..n)
        .map(|_| {
            if rng.random_bool(field_share) {
                field_words.choose(rng).expect("words")
            } else {
                GENERIC_WORDS.choose(rng).expect("words")
            }
            .to_string()
        })
        .collect()
}

fn date_in(rng: &mut ChaCha8Rng, year: i32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, rng.random_range(1..=12), rng.random_range(1..=28)).expect("valid date")
}

fn distinct(rng: &mut ChaCha8Rng, pool: usize, k: usize) -> Vec<usize> {
    let k = k.min(pool);
    let mut picked = rand::seq::index::sample(rng, pool, k).into_vec();
    picked.sort_unstable();
    picked
}

fn link(source: &str, target: &str, link_type: LinkType) -> CitationLink {
    CitationLink {
        source_id: source.to_string(),
        target_id: target.to_string(),
        link_type,
    }
}

/// Generates a referentially closed corpus. Output depends only on
/// `(seed, sizes, planted)`.
pub fn generate_synthetic_corpus(
    seed: u64,
    sizes: &SynthSizes,
    planted: &PlantedStructure,
) -> Result<CorpusSnapshot> {
    planted.validate()?;
    if sizes.grants == 0 || sizes.papers == 0 || sizes.researchers == 0 {
        return Err(StoreError::Config(
            "grants, papers and researchers must be positive".into(),
        ));
    }
    if sizes.window.is_empty() {
        return Err(StoreError::EmptyWindow(sizes.window.min, sizes.window.max));
    }
    let window = sizes.window;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leaves = leaves();
    let mut links = Vec::new();

    let researchers: Vec<ResearcherRecord> = (0..sizes.researchers)
        .map(|i| ResearcherRecord {
            researcher_id: format!("r{i:05}"),
            name: format!("Researcher {i}"),
            gender: match rng.random_range(0..6) {
                0 | 1 => Some(Gender::Female),
                2 | 3 => Some(Gender::Male),
                4 => Some(Gender::Other),
                _ => None,
            },
            first_pub_year: rng
                .random_bool(0.8)
                .then(|| rng.random_range(window.min - 20..=window.max - 3)),
            research_orgs: vec![ORGS.choose(&mut rng).expect("orgs").to_string()],
        })
        .collect();

    // grants
    let marker = planted.marker.as_ref();
    let mut grants = Vec::with_capacity(sizes.grants);
    let mut grant_leaf = Vec::with_capacity(sizes.grants);
    let mut marked = Vec::with_capacity(sizes.grants);
    for i in 0..sizes.grants {
        let leaf = rng.random_range(0..leaves.len());
        let (field_path, vocab) = &leaves[leaf];
        let year = rng.random_range(window.min..=window.max);
        let start = date_in(&mut rng, year);
        let duration = rng.random_range(1..=5);
        let end = date_in(&mut rng, year + duration);
        let title_len = rng.random_range(3..=6);
        let title = words(&mut rng, vocab, title_len, 0.7).join(" ");
        let abstract_len = rng.random_range(30..=60);
        let mut abstract_words = words(&mut rng, vocab, abstract_len, 0.6);
        let has_marker = marker.is_some_and(|m| rng.random_bool(m.grant_share));
        if let (true, Some(m)) = (has_marker, marker) {
            let at = rng.random_range(0..=abstract_words.len());
            abstract_words.insert(at, m.token.clone());
        }
        let n_inv = rng.random_range(1..=3);
        let investigator_ids: Vec<String> = distinct(&mut rng, researchers.len(), n_inv)
            .into_iter()
            .map(|r| researchers[r].researcher_id.clone())
            .collect();
        let amount = (10f64.powf(rng.random_range(4.7..6.7)) / 100.0).round() * 100.0;
        let grant = GrantRecord {
            grant_id: format!("g{i:05}"),
            title: capitalize(&title),
            abstract_text: capitalize(&abstract_words.join(" ")) + ".",
            funding_amount: amount,
            funder_org: FUNDERS.choose(&mut rng).expect("funders").to_string(),
            research_orgs: vec![ORGS.choose(&mut rng).expect("orgs").to_string()],
            grant_start_date: start,
            grant_end_date: end,
            investigator_ids,
            field_path: field_path.clone(),
        };
        for r in &grant.investigator_ids {
            links.push(link(&grant.grant_id, r, LinkType::GrantPi));
        }
        grants.push(grant);
        grant_leaf.push(leaf);
        marked.push(has_marker);
    }

    // papers, ordered by year so citations point backwards in time
    let mut paper_years: Vec<i32> = (0..sizes.papers)
        .map(|_| rng.random_range(window.min..=window.max))
        .collect();
    paper_years.sort_unstable();
    let mut papers = Vec::with_capacity(sizes.papers);
    let mut funders_of_paper: Vec<Vec<usize>> = Vec::with_capacity(sizes.papers);
    for (i, &year) in paper_years.iter().enumerate() {
        let mut funding = Vec::new();
        if rng.random_bool(planted.funded_paper_rate) {
            let wanted = if rng.random_bool(0.2) { 2 } else { 1 };
            for _ in 0..8 {
                let g = rng.random_range(0..grants.len());
                if grants[g].start_year() <= year && !funding.contains(&g) {
                    funding.push(g);
                    if funding.len() == wanted {
                        break;
                    }
                }
            }
        }
        let leaf = funding.first().map_or_else(|| rng.random_range(0..leaves.len()), |&g| grant_leaf[g]);
        let (field_path, vocab) = &leaves[leaf];
        let n_auth = rng.random_range(1..=4);
        let mut authors: BTreeSet<String> = distinct(&mut rng, researchers.len(), n_auth)
            .into_iter()
            .map(|r| researchers[r].researcher_id.clone())
            .collect();
        if let Some(&g) = funding.first() {
            if rng.random_bool(0.7) {
                let pi = grants[g].investigator_ids.choose(&mut rng).expect("investigators");
                authors.insert(pi.clone());
            }
        }
        let title_len = rng.random_range(4..=8);
        let paper = PaperRecord {
            paper_id: format!("p{i:06}"),
            title: capitalize(&words(&mut rng, vocab, title_len, 0.6).join(" ")),
            publication_year: year,
            field_path: field_path.clone(),
            citation_count: 0,
            c10: 0,
            author_ids: authors.into_iter().collect(),
        };
        for &g in &funding {
            links.push(link(&grants[g].grant_id, &paper.paper_id, LinkType::GrantPaper));
        }
        for a in &paper.author_ids {
            links.push(link(&paper.paper_id, a, LinkType::PaperAuthor));
        }
        papers.push(paper);
        funders_of_paper.push(funding);
    }

    // paper -> paper citations (citing paper strictly later in the order)
    let mut citers: Vec<Vec<usize>> = vec![Vec::new(); papers.len()];
    for i in 1..papers.len() {
        let k = rng.random_range(0..=4);
        for j in distinct(&mut rng, i, k) {
            citers[j].push(i);
            links.push(link(&papers[i].paper_id, &papers[j].paper_id, LinkType::PaperPaper));
        }
    }
    for (j, paper) in papers.iter_mut().enumerate() {
        let u: f64 = rng.random_range(0.0..1.0);
        let external = ((1.0 / (1.0 - 0.98 * u)).powf(1.1) - 1.0).floor() as u64;
        let within: u64 = citers[j]
            .iter()
            .filter(|&&c| paper_years[c] - paper.publication_year < 10)
            .count() as u64;
        paper.citation_count = citers[j].len() as u64 + external;
        paper.c10 = within + (external as f64 * rng.random_range(0.5..1.0)).floor() as u64;
    }

    // impact documents
    let mut docs = Vec::new();
    let marker_topic_share = 0.3;
    for i in 0..sizes.patents {
        let topic = match marker {
            Some(m) if rng.random_bool(marker_topic_share) => m.patent_topic.clone(),
            _ => two_level(CPC, &mut rng),
        };
        let vocab = leaves[rng.random_range(0..leaves.len())].1;
        let title_len = rng.random_range(3..=6);
        docs.push(ImpactDocRecord {
            doc_id: format!("pt{i:05}"),
            doc_type: DocType::Patent,
            title: capitalize(&words(&mut rng, vocab, title_len, 0.7).join(" ")),
            year: rng.random_range(window.min..=window.max),
            topic_path: Some(topic),
            attributes: BTreeMap::from([(
                "assignee_org".to_string(),
                json!(ASSIGNEES.choose(&mut rng).expect("assignees")),
            )]),
        });
    }
    for i in 0..sizes.clinical_trials {
        let n = rng.random_range(1..=2);
        let interventions: Vec<&str> = distinct(&mut rng, INTERVENTIONS.len(), n)
            .into_iter()
            .map(|k| INTERVENTIONS[k])
            .collect();
        let vocab = leaves[rng.random_range(3..6)].1;
        let title_len = rng.random_range(3..=6);
        docs.push(ImpactDocRecord {
            doc_id: format!("ct{i:05}"),
            doc_type: DocType::ClinicalTrial,
            title: capitalize(&words(&mut rng, vocab, title_len, 0.7).join(" ")),
            year: rng.random_range(window.min..=window.max),
            topic_path: Some(two_level(MESH, &mut rng)),
            attributes: BTreeMap::from([
                ("phase".to_string(), json!(PHASES.choose(&mut rng).expect("phases"))),
                ("interventions".to_string(), json!(interventions)),
            ]),
        });
    }
    for i in 0..sizes.policies {
        let vocab = leaves[rng.random_range(0..leaves.len())].1;
        let title_len = rng.random_range(3..=6);
        docs.push(ImpactDocRecord {
            doc_id: format!("po{i:05}"),
            doc_type: DocType::Policy,
            title: capitalize(&words(&mut rng, vocab, title_len, 0.5).join(" ")),
            year: rng.random_range(window.min..=window.max),
            topic_path: Some(two_level(POLICY_CLASSES, &mut rng)),
            attributes: BTreeMap::from([
                ("source_type".to_string(), json!(POLICY_SOURCE_TYPES.choose(&mut rng).expect("types"))),
                ("source_title".to_string(), json!(POLICY_SOURCES.choose(&mut rng).expect("sources"))),
                ("source_country".to_string(), json!(COUNTRIES.choose(&mut rng).expect("countries"))),
            ]),
        });
    }
    for i in 0..sizes.newsfeeds {
        let vocab = leaves[rng.random_range(0..leaves.len())].1;
        let title_len = rng.random_range(4..=8);
        docs.push(ImpactDocRecord {
            doc_id: format!("nf{i:05}"),
            doc_type: DocType::Newsfeed,
            title: capitalize(&words(&mut rng, vocab, title_len, 0.5).join(" ")),
            year: rng.random_range(window.min..=window.max),
            topic_path: None,
            attributes: BTreeMap::from([
                ("outlet".to_string(), json!(OUTLETS.choose(&mut rng).expect("outlets"))),
                ("country".to_string(), json!(COUNTRIES[..5].choose(&mut rng).expect("countries"))),
            ]),
        });
    }

    let patents: Vec<usize> = (0..sizes.patents).collect();
    let trials: Vec<usize> = (sizes.patents..sizes.patents + sizes.clinical_trials).collect();
    let in_marker_topic = |d: &ImpactDocRecord| {
        marker.is_some_and(|m| d.topic_path.as_ref().is_some_and(|t| t.starts_with(&m.patent_topic)))
    };

    // background direct links; marker-topic patents are reserved for marked grants
    let mut direct: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (pool, rate) in [(&patents, planted.patent_grant_rate), (&trials, planted.clinical_grant_rate)] {
        for &d in pool.iter() {
            if in_marker_topic(&docs[d]) || !rng.random_bool(rate) {
                continue;
            }
            let year = docs[d].year;
            for _ in 0..8 {
                let g = rng.random_range(0..grants.len());
                if grants[g].start_year() <= year && !marked[g] {
                    direct.insert((g, d));
                    break;
                }
            }
        }
    }

    let pick_patent = |rng: &mut ChaCha8Rng, start: i32, want_topic: Option<&TopicPath>| -> Option<usize> {
        let topical: Vec<usize> = patents
            .iter()
            .copied()
            .filter(|&d| match want_topic {
                Some(t) => docs[d].topic_path.as_ref().is_some_and(|p| p.starts_with(t)),
                None => !in_marker_topic(&docs[d]),
            })
            .collect();
        let timely: Vec<usize> = topical.iter().copied().filter(|&d| docs[d].year >= start).collect();
        timely
            .choose(rng)
            .or_else(|| topical.iter().max_by_key(|&&d| (docs[d].year, d)))
            .copied()
    };
    for field in &planted.fields {
        for (g, grant) in grants.iter().enumerate() {
            if grant.field_path.starts_with(&field.field) && rng.random_bool(field.patent_probability) {
                if let Some(d) = pick_patent(&mut rng, grant.start_year(), None) {
                    direct.insert((g, d));
                }
            }
        }
    }
    if let Some(m) = marker {
        for g in 0..grants.len() {
            if marked[g] && rng.random_bool(m.probability) {
                if let Some(d) = pick_patent(&mut rng, grants[g].start_year(), Some(&m.patent_topic)) {
                    direct.insert((g, d));
                }
            }
        }
    }
    for (g, d) in direct {
        let link_type = match docs[d].doc_type {
            DocType::Patent => LinkType::GrantPatent,
            _ => LinkType::GrantClinical,
        };
        links.push(link(&grants[g].grant_id, &docs[d].doc_id, link_type));
    }

    // broader links: documents cite earlier papers
    for d in docs.iter() {
        let (lo, hi) = match d.doc_type {
            DocType::Patent => (0, 3),
            DocType::ClinicalTrial => (0, 3),
            DocType::Policy => (1, 3),
            DocType::Newsfeed => (1, 2),
        };
        let eligible = paper_years.partition_point(|&y| y <= d.year);
        if eligible == 0 {
            continue;
        }
        let k = rng.random_range(lo..=hi);
        for p in distinct(&mut rng, eligible, k) {
            links.push(link(&papers[p].paper_id, &d.doc_id, LinkType::broad_for(d.doc_type)));
        }
    }

    let mut shuffled = links;
    shuffled.shuffle(&mut rng);
    CorpusSnapshot::from_data(SnapshotData {
        window,
        grants,
        papers,
        docs,
        researchers,
        links: shuffled,
    })
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Leaf field paths of the built-in taxonomy.
pub fn taxonomy_leaves() -> Vec<TopicPath> {
    leaves().into_iter().map(|(p, _)| p).collect()
}
