use std::collections::BTreeMap;

use chrono::NaiveDate;
use fundscape::store::{
    CitationLink, CorpusSnapshot, DocType, GrantRecord, ImpactDocRecord, LinkType, PaperRecord, ResearcherRecord,
    SnapshotData, TopicPath, YearWindow,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIELDS: [&str; 6] = ["A/a1", "A/a2", "B/b1", "B/b2", "C/c1", "D"];
const FUNDERS: [&str; 3] = ["F1", "F2", "F3"];

/// A dense random corpus with at most `max_grants` grants. Citation
/// counts are drawn from a narrow range so that ties are common, and the
/// citation graph contains mutual citations.
pub fn random_corpus(seed: u64, max_grants: usize) -> CorpusSnapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_grants = rng.random_range(1..=max_grants.max(1));
    let n_papers = rng.random_range(1..=150);
    let n_researchers = rng.random_range(1..=40);
    let window = YearWindow { min: 2000, max: 2021 };

    let grants: Vec<GrantRecord> = (0..n_grants)
        .map(|i| {
            let year = rng.random_range(2000..=2018);
            GrantRecord {
                grant_id: format!("g{i:04}"),
                title: format!("grant {i}"),
                abstract_text: String::new(),
                funding_amount: rng.random_range(1..1000) as f64 * 1e3,
                funder_org: FUNDERS[rng.random_range(0..FUNDERS.len())].to_string(),
                research_orgs: vec![],
                grant_start_date: NaiveDate::from_ymd_opt(year, 1, 1).unwrap(),
                grant_end_date: NaiveDate::from_ymd_opt(year + 3, 1, 1).unwrap(),
                investigator_ids: vec![],
                field_path: TopicPath::parse(FIELDS[rng.random_range(0..FIELDS.len())]),
            }
        })
        .collect();
    let papers: Vec<PaperRecord> = (0..n_papers)
        .map(|i| {
            let citation_count = rng.random_range(0..12);
            PaperRecord {
                paper_id: format!("p{i:04}"),
                title: format!("paper {i}"),
                publication_year: rng.random_range(2005..=2008),
                field_path: TopicPath::parse(FIELDS[rng.random_range(0..FIELDS.len())]),
                citation_count,
                c10: rng.random_range(0..=citation_count),
                author_ids: vec![],
            }
        })
        .collect();
    let mut docs = Vec::new();
    for doc_type in DocType::ALL {
        for i in 0..rng.random_range(0..30) {
            let attributes: BTreeMap<String, serde_json::Value> = doc_type
                .required_attributes()
                .iter()
                .map(|k| (k.to_string(), serde_json::json!(format!("{k}-{}", i % 3))))
                .collect();
            docs.push(ImpactDocRecord {
                doc_id: format!("{}{i:04}", doc_type.as_str()),
                doc_type,
                title: format!("{} {i}", doc_type.as_str()),
                year: rng.random_range(2005..=2021),
                topic_path: (doc_type != DocType::Newsfeed).then(|| TopicPath::parse("X/Y")),
                attributes,
            });
        }
    }
    let researchers: Vec<ResearcherRecord> = (0..n_researchers)
        .map(|i| ResearcherRecord {
            researcher_id: format!("r{i:04}"),
            name: format!("researcher {i}"),
            gender: None,
            first_pub_year: rng.random_bool(0.7).then(|| rng.random_range(1980..2015)),
            research_orgs: vec![],
        })
        .collect();

    let mut links = Vec::new();
    let mut push = |s: &str, t: &str, link_type: LinkType| {
        links.push(CitationLink {
            source_id: s.to_string(),
            target_id: t.to_string(),
            link_type,
        })
    };
    let docs_of = |t: DocType| -> Vec<&ImpactDocRecord> { docs.iter().filter(|d| d.doc_type == t).collect() };
    let patents = docs_of(DocType::Patent);
    let trials = docs_of(DocType::ClinicalTrial);
    for g in &grants {
        for _ in 0..rng.random_range(0..6) {
            push(&g.grant_id, &papers[rng.random_range(0..n_papers)].paper_id, LinkType::GrantPaper);
        }
        for (pool, link) in [(&patents, LinkType::GrantPatent), (&trials, LinkType::GrantClinical)] {
            if !pool.is_empty() && rng.random_bool(0.3) {
                push(&g.grant_id, &pool[rng.random_range(0..pool.len())].doc_id, link);
            }
        }
        for _ in 0..rng.random_range(0..3) {
            push(
                &g.grant_id,
                &researchers[rng.random_range(0..n_researchers)].researcher_id,
                LinkType::GrantPi,
            );
        }
    }
    let citation_density = rng.random_range(0.0..0.08);
    for citing in &papers {
        for cited in &papers {
            if citing.paper_id != cited.paper_id && rng.random_bool(citation_density) {
                push(&citing.paper_id, &cited.paper_id, LinkType::PaperPaper);
            }
        }
        for _ in 0..rng.random_range(1..4) {
            push(
                &citing.paper_id,
                &researchers[rng.random_range(0..n_researchers)].researcher_id,
                LinkType::PaperAuthor,
            );
        }
    }
    for d in &docs {
        let link = LinkType::broad_for(d.doc_type);
        for _ in 0..rng.random_range(0..4) {
            push(&papers[rng.random_range(0..n_papers)].paper_id, &d.doc_id, link);
        }
    }

    CorpusSnapshot::from_data(SnapshotData {
        window,
        grants,
        papers,
        docs,
        researchers,
        links,
    })
    .expect("random corpus is closed")
}
