use fundscape::metrics::{
    aggregate_impact, disruption_counts, h_index, pi_profile, AggregationLevel, ImpactTables, ImpactType, ImpactVector,
    MetricsConfig,
};
use fundscape::store::{
    generate_synthetic_corpus, linked_documents, CorpusSnapshot, DocType, ImpactMode, LinkType, OutcomeKind,
    PlantedStructure, SynthSizes,
};
use fundscape_testkit::{oracles, random_corpus};
use proptest::prelude::*;

fn corpora() -> impl Iterator<Item = CorpusSnapshot> {
    (0..25u64).map(|s| random_corpus(s, 200)).chain((0..25u64).map(|s| {
        let sizes = SynthSizes::scaled(20 + 7 * s as usize);
        generate_synthetic_corpus(1000 + s, &sizes, &PlantedStructure::default()).unwrap()
    }))
}

fn vector_array(v: &ImpactVector) -> [u64; 9] {
    ImpactType::ALL.map(|t| v.get(t))
}

#[test]
fn disruption_matches_set_oracle() {
    for snap in corpora() {
        for p in snap.papers() {
            let c = disruption_counts(&snap, &p.paper_id).unwrap();
            assert_eq!((c.n_i, c.n_j, c.n_k), oracles::disruption_counts(snap.data(), &p.paper_id));
        }
    }
}

#[test]
fn paper_flags_match_oracles() {
    for snap in corpora() {
        let tables = ImpactTables::compute(&snap, &MetricsConfig::default()).unwrap();
        let hit = oracles::hit_flags(snap.data(), 1, 20, 1);
        let disruptive = oracles::disruptive_flags(snap.data(), 1, 20);
        for (i, p) in snap.papers().iter().enumerate() {
            assert_eq!(tables.hit[i], hit[&p.paper_id], "hit flag of {}", p.paper_id);
            assert_eq!(tables.disruptive[i], disruptive[&p.paper_id], "disruptive flag of {}", p.paper_id);
            assert_eq!(tables.disruption[i], oracles::disruption_index(snap.data(), &p.paper_id));
        }
    }
}

#[test]
fn grant_impact_matches_two_hop_oracle() {
    for snap in corpora() {
        let tables = ImpactTables::compute(&snap, &MetricsConfig::default()).unwrap();
        let hit = oracles::hit_flags(snap.data(), 1, 20, 1);
        let disruptive = oracles::disruptive_flags(snap.data(), 1, 20);
        for g in snap.grants() {
            let v = tables.grant_impact(&snap, &g.grant_id).unwrap();
            assert_eq!(vector_array(&v), oracles::grant_impact(snap.data(), &g.grant_id, &hit, &disruptive));
        }
    }
}

#[test]
fn broad_multisets_match_oracle() {
    for snap in corpora() {
        for g in snap.grants() {
            for t in DocType::ALL {
                let mut got: Vec<(String, String)> =
                    linked_documents(&snap, &[&g.grant_id], OutcomeKind::from(t), ImpactMode::Broad, false)
                        .unwrap()
                        .into_iter()
                        .map(|c| (c.paper_id.unwrap().to_string(), c.doc_id.to_string()))
                        .collect();
                got.sort();
                assert_eq!(got, oracles::broad_chains(snap.data(), &g.grant_id, t));
            }
        }
    }
}

#[test]
fn pi_profiles_match_oracle() {
    for snap in corpora().take(10) {
        let tables = ImpactTables::compute(&snap, &MetricsConfig::default()).unwrap();
        for r in snap.researchers() {
            let prof = pi_profile(&snap, &tables, &r.researcher_id, 2021).unwrap();
            let cites: Vec<u64> = snap
                .links()
                .iter()
                .filter(|l| l.link_type == LinkType::PaperAuthor && l.target_id == r.researcher_id)
                .map(|l| snap.paper(&l.source_id).unwrap().citation_count)
                .collect();
            assert_eq!(prof.h_index, oracles::h_index(&cites));
            assert_eq!(prof.productivity, cites.len() as u64);
            assert!(prof.h_index <= prof.productivity);
        }
    }
}

#[test]
fn aggregation_equals_recomputation() {
    for snap in corpora().take(10) {
        let tables = ImpactTables::compute(&snap, &MetricsConfig::default()).unwrap();
        for level in [AggregationLevel::Agency, AggregationLevel::Field { depth: 1 }, AggregationLevel::Field { depth: 2 }] {
            let groups = aggregate_impact(&snap, &tables, level).unwrap();
            assert_eq!(groups.iter().map(|g| g.grant_count).sum::<u64>(), snap.grants().len() as u64);
            let total: ImpactVector = groups.iter().map(|g| g.impact).sum();
            assert_eq!(total, tables.grants.iter().sum::<ImpactVector>());
            for group in &groups {
                let members: Vec<&str> = snap
                    .grants()
                    .iter()
                    .filter(|g| match level {
                        AggregationLevel::Agency => g.funder_org == group.group,
                        AggregationLevel::Field { depth } => g.field_path.truncate(depth).to_string() == group.group,
                        AggregationLevel::Pi => unreachable!(),
                    })
                    .map(|g| g.grant_id.as_str())
                    .collect();
                let expected: ImpactVector =
                    members.iter().map(|id| tables.grant_impact(&snap, id).unwrap()).sum();
                assert_eq!(group.impact, expected);
            }
        }
    }
}

#[test]
fn whole_corpus_rii_is_one() {
    for snap in corpora().take(10) {
        let tables = ImpactTables::compute(&snap, &MetricsConfig::default()).unwrap();
        let all: Vec<usize> = (0..snap.grants().len()).collect();
        let row = tables.rii_row(&all).unwrap();
        let global = tables.global_incidence();
        for t in ImpactType::ALL {
            match global.count(t) {
                0 => assert_eq!(row[&t], None),
                _ => assert_eq!(row[&t], Some(1.0)),
            }
        }
    }
}

proptest! {
    #[test]
    fn h_index_agrees_with_exhaustive(c in proptest::collection::vec(0u64..40, 0..60)) {
        prop_assert_eq!(h_index(&c), oracles::h_index(&c));
    }
}
