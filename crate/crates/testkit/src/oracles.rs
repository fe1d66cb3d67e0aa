//! Brute-force references. Every function here reads only the raw records
//! and link list of a snapshot, never its adjacency index.

use std::collections::{BTreeMap, HashMap, HashSet};

use fundscape::store::{DocType, LinkType, SnapshotData};

fn pairs(data: &SnapshotData, link_type: LinkType) -> Vec<(&str, &str)> {
    data.links
        .iter()
        .filter(|l| l.link_type == link_type)
        .map(|l| (l.source_id.as_str(), l.target_id.as_str()))
        .collect()
}

/// `(n_i, n_j, n_k)` by set membership over the whole citation list.
pub fn disruption_counts(data: &SnapshotData, focal: &str) -> (u64, u64, u64) {
    let cites = pairs(data, LinkType::PaperPaper);
    let refs: HashSet<&str> = cites.iter().filter(|(s, _)| *s == focal).map(|(_, t)| *t).collect();
    let citers: HashSet<&str> = cites.iter().filter(|(_, t)| *t == focal).map(|(s, _)| *s).collect();
    let cites_any_ref = |c: &str| cites.iter().any(|(s, t)| *s == c && refs.contains(t));
    let n_j = citers.iter().filter(|c| cites_any_ref(c)).count() as u64;
    let n_i = citers.len() as u64 - n_j;
    let n_k = refs
        .iter()
        .filter(|r| !cites.iter().any(|(s, t)| t == *r && citers.contains(s)))
        .count() as u64;
    (n_i, n_j, n_k)
}

pub fn disruption_index(data: &SnapshotData, focal: &str) -> Option<f64> {
    let (i, j, k) = disruption_counts(data, focal);
    if i + j + k == 0 {
        None
    } else {
        Some((i as f64 - j as f64) / (i + j + k) as f64)
    }
}

/// Hit flags per paper id for a top share of `num / den`, using exact
/// integer arithmetic: a paper is a hit when its count exceeds both the
/// order statistic at the floor position of the quantile and reaches the
/// next one.
pub fn hit_flags(data: &SnapshotData, num: u64, den: u64, field_level: usize) -> HashMap<String, bool> {
    let mut groups: BTreeMap<(String, i32), Vec<u64>> = BTreeMap::new();
    let key = |p: &fundscape::store::PaperRecord| {
        let levels: Vec<&str> = p.field_path.levels().iter().take(field_level).map(String::as_str).collect();
        (levels.join("/"), p.publication_year)
    };
    for p in &data.papers {
        groups.entry(key(p)).or_default().push(p.citation_count);
    }
    for v in groups.values_mut() {
        v.sort_unstable();
    }
    data.papers
        .iter()
        .map(|p| {
            let sorted = &groups[&key(p)];
            let n = sorted.len() as u64;
            let flag = n >= 2 && {
                let lo = ((n - 1) * (den - num) / den) as usize;
                let hi = (lo + 1).min(sorted.len() - 1);
                p.citation_count > sorted[lo] && p.citation_count >= sorted[hi]
            };
            (p.paper_id.clone(), flag)
        })
        .collect()
}

/// Disruptive flags: the `ceil(num * n / den)` papers with the highest
/// defined index, ties broken by ascending id.
pub fn disruptive_flags(data: &SnapshotData, num: u64, den: u64) -> HashMap<String, bool> {
    let mut ranked: Vec<(f64, &str)> = data
        .papers
        .iter()
        .filter_map(|p| disruption_index(data, &p.paper_id).map(|d| (d, p.paper_id.as_str())))
        .collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(b.1)));
    let k = (num * ranked.len() as u64).div_ceil(den) as usize;
    let top: HashSet<&str> = ranked.iter().take(k).map(|(_, id)| *id).collect();
    data.papers
        .iter()
        .map(|p| (p.paper_id.clone(), top.contains(p.paper_id.as_str())))
        .collect()
}

/// Two-hop multiset of `doc_type` documents reached from `grant` through
/// its funded papers, as `(paper_id, doc_id)` chains.
pub fn broad_chains(data: &SnapshotData, grant: &str, doc_type: DocType) -> Vec<(String, String)> {
    let funded: Vec<&str> = pairs(data, LinkType::GrantPaper)
        .into_iter()
        .filter(|(g, _)| *g == grant)
        .map(|(_, p)| p)
        .collect();
    let mut out = Vec::new();
    for (p, d) in pairs(data, LinkType::broad_for(doc_type)) {
        for f in &funded {
            if *f == p {
                out.push((p.to_string(), d.to_string()));
            }
        }
    }
    out.sort();
    out
}

/// The nine counts of a grant, in impact-type order.
pub fn grant_impact(
    data: &SnapshotData,
    grant: &str,
    hit: &HashMap<String, bool>,
    disruptive: &HashMap<String, bool>,
) -> [u64; 9] {
    let funded: Vec<&str> = pairs(data, LinkType::GrantPaper)
        .into_iter()
        .filter(|(g, _)| *g == grant)
        .map(|(_, p)| p)
        .collect();
    let direct = |lt: LinkType| pairs(data, lt).iter().filter(|(g, _)| *g == grant).count() as u64;
    let broad = |t: DocType| broad_chains(data, grant, t).len() as u64;
    [
        funded.len() as u64,
        funded.iter().filter(|p| hit[**p]).count() as u64,
        funded.iter().filter(|p| disruptive[**p]).count() as u64,
        direct(LinkType::GrantPatent),
        direct(LinkType::GrantClinical),
        broad(DocType::Patent),
        broad(DocType::ClinicalTrial),
        broad(DocType::Policy),
        broad(DocType::Newsfeed),
    ]
}

/// `max { h : at least h counts are >= h }` by trying every `h`.
pub fn h_index(citations: &[u64]) -> u64 {
    (0..=citations.len() as u64)
        .filter(|&h| citations.iter().filter(|&&c| c >= h).count() as u64 >= h)
        .max()
        .unwrap_or(0)
}

/// Probability that a random positive outranks a random negative, ties
/// counted as one half, by enumerating all pairs.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let pos: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| l).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = scores.iter().zip(labels).filter(|(_, &l)| !l).map(|(s, _)| *s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    Some(wins / (pos.len() * neg.len()) as f64)
}
