use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::store::TopicPath;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicCandidate {
    pub topic: TopicPath,
    pub positives: usize,
}

/// Topics worth a model: the shortest run of topics, by positive count
/// descending (ties by path), whose grants cover more than `coverage` of
/// all impacted grants, minus topics with fewer than `min_positives` grants.
pub fn select_topics(
    members: &BTreeMap<TopicPath, BTreeSet<usize>>,
    coverage: f64,
    min_positives: usize,
) -> Vec<TopicCandidate> {
    let impacted: BTreeSet<usize> = members.values().flatten().copied().collect();
    let mut ranked: Vec<(&TopicPath, &BTreeSet<usize>)> = members.iter().collect();
    ranked.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(b.0)));
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    let mut prefix = Vec::new();
    for (topic, grants) in ranked {
        if !impacted.is_empty() && covered.len() as f64 / impacted.len() as f64 > coverage {
            break;
        }
        covered.extend(grants.iter().copied());
        prefix.push(TopicCandidate {
            topic: topic.clone(),
            positives: grants.len(),
        });
    }
    prefix.retain(|c| c.positives >= min_positives);
    prefix
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disjoint(sizes: &[usize]) -> BTreeMap<TopicPath, BTreeSet<usize>> {
        let mut next = 0;
        sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let set = (next..next + n).collect();
                next += n;
                (TopicPath::parse(&format!("T{i}")), set)
            })
            .collect()
    }

    #[test]
    fn coverage_prefix_then_minimum() {
        let picked = select_topics(&disjoint(&[500, 300, 150, 50]), 0.8, 100);
        let names: Vec<String> = picked.iter().map(|c| c.topic.to_string()).collect();
        assert_eq!(names, ["T0", "T1", "T2"]);
        let picked = select_topics(&disjoint(&[500, 300, 150, 60]), 0.8, 100);
        assert_eq!(picked.len(), 3);
        let picked = select_topics(&disjoint(&[500, 300, 150, 50]), 0.79, 100);
        assert_eq!(picked.len(), 2);
    }

    #[test]
    fn small_topics_are_dropped() {
        assert!(select_topics(&disjoint(&[50, 40, 30]), 0.8, 100).is_empty());
        assert!(select_topics(&BTreeMap::new(), 0.8, 1).is_empty());
    }
}
