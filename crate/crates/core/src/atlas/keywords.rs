use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::topics::{TopicNodeKind, TopicNodeSummary};
use super::{AtlasError, Result};
use crate::store::CorpusSnapshot;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Keyword frequency with its per-year series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordStat {
    pub token: String,
    pub total_freq: u64,
    pub yearly: BTreeMap<i32, u64>,
}

#[derive(Clone, Debug)]
pub struct Stopwords(HashSet<String>);

impl Default for Stopwords {
    fn default() -> Self {
        Stopwords::parse(DEFAULT_STOPWORDS)
    }
}

impl Stopwords {
    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn none() -> Self {
        Stopwords(HashSet::new())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

/// Which text fields feed the keyword cloud.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeywordSource {
    Title,
    Abstract,
    #[default]
    Both,
}

/// Top `top_n` keywords of `(text, year)` documents: lowercase alphabetic
/// tokens minus stopwords, ranked by frequency, then alphabetically.
pub fn keyword_cloud<'a, I>(docs: I, top_n: usize, stopwords: &Stopwords) -> Vec<KeywordStat>
where
    I: IntoIterator<Item = (&'a str, i32)>,
{
    let mut stats: HashMap<String, KeywordStat> = HashMap::new();
    for (text, year) in docs {
        for token in text.split(|c: char| !c.is_alphabetic()).filter(|t| !t.is_empty()) {
            let token = token.to_lowercase();
            if stopwords.contains(&token) {
                continue;
            }
            let stat = stats.entry(token.clone()).or_insert_with(|| KeywordStat {
                token,
                total_freq: 0,
                yearly: BTreeMap::new(),
            });
            stat.total_freq += 1;
            *stat.yearly.entry(year).or_default() += 1;
        }
    }
    let mut ranked: Vec<KeywordStat> = stats.into_values().collect();
    ranked.sort_by(|a, b| b.total_freq.cmp(&a.total_freq).then_with(|| a.token.cmp(&b.token)));
    ranked.truncate(top_n);
    ranked
}

/// Keyword cloud of a topic node's members.
pub fn node_keywords(
    snapshot: &CorpusSnapshot,
    node: &TopicNodeSummary,
    top_n: usize,
    source: KeywordSource,
    stopwords: &Stopwords,
) -> Result<Vec<KeywordStat>> {
    let mut docs: Vec<(String, i32)> = Vec::with_capacity(node.member_ids.len());
    for id in &node.member_ids {
        let unknown = || AtlasError::UnknownNode(node.id.clone());
        if node.kind == TopicNodeKind::Grant {
            let g = snapshot.grant(id).ok_or_else(unknown)?;
            let text = match source {
                KeywordSource::Title => g.title.clone(),
                KeywordSource::Abstract => g.abstract_text.clone(),
                KeywordSource::Both => format!("{} {}", g.title, g.abstract_text),
            };
            docs.push((text, g.start_year()));
        } else if node.kind == TopicNodeKind::Paper {
            let p = snapshot.paper(id).ok_or_else(unknown)?;
            docs.push((p.title.clone(), p.publication_year));
        } else {
            let d = snapshot.doc(id).ok_or_else(unknown)?;
            docs.push((d.title.clone(), d.year));
        }
    }
    Ok(keyword_cloud(docs.iter().map(|(t, y)| (t.as_str(), *y)), top_n, stopwords))
}
