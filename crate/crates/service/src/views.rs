//! One pure function per endpoint: (state, parameters) -> payload.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use fundscape::atlas::{
    aggregate_docs_by_topic, aggregate_grants_by_topic, aggregate_papers_by_topic, grant_field_bubbles,
    impact_entity_distribution, node_keywords, BubbleConfig, ClassicalMds, EntityDimension, FieldBubble,
    HistogramBin, KeywordSource, KeywordStat, TopicNodeKind,
};
use fundscape::layout::{build_landscape, LandscapeLayout, NodeKind};
use fundscape::metrics::{aggregate_impact, pi_profile, AggregationLevel, ImpactType, PIProfile, RiiRow};
use fundscape::predictor::{predict_and_highlight, HighlightReport, PiMetric};
use fundscape::store::{
    linked_documents, DocType, GrantFilter, GrantRecord, ImpactMode, LinkType, OutcomeKind, TopicPath, YearWindow,
};

use crate::error::ApiError;
use crate::state::{AppState, LandscapeKey};

pub const SCHEMA_VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> ApiError {
    ApiError::BadRequest(msg.into())
}

/// Grant filter as query parameters.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
pub struct FilterParams {
    pub funder_org: Option<String>,
    pub year_min: Option<i32>,
    pub year_max: Option<i32>,
    pub amount_min: Option<f64>,
    pub amount_max: Option<f64>,
    pub field: Option<String>,
}

impl FilterParams {
    pub fn filter(&self) -> GrantFilter {
        GrantFilter {
            funder_org: self.funder_org.clone().filter(|s| !s.is_empty()),
            year_min: self.year_min,
            year_max: self.year_max,
            amount_min: self.amount_min,
            amount_max: self.amount_max,
            field: self.field.clone().filter(|s| !s.is_empty()),
        }
    }
}

fn filtered(state: &AppState, params: &FilterParams) -> Result<Vec<usize>, ApiError> {
    let filter = params.filter();
    filter.validate()?;
    Ok(state
        .snapshot
        .grants()
        .iter()
        .enumerate()
        .filter(|(_, g)| filter.matches(g))
        .map(|(i, _)| i)
        .collect())
}

fn parse_mode(mode: Option<&str>) -> Result<ImpactMode, ApiError> {
    match mode {
        None | Some("") => Ok(ImpactMode::Direct),
        Some(m) => ImpactMode::parse(m).ok_or_else(|| bad(format!("mode must be direct or broad, got `{m}`"))),
    }
}

fn parse_impact(s: &str) -> Result<ImpactType, ApiError> {
    ImpactType::parse(s).ok_or_else(|| bad(format!("unknown impact type `{s}`")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub schema_version: u32,
    pub snapshot_id: String,
    pub grants: usize,
    pub window: YearWindow,
    pub registry: bool,
    pub models: usize,
}

pub fn health(state: &AppState) -> Health {
    Health {
        status: "ok",
        schema_version: SCHEMA_VERSION,
        snapshot_id: state.snapshot.id().to_string(),
        grants: state.snapshot.grants().len(),
        window: state.snapshot.window(),
        registry: state.registry_loaded,
        models: state.model_count(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrantList {
    pub total: usize,
    pub grants: Vec<GrantRecord>,
}

pub fn grants(state: &AppState, filter: &FilterParams) -> Result<GrantList, ApiError> {
    let grants: Vec<GrantRecord> = state.snapshot.query_grants(&filter.filter())?.into_iter().cloned().collect();
    Ok(GrantList {
        total: grants.len(),
        grants,
    })
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct FieldParams {
    pub level: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldEntry {
    #[serde(flatten)]
    pub bubble: FieldBubble,
    pub rii: RiiRow,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldList {
    pub level: usize,
    pub total_grants: usize,
    pub fields: Vec<FieldEntry>,
}

/// Grant View: one bubble per field of the filtered grants, placed by
/// abstract similarity, with the field's RII row.
pub fn fields(state: &AppState, params: &FieldParams, filter: &FilterParams) -> Result<FieldList, ApiError> {
    let level = params.level.unwrap_or(1);
    if level == 0 {
        return Err(bad("level must be at least 1"));
    }
    let members = filtered(state, filter)?;
    let config = BubbleConfig {
        level,
        ..BubbleConfig::default()
    };
    let bubbles = if members.is_empty() {
        Vec::new()
    } else {
        grant_field_bubbles(
            &state.snapshot,
            &state.embeddings.vectors,
            &members,
            &config,
            &ClassicalMds,
            state.config.layout_seed,
        )?
    };
    let rii: BTreeMap<String, RiiRow> =
        aggregate_impact(&state.snapshot, &state.tables, AggregationLevel::Field { depth: level })?
            .into_iter()
            .map(|g| (g.group, g.rii))
            .collect();
    Ok(FieldList {
        level,
        total_grants: members.len(),
        fields: bubbles
            .into_iter()
            .map(|bubble| FieldEntry {
                rii: rii.get(&bubble.field_path.to_string()).cloned().unwrap_or_default(),
                bubble,
            })
            .collect(),
    })
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct PiParams {
    pub field: Option<String>,
    pub rank_by: Option<String>,
    pub limit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiEntry {
    pub rank: usize,
    pub metric_value: f64,
    /// Grants of the queried field led by this investigator.
    pub grants: Vec<String>,
    pub profile: PIProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiList {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub rank_by: PiMetric,
    pub total: usize,
    pub pis: Vec<PiEntry>,
}

/// PI View: investigators of the field's grants ranked by one metric.
pub fn pis(state: &AppState, params: &PiParams) -> Result<PiList, ApiError> {
    let rank_by = match params.rank_by.as_deref() {
        None | Some("") => PiMetric::HIndex,
        Some(s) => PiMetric::parse(s).ok_or_else(|| bad(format!("unknown rank_by `{s}`")))?,
    };
    let field = params.field.clone().filter(|f| !f.is_empty());
    let prefix = field.as_deref().map(TopicPath::parse);
    let snapshot = &state.snapshot;
    let mut led: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (g, grant) in snapshot.grants().iter().enumerate() {
        if prefix.as_ref().is_some_and(|p| !grant.field_path.starts_with(p)) {
            continue;
        }
        for &r in snapshot.forward(LinkType::GrantPi, g) {
            led.entry(r).or_default().push(grant.grant_id.clone());
        }
    }
    if let (Some(f), true) = (&field, led.is_empty()) {
        return Err(ApiError::NotFound(format!("no grants in field `{f}`")));
    }
    let year = snapshot.window().max;
    let mut pis = led
        .into_iter()
        .map(|(r, grants)| {
            let profile = pi_profile(snapshot, &state.tables, &snapshot.researchers()[r].researcher_id, year)?;
            Ok(PiEntry {
                rank: 0,
                metric_value: rank_by.value(&profile),
                grants,
                profile,
            })
        })
        .collect::<Result<Vec<_>, ApiError>>()?;
    pis.sort_by(|a, b| {
        b.metric_value
            .total_cmp(&a.metric_value)
            .then_with(|| a.profile.researcher_id.cmp(&b.profile.researcher_id))
    });
    let total = pis.len();
    pis.truncate(params.limit.unwrap_or(50));
    for (i, p) in pis.iter_mut().enumerate() {
        p.rank = i + 1;
    }
    Ok(PiList {
        field,
        rank_by,
        total,
        pis,
    })
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct LandscapeParams {
    pub field: Option<String>,
    pub mode: Option<String>,
    /// Comma-separated impact types to draw; all of the mode by default.
    pub impact_types: Option<String>,
    /// Prediction threshold; switches glyphs to prediction mode.
    pub threshold: Option<f64>,
    /// Impact type whose models drive prediction rings.
    pub impact_type: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LandscapePayload {
    pub schema_version: u32,
    pub snapshot_id: String,
    pub impact_types: Vec<ImpactType>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction_impact: Option<ImpactType>,
    pub layout: LandscapeLayout,
}

fn mode_types(mode: ImpactMode) -> Vec<ImpactType> {
    ImpactType::ALL.into_iter().filter(|t| t.mode() == mode).collect()
}

/// Impact Landscape View. Layouts are cached per (snapshot, field, mode,
/// seed, prediction overlay); the impact-type selection only hides parts.
pub fn landscape(state: &AppState, params: &LandscapeParams) -> Result<LandscapePayload, ApiError> {
    let field = params.field.clone().unwrap_or_default();
    let mode = parse_mode(params.mode.as_deref())?;
    let selected: Vec<ImpactType> = match params.impact_types.as_deref() {
        None | Some("") => mode_types(mode),
        Some(list) => {
            let types = list.split(',').map(|s| parse_impact(s.trim())).collect::<Result<Vec<_>, _>>()?;
            if let Some(t) = types.iter().find(|t| t.mode() != mode) {
                return Err(bad(format!("{t} is not a {mode} impact type")));
            }
            types
        }
    };
    let prediction = match params.threshold {
        None => None,
        Some(t) if !(0.0..=1.0).contains(&t) => return Err(bad(format!("threshold must lie in [0, 1], got {t}"))),
        Some(t) => {
            let impact = parse_impact(params.impact_type.as_deref().unwrap_or("direct_patent"))?;
            if !state.registry_loaded {
                return Err(ApiError::Unavailable("prediction overlay needs a model registry".into()));
            }
            Some((impact, t))
        }
    };
    let seed = params.seed.unwrap_or(state.config.layout_seed);
    let key = LandscapeKey {
        snapshot_id: state.snapshot.id().to_string(),
        field: field.clone(),
        mode,
        seed,
        prediction: prediction.map(|(i, t)| (i, t.to_bits())),
    };
    let layout = state.cache.get_or_compute(key, || {
        let overlay = match prediction {
            Some((impact, threshold)) => {
                let report = highlight(state, impact, None, threshold, PiMetric::HIndex)?;
                Some(report.overlay())
            }
            None => None,
        };
        Ok(build_landscape(
            &state.snapshot,
            &state.tables,
            &field,
            mode,
            &state.config.landscape,
            seed,
            overlay.as_ref(),
        )?)
    })?;

    let kinds: BTreeSet<OutcomeKind> = selected.iter().map(|t| t.outcome_kind()).collect();
    let mut layout = (*layout).clone();
    layout.clusters.retain(|c| kinds.contains(&c.kind));
    layout
        .nodes
        .retain(|n| n.kind == NodeKind::GrantTopic || n.outcome.is_some_and(|k| kinds.contains(&k)));
    layout.edges.retain(|e| kinds.contains(&e.impact_kind));
    Ok(LandscapePayload {
        schema_version: SCHEMA_VERSION,
        snapshot_id: state.snapshot.id().to_string(),
        impact_types: selected,
        threshold: prediction.map(|(_, t)| t),
        prediction_impact: prediction.map(|(i, _)| i),
        layout,
    })
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct ImpactTypeParams {
    pub mode: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImpactTypeMean {
    pub impact_type: ImpactType,
    /// Mean outcome count per filtered grant; null without grants.
    pub mean: Option<f64>,
    /// Mean over every grant of the snapshot.
    pub baseline: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImpactTypeSummary {
    pub mode: ImpactMode,
    pub filtered_grants: usize,
    pub total_grants: usize,
    pub types: Vec<ImpactTypeMean>,
}

fn mean_count(state: &AppState, grants: &[usize], t: ImpactType) -> Option<f64> {
    if grants.is_empty() {
        return None;
    }
    let total: u64 = grants.iter().map(|&g| state.tables.grants[g].get(t)).sum();
    Some(total as f64 / grants.len() as f64)
}

/// Impact Type View: outcome counts per grant against the global baseline.
pub fn impact_types(
    state: &AppState,
    params: &ImpactTypeParams,
    filter: &FilterParams,
) -> Result<ImpactTypeSummary, ApiError> {
    let mode = parse_mode(params.mode.as_deref())?;
    let members = filtered(state, filter)?;
    let all: Vec<usize> = (0..state.snapshot.grants().len()).collect();
    Ok(ImpactTypeSummary {
        mode,
        filtered_grants: members.len(),
        total_grants: all.len(),
        types: mode_types(mode)
            .into_iter()
            .map(|t| ImpactTypeMean {
                impact_type: t,
                mean: mean_count(state, &members, t),
                baseline: mean_count(state, &all, t),
            })
            .collect(),
    })
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct EntityParams {
    pub doc_type: Option<String>,
    pub dimension: Option<String>,
    /// How filtered grants reach documents; broad by default.
    pub mode: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntityDistribution {
    pub doc_type: DocType,
    pub dimension: EntityDimension,
    pub documents: usize,
    pub bins: Vec<HistogramBin>,
}

/// Impact Entity View. Without a grant filter every document of the type
/// counts; with one, the distinct documents linked to the filtered grants.
pub fn entity_distribution(
    state: &AppState,
    params: &EntityParams,
    filter: &FilterParams,
) -> Result<EntityDistribution, ApiError> {
    let doc_type = params.doc_type.as_deref().ok_or_else(|| bad("doc_type is required"))?;
    let doc_type = DocType::parse(doc_type).ok_or_else(|| bad(format!("unknown doc_type `{doc_type}`")))?;
    let dimension = EntityDimension::parse(params.dimension.as_deref().ok_or_else(|| bad("dimension is required"))?)?;
    let snapshot = &state.snapshot;
    let docs: Vec<&fundscape::store::ImpactDocRecord> = if filter.filter().is_empty() {
        snapshot.docs_of(doc_type).collect()
    } else {
        let mode = match params.mode.as_deref() {
            None | Some("") => ImpactMode::Broad,
            Some(m) => parse_mode(Some(m))?,
        };
        let grants: Vec<&str> = filtered(state, filter)?
            .into_iter()
            .map(|g| snapshot.grants()[g].grant_id.as_str())
            .collect();
        let kind = OutcomeKind::from(doc_type);
        let ids: BTreeSet<&str> =
            linked_documents(snapshot, &grants, kind, mode, true)?.into_iter().map(|c| c.doc_id).collect();
        ids.into_iter().filter_map(|id| snapshot.doc(id)).collect()
    };
    let bins = impact_entity_distribution(docs.iter().copied(), doc_type, dimension)?;
    Ok(EntityDistribution {
        doc_type,
        dimension,
        documents: docs.len(),
        bins,
    })
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct KeywordParams {
    pub top_n: Option<usize>,
    /// `title`, `abstract` or `both` (grant nodes only).
    pub source: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeywordPayload {
    pub node_id: String,
    pub kind: TopicNodeKind,
    pub topic_path: TopicPath,
    pub members: u64,
    pub keywords: Vec<KeywordStat>,
}

/// Word cloud of a landscape node, addressed as `<kind>:<topic path>`.
pub fn topic_keywords(state: &AppState, node_id: &str, params: &KeywordParams) -> Result<KeywordPayload, ApiError> {
    let not_found = || ApiError::NotFound(format!("unknown topic node `{node_id}`"));
    let (kind, path) = node_id.split_once(':').ok_or_else(not_found)?;
    let kind = TopicNodeKind::parse(kind).ok_or_else(not_found)?;
    let path = TopicPath::parse(path);
    let level = path.depth();
    if level == 0 {
        return Err(not_found());
    }
    let source = match params.source.as_deref() {
        None | Some("") | Some("abstract") => KeywordSource::Abstract,
        Some("title") => KeywordSource::Title,
        Some("both") => KeywordSource::Both,
        Some(s) => return Err(bad(format!("source must be title, abstract or both, got `{s}`"))),
    };
    let snapshot = &state.snapshot;
    let nodes = match kind {
        TopicNodeKind::Grant => {
            let members: Vec<usize> = snapshot
                .grants()
                .iter()
                .enumerate()
                .filter(|(_, g)| g.field_path.starts_with(&path))
                .map(|(i, _)| i)
                .collect();
            aggregate_grants_by_topic(snapshot, None, &members, level)?
        }
        TopicNodeKind::Paper => {
            let members: Vec<usize> = snapshot
                .papers()
                .iter()
                .enumerate()
                .filter(|(_, p)| p.field_path.starts_with(&path))
                .map(|(i, _)| i)
                .collect();
            aggregate_papers_by_topic(snapshot, &members, level)?
        }
        other => {
            let doc_type = other.doc_type().ok_or_else(not_found)?;
            let members: Vec<usize> = snapshot
                .docs()
                .iter()
                .enumerate()
                .filter(|(_, d)| d.doc_type == doc_type)
                .map(|(i, _)| i)
                .collect();
            aggregate_docs_by_topic(snapshot, &members, level)?
        }
    };
    let node = nodes.into_iter().find(|n| n.topic_path == path).ok_or_else(not_found)?;
    let keywords = node_keywords(snapshot, &node, params.top_n.unwrap_or(30), source, &state.stopwords)?;
    Ok(KeywordPayload {
        node_id: node.id,
        kind: node.kind,
        topic_path: node.topic_path,
        members: node.count,
        keywords,
    })
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct PredictionParams {
    pub impact_type: Option<String>,
    pub topic: Option<String>,
    pub threshold: Option<f64>,
    pub rank_by: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionPayload {
    pub schema_version: u32,
    pub snapshot_id: String,
    #[serde(flatten)]
    pub report: HighlightReport,
}

fn highlight(
    state: &AppState,
    impact: ImpactType,
    topic: Option<&TopicPath>,
    threshold: f64,
    rank_by: PiMetric,
) -> Result<HighlightReport, ApiError> {
    if !state.registry_loaded {
        return Err(ApiError::Unavailable("no model registry configured".into()));
    }
    let models = state.models.get(&impact).map(Vec::as_slice).unwrap_or_default();
    let chosen: Vec<_> = models.iter().filter(|m| topic.is_none_or(|t| &m.record.topic == t)).collect();
    let mut report = predict_and_highlight(
        &state.snapshot,
        &state.tables,
        &state.embeddings,
        impact,
        chosen.iter().copied(),
        threshold,
        rank_by,
    )?;
    if let (Some(t), true) = (topic, chosen.is_empty()) {
        log::warn!("no {impact} model for topic {t}");
        report.skipped.push(fundscape::predictor::SkippedTopic {
            topic: t.clone(),
            reason: "no model in registry".into(),
        });
    }
    Ok(report)
}

/// Prediction mode: scores of recent grants, highlighted grants and the
/// ranked PIs behind them.
pub fn predictions(state: &AppState, params: &PredictionParams) -> Result<PredictionPayload, ApiError> {
    let impact = parse_impact(params.impact_type.as_deref().unwrap_or("direct_patent"))?;
    let threshold = params.threshold.unwrap_or(state.config.default_threshold);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(bad(format!("threshold must lie in [0, 1], got {threshold}")));
    }
    let rank_by = match params.rank_by.as_deref() {
        None | Some("") => PiMetric::HIndex,
        Some(s) => PiMetric::parse(s).ok_or_else(|| bad(format!("unknown rank_by `{s}`")))?,
    };
    let topic = params.topic.as_deref().filter(|t| !t.is_empty()).map(TopicPath::parse);
    let report = highlight(state, impact, topic.as_ref(), threshold, rank_by)?;
    Ok(PredictionPayload {
        schema_version: SCHEMA_VERSION,
        snapshot_id: state.snapshot.id().to_string(),
        report,
    })
}
