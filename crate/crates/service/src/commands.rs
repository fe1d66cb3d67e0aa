//! The `fundscape` pipeline: synth | ingest | metrics | layout | train |
//! predict | serve.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use fundscape::embed::{EmbeddingProvider, HashingEmbedder};
use fundscape::layout::{build_landscape, LandscapeConfig};
use fundscape::metrics::{aggregate_impact, AggregationLevel, GroupSummary, ImpactTables, ImpactType, MetricsConfig};
use fundscape::predictor::{
    load_models, predict_and_highlight, train_topics, BoostedStumps, EmbeddingTable, ModelRegistry, PiMetric,
    TimeLagTable, TrainConfig,
};
use fundscape::store::{
    export_corpus, generate_synthetic_corpus, ingest_dir, write_ndjson, CorpusSnapshot, ImpactMode, MarkerRule,
    PlantedField, PlantedStructure, SynthSizes, TopicPath, YearWindow,
};

use crate::config::ServiceConfig;
use crate::error::{io_err, ServiceError};

#[derive(Debug, Parser)]
#[command(name = "fundscape", version, about = "Science-funding impact analytics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus as NDJSON files.
    Synth(SynthArgs),
    /// Validate an NDJSON corpus and write a snapshot.
    Ingest(IngestArgs),
    /// Compute impact metrics and write a report.
    Metrics(MetricsArgs),
    /// Compute the impact landscape of one field.
    Layout(LayoutArgs),
    /// Train per-topic frontier models into a registry.
    Train(TrainArgs),
    /// Score recent grants with the latest registry models.
    Predict(PredictArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub grants: usize,
    /// Output directory for the NDJSON files.
    #[arg(long)]
    pub out: PathBuf,
    /// Year window as `MIN:MAX`.
    #[arg(long, default_value = "2000:2021", value_parser = parse_window)]
    pub window: YearWindow,
    /// Field whose grants acknowledge a patent with a fixed probability,
    /// as `PATH=PROBABILITY`; repeatable.
    #[arg(long = "planted-field", value_parser = parse_planted_field)]
    pub planted_fields: Vec<PlantedField>,
    /// Token planted in a share of abstracts; marked grants acknowledge a
    /// patent in `--marker-topic`.
    #[arg(long)]
    pub marker: Option<String>,
    #[arg(long, default_value = "G06/G06N")]
    pub marker_topic: String,
    #[arg(long, default_value_t = 0.3)]
    pub marker_share: f64,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Directory of NDJSON entity and link files.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "snapshot.json")]
    pub out: PathBuf,
    #[arg(long, default_value = "2000:2021", value_parser = parse_window)]
    pub window: YearWindow,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long, default_value = "snapshot.json")]
    pub snapshot: PathBuf,
    #[arg(long, default_value = "metrics.json")]
    pub out: PathBuf,
    /// Field-path depth of the field groups.
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    /// TOML file with metric settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    #[arg(long, default_value = "snapshot.json")]
    pub snapshot: PathBuf,
    /// Field-path prefix; empty for the whole corpus.
    #[arg(long, default_value = "")]
    pub field: String,
    #[arg(long, default_value = "direct", value_parser = parse_mode)]
    pub mode: ImpactMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "landscape.json")]
    pub out: PathBuf,
    /// TOML file with landscape settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum LagSource {
    /// Median realized lag measured on the snapshot.
    Measured,
    /// Fixed lags per impact type, longer horizon.
    CaseOne,
    /// Fixed lags per impact type, shorter horizon.
    CaseTwo,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value = "snapshot.json")]
    pub snapshot: PathBuf,
    #[arg(long, value_parser = parse_impact)]
    pub impact: ImpactType,
    #[arg(long, default_value_t = 100)]
    pub min_positives: usize,
    #[arg(long, default_value_t = 0.8)]
    pub coverage: f64,
    #[arg(long, default_value_t = 2)]
    pub topic_level: usize,
    #[arg(long, value_enum, default_value_t = LagSource::Measured)]
    pub time_lag: LagSource,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub registry: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub registry: PathBuf,
    /// Snapshot to score; defaults to the one the models were trained on.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Impact type to score; every type with models by default.
    #[arg(long, value_parser = parse_impact)]
    pub impact: Option<ImpactType>,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value = "h_index", value_parser = parse_metric)]
    pub rank_by: PiMetric,
    #[arg(long, default_value = "scores.ndjson")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// TOML service config; `FUNDSCAPE_*` variables override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub registry: Option<PathBuf>,
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    #[arg(long)]
    pub host: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
}

fn parse_window(s: &str) -> Result<YearWindow, String> {
    YearWindow::parse(s)
        .filter(|w| !w.is_empty())
        .ok_or_else(|| format!("expected MIN:MAX, got `{s}`"))
}

fn parse_mode(s: &str) -> Result<ImpactMode, String> {
    ImpactMode::parse(s).ok_or_else(|| format!("expected direct or broad, got `{s}`"))
}

fn parse_impact(s: &str) -> Result<ImpactType, String> {
    ImpactType::parse(s).ok_or_else(|| {
        let known: Vec<&str> = ImpactType::ALL.iter().map(|t| t.as_str()).collect();
        format!("unknown impact type `{s}`; expected one of {}", known.join(", "))
    })
}

fn parse_metric(s: &str) -> Result<PiMetric, String> {
    PiMetric::parse(s).ok_or_else(|| format!("unknown PI metric `{s}`"))
}

fn parse_planted_field(s: &str) -> Result<PlantedField, String> {
    let (path, p) = s.split_once('=').ok_or_else(|| format!("expected PATH=PROBABILITY, got `{s}`"))?;
    let patent_probability: f64 = p.parse().map_err(|_| format!("bad probability `{p}`"))?;
    Ok(PlantedField {
        field: TopicPath::parse(path),
        patent_probability,
    })
}

fn read_toml<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, ServiceError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            toml::from_str(&text).map_err(|e| ServiceError::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ServiceError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let bytes = serde_json::to_vec_pretty(value)?;
    fs::write(path, bytes).map_err(io_err(path))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), ServiceError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(io_err("<stdout>"))
}

pub fn synth(args: &SynthArgs) -> Result<CorpusSnapshot, ServiceError> {
    let sizes = SynthSizes {
        window: args.window,
        ..SynthSizes::scaled(args.grants)
    };
    let planted = PlantedStructure {
        fields: args.planted_fields.clone(),
        marker: args.marker.as_ref().map(|token| MarkerRule {
            token: token.clone(),
            grant_share: args.marker_share,
            patent_topic: TopicPath::parse(&args.marker_topic),
            probability: 1.0,
        }),
        ..PlantedStructure::default()
    };
    let snapshot = generate_synthetic_corpus(args.seed, &sizes, &planted)?;
    export_corpus(&snapshot, &args.out)?;
    log::info!(
        "wrote {} grants, {} papers, {} documents to {}",
        snapshot.grants().len(),
        snapshot.papers().len(),
        snapshot.docs().len(),
        args.out.display()
    );
    Ok(snapshot)
}

pub fn ingest(args: &IngestArgs) -> Result<CorpusSnapshot, ServiceError> {
    let (snapshot, report) = ingest_dir(&args.input, args.window)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    snapshot.save(&args.out)?;
    log::info!("snapshot {} written to {}", snapshot.id(), args.out.display());
    print_json(&report)?;
    Ok(snapshot)
}

/// Per-grant impact vectors and RII by field and by agency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub snapshot_id: String,
    pub config: MetricsConfig,
    pub hit_papers: usize,
    pub disruptive_papers: usize,
    pub grants: BTreeMap<String, fundscape::metrics::ImpactVector>,
    pub fields: Vec<GroupSummary>,
    pub agencies: Vec<GroupSummary>,
}

pub fn metrics(args: &MetricsArgs) -> Result<MetricsReport, ServiceError> {
    let config: MetricsConfig = read_toml(args.config.as_deref())?;
    let snapshot = CorpusSnapshot::load(&args.snapshot)?;
    let tables = ImpactTables::compute(&snapshot, &config)?;
    let report = MetricsReport {
        snapshot_id: snapshot.id().to_string(),
        hit_papers: tables.hit.iter().filter(|&&h| h).count(),
        disruptive_papers: tables.disruptive.iter().filter(|&&d| d).count(),
        grants: snapshot
            .grants()
            .iter()
            .zip(&tables.grants)
            .map(|(g, v)| (g.grant_id.clone(), *v))
            .collect(),
        fields: aggregate_impact(&snapshot, &tables, AggregationLevel::Field { depth: args.depth })?,
        agencies: aggregate_impact(&snapshot, &tables, AggregationLevel::Agency)?,
        config,
    };
    write_json(&args.out, &report)?;
    log::info!("metrics for {} grants written to {}", report.grants.len(), args.out.display());
    Ok(report)
}

pub fn layout(args: &LayoutArgs) -> Result<fundscape::layout::LandscapeLayout, ServiceError> {
    let config: LandscapeConfig = read_toml(args.config.as_deref())?;
    let snapshot = CorpusSnapshot::load(&args.snapshot)?;
    let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default())?;
    let layout = build_landscape(&snapshot, &tables, &args.field, args.mode, &config, args.seed, None)?;
    write_json(&args.out, &layout)?;
    log::info!(
        "landscape with {} nodes and {} edges written to {}",
        layout.nodes.len(),
        layout.edges.len(),
        args.out.display()
    );
    Ok(layout)
}

const SNAPSHOT_INDEX: &str = "snapshots.json";

/// Snapshot files the registry's models were trained on, by snapshot id.
fn snapshot_index(registry: &Path) -> Result<BTreeMap<String, PathBuf>, ServiceError> {
    let path = registry.join(SNAPSHOT_INDEX);
    match fs::read(&path) {
        Ok(bytes) => Ok(serde_json::from_slice(&bytes)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(BTreeMap::new()),
        Err(e) => Err(io_err(path)(e)),
    }
}

fn record_snapshot(registry: &Path, id: &str, snapshot: &Path) -> Result<(), ServiceError> {
    let mut index = snapshot_index(registry)?;
    let absolute = fs::canonicalize(snapshot).map_err(io_err(snapshot))?;
    index.insert(id.to_string(), absolute);
    let tmp = registry.join(format!("{SNAPSHOT_INDEX}.tmp"));
    fs::write(&tmp, serde_json::to_vec_pretty(&index)?).map_err(io_err(&tmp))?;
    fs::rename(&tmp, registry.join(SNAPSHOT_INDEX)).map_err(io_err(registry))
}

pub fn train(args: &TrainArgs) -> Result<fundscape::predictor::TrainingSummary, ServiceError> {
    let snapshot = CorpusSnapshot::load(&args.snapshot)?;
    let registry = ModelRegistry::open(&args.registry)?;
    let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default())?;
    let embeddings = EmbeddingTable::load_or_compute(registry.root(), &snapshot, &HashingEmbedder::default())?;
    let config = TrainConfig {
        coverage: args.coverage,
        min_positives: args.min_positives,
        topic_level: args.topic_level,
        time_lag: match args.time_lag {
            LagSource::Measured => None,
            LagSource::CaseOne => Some(TimeLagTable::case_one()),
            LagSource::CaseTwo => Some(TimeLagTable::case_two()),
        },
        seed: args.seed,
        ..TrainConfig::default()
    };
    let summary = train_topics(&snapshot, &tables, &embeddings, args.impact, &config, &registry)?;
    record_snapshot(&args.registry, snapshot.id(), &args.snapshot)?;
    for r in &summary.trained {
        log::info!(
            "{} / {} v{}: test AUC {}",
            r.impact,
            r.topic,
            r.version,
            r.test_auc.map_or("n/a".into(), |a| format!("{a:.3}"))
        );
    }
    for s in &summary.skipped {
        log::warn!("skipped {}: {}", s.topic, s.reason);
    }
    print_json(&summary)?;
    Ok(summary)
}

/// One line of `scores.ndjson`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreLine {
    pub grant_id: String,
    pub impact: ImpactType,
    pub topic: TopicPath,
    pub model_version: u32,
    pub score: f64,
    pub highlighted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictSummary {
    pub snapshot_id: String,
    pub threshold: f64,
    pub scores: usize,
    pub highlighted: BTreeMap<ImpactType, usize>,
    pub top_pis: BTreeMap<ImpactType, Vec<String>>,
}

pub fn predict(args: &PredictArgs) -> Result<PredictSummary, ServiceError> {
    if !(0.0..=1.0).contains(&args.threshold) {
        return Err(ServiceError::Config(format!("threshold must lie in [0, 1], got {}", args.threshold)));
    }
    let registry = ModelRegistry::open(&args.registry)?;
    let impacts: Vec<ImpactType> = match args.impact {
        Some(i) => vec![i],
        None => ImpactType::ALL
            .into_iter()
            .filter(|&i| registry.latest_records(i).is_ok_and(|r| !r.is_empty()))
            .collect(),
    };
    let snapshot_path = match &args.snapshot {
        Some(p) => p.clone(),
        None => {
            let id = impacts
                .iter()
                .find_map(|&i| registry.latest_records(i).ok()?.into_iter().next())
                .map(|r| r.metadata.snapshot_id)
                .ok_or_else(|| ServiceError::Config("registry has no models; pass --snapshot".into()))?;
            snapshot_index(&args.registry)?
                .remove(&id)
                .ok_or_else(|| ServiceError::Config(format!("snapshot {id} is not recorded; pass --snapshot")))?
        }
    };
    let snapshot = CorpusSnapshot::load(&snapshot_path)?;
    let tables = ImpactTables::compute(&snapshot, &MetricsConfig::default())?;
    let provider = HashingEmbedder::default();
    let embeddings = EmbeddingTable::load_or_compute(registry.root(), &snapshot, &provider)?;

    let mut lines = Vec::new();
    let mut summary = PredictSummary {
        snapshot_id: snapshot.id().to_string(),
        threshold: args.threshold,
        scores: 0,
        highlighted: BTreeMap::new(),
        top_pis: BTreeMap::new(),
    };
    for impact in impacts {
        let (models, skipped) = load_models(&registry, impact, None, &BoostedStumps::default())?;
        for s in &skipped {
            log::warn!("{impact} / {}: {}", s.topic, s.reason);
        }
        let models: Vec<_> = models
            .into_iter()
            .filter(|m| {
                let ok = m.record.metadata.embedding_provider == provider.name();
                if !ok {
                    log::warn!("{impact} / {} needs embeddings from {}", m.record.topic, m.record.metadata.embedding_provider);
                }
                ok
            })
            .collect();
        let report = predict_and_highlight(
            &snapshot,
            &tables,
            &embeddings,
            impact,
            &models,
            args.threshold,
            args.rank_by,
        )?;
        let versions: BTreeMap<&TopicPath, u32> = report.topics.iter().map(|t| (&t.topic, t.model_version)).collect();
        lines.extend(report.scores.iter().map(|s| ScoreLine {
            grant_id: s.grant_id.clone(),
            impact,
            topic: s.topic.clone(),
            model_version: versions.get(&s.topic).copied().unwrap_or_default(),
            score: s.score,
            highlighted: s.score > args.threshold,
        }));
        summary.highlighted.insert(impact, report.highlighted.len());
        summary.top_pis.insert(
            impact,
            report.pis.iter().take(10).map(|p| p.profile.researcher_id.clone()).collect(),
        );
    }
    summary.scores = lines.len();
    write_ndjson(&args.out, &lines)?;
    log::info!("{} scores written to {}", lines.len(), args.out.display());
    print_json(&summary)?;
    Ok(summary)
}

pub fn serve_config(args: &ServeArgs) -> Result<ServiceConfig, ServiceError> {
    let mut config = ServiceConfig::load(args.config.as_deref())?;
    if let Some(s) = &args.snapshot {
        config.snapshot = s.clone();
    }
    if args.registry.is_some() {
        config.registry = args.registry.clone();
    }
    if args.static_dir.is_some() {
        config.static_dir = args.static_dir.clone();
    }
    if let Some(h) = &args.host {
        config.host = h.clone();
    }
    if let Some(p) = args.port {
        config.port = p;
    }
    config.validate()?;
    Ok(config)
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<(), ServiceError> {
    match cli.command {
        Command::Synth(a) => synth(&a).map(drop),
        Command::Ingest(a) => ingest(&a).map(drop),
        Command::Metrics(a) => metrics(&a).map(drop),
        Command::Layout(a) => layout(&a).map(drop),
        Command::Train(a) => train(&a).map(drop),
        Command::Predict(a) => predict(&a).map(drop),
        Command::Serve(a) => {
            let config = serve_config(&a)?;
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(io_err("<runtime>"))?;
            runtime.block_on(crate::api::serve(config))
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from([
            "fundscape",
            "train",
            "--snapshot",
            "s.json",
            "--impact",
            "direct_patent",
            "--min-positives",
            "10",
            "--seed",
            "3",
            "--registry",
            "models",
        ])
        .unwrap();
        match cli.command {
            Command::Train(a) => {
                assert_eq!(a.impact, ImpactType::parse("direct_patent").unwrap());
                assert_eq!((a.min_positives, a.seed), (10, 3));
            }
            other => panic!("parsed {other:?}"),
        }
        assert!(Cli::try_parse_from(["fundscape", "train", "--impact", "patents", "--registry", "m"]).is_err());
    }

    #[test]
    fn planted_field_syntax() {
        let f = parse_planted_field("A/B=0.9").unwrap();
        assert_eq!(f.field, TopicPath::parse("A/B"));
        assert_eq!(f.patent_probability, 0.9);
        assert!(parse_planted_field("A/B").is_err());
    }
}
