//! The `tsfeat` command line: one subcommand per pipeline stage.
//!
//! Every stage writes into `<out>/<stage>/` and finishes with a
//! `run_manifest.txt` holding the effective configuration, stage facts and
//! SHA-256 checksums of the files it wrote. Nothing time-dependent is
//! recorded, so reruns are byte-identical.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::analysis::{
    elbow_sweep, kmeans_pp, nearest_rows, pca_2d, similarity_extremes, stability, stability_histogram,
};
use crate::config::RunConfig;
use crate::data::{default_stride, ingest, split, Dataset, LabelMap, TrainSeries, WindowParams};
use crate::error::{Error, Result};
use crate::evaluation::{
    base_forecasts, combine_all, meta_instances, meta_split, run_pipeline, train_extractor,
    train_labeled_extractor, FallbackRecord,
};
use crate::extractor::{aggregate, FeatureMatrix, FeatureVector, TrainedExtractor};
use crate::forecasters::{ForecastSet, Model};
use crate::metalearner::GbdtModel;

pub const MANIFEST: &str = "run_manifest.txt";
const HISTOGRAM_BINS: usize = 20;
const HISTOGRAM_MAX: f64 = 2.0;

#[derive(Debug, Parser)]
#[command(name = "tsfeat", version, about = "Learned static time-series features and forecast combination")]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// `long` (series_id,value) or `wide` (id,v1,v2,...).
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Seasonal period.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Override any configuration key, e.g. `--set epochs=20`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Parse and validate the dataset.
    IngestCheck,
    /// Train the window classifier on the inner-train regions.
    TrainExtractor,
    /// Static features for every training region.
    Extract,
    /// Base forecasts over the test horizon.
    BaseForecast,
    /// Fit the meta-learner on validation errors.
    TrainMeta,
    /// Combination weights and combined forecasts.
    Forecast,
    /// The full two-phase backtest, end to end.
    Evaluate,
    /// Stability, clustering, projection and similarity diagnostics.
    Analyze,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::IngestCheck => "ingest-check",
            Command::TrainExtractor => "train-extractor",
            Command::Extract => "extract",
            Command::BaseForecast => "base-forecast",
            Command::TrainMeta => "train-meta",
            Command::Forecast => "forecast",
            Command::Evaluate => "evaluate",
            Command::Analyze => "analyze",
        }
    }
}

/// Defaults, then the config file, then `--set`, then the named flags.
pub fn resolve_config(flags: &Flags) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &flags.config {
        let text = fs::read_to_string(path)?;
        cfg.apply_text(&path.display().to_string(), &text)?;
    }
    for kv in &flags.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(v) = &flags.data {
        cfg.data = Some(v.clone());
    }
    if let Some(v) = &flags.format {
        cfg.format = v.parse()?;
    }
    if let Some(v) = flags.m {
        cfg.period = v;
    }
    if let Some(v) = flags.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = &flags.out {
        cfg.out = v.clone();
    }
    if let Some(v) = flags.threads {
        cfg.threads = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(&cli.flags)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let stage = cli.command.name();
    pool.install(|| run_stage(cli.command, &cfg)).map_err(|e| e.in_stage(stage))
}

pub fn run_stage(command: Command, cfg: &RunConfig) -> Result<()> {
    let mut out = StageOutput::new(command.name());
    match command {
        Command::IngestCheck => ingest_check(cfg, &mut out)?,
        Command::TrainExtractor => train_extractor_stage(cfg, &mut out)?,
        Command::Extract => extract(cfg, &mut out)?,
        Command::BaseForecast => base_forecast(cfg, &mut out)?,
        Command::TrainMeta => train_meta(cfg, &mut out)?,
        Command::Forecast => forecast(cfg, &mut out)?,
        Command::Evaluate => evaluate(cfg, &mut out)?,
        Command::Analyze => analyze(cfg, &mut out)?,
    }
    out.write(cfg)
}

/// Files and manifest facts collected by one stage.
struct StageOutput {
    stage: &'static str,
    facts: Vec<(String, String)>,
    files: Vec<(&'static str, String)>,
}

impl StageOutput {
    fn new(stage: &'static str) -> Self {
        Self {
            stage,
            facts: Vec::new(),
            files: Vec::new(),
        }
    }

    fn fact(&mut self, key: &str, value: impl ToString) {
        self.facts.push((key.to_string(), value.to_string()));
    }

    fn file(&mut self, name: &'static str, contents: String) {
        self.files.push((name, contents));
    }

    fn write(self, cfg: &RunConfig) -> Result<()> {
        let dir = stage_dir(cfg, self.stage);
        fs::create_dir_all(&dir)?;
        let mut manifest = format!("stage = {}\n", self.stage);
        for (k, v) in cfg.entries() {
            let _ = writeln!(manifest, "config.{k} = {v}");
        }
        for (k, v) in &self.facts {
            let _ = writeln!(manifest, "{k} = {v}");
        }
        for (name, contents) in &self.files {
            fs::write(dir.join(name), contents)?;
            let _ = writeln!(manifest, "artifact.{name}.sha256 = {}", sha256_hex(contents.as_bytes()));
        }
        fs::write(dir.join(MANIFEST), manifest)?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn stage_dir(cfg: &RunConfig, stage: &str) -> PathBuf {
    cfg.out.join(stage)
}

/// Reads an artifact of an earlier stage, naming that stage if it is absent.
fn read_artifact(cfg: &RunConfig, stage: &'static str, name: &str) -> Result<(String, String)> {
    let path = stage_dir(cfg, stage).join(name);
    if !path.is_file() {
        return Err(Error::MissingArtifact { path, stage });
    }
    let text = fs::read_to_string(&path)?;
    Ok((path.display().to_string(), text))
}

fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg
        .data
        .as_deref()
        .ok_or_else(|| Error::Config("no dataset: pass --data or set `data`".into()))?;
    ingest(path, cfg.format, cfg.period, cfg.horizon).map_err(|e| e.in_stage("ingest"))
}

fn training_regions(cfg: &RunConfig) -> Result<(Dataset, Vec<TrainSeries>)> {
    let dataset = load_dataset(cfg)?;
    let (train, _) = split(&dataset).map_err(|e| e.in_stage("split"))?;
    Ok((dataset, train))
}

fn load_extractor(cfg: &RunConfig) -> Result<TrainedExtractor> {
    let (source, text) = read_artifact(cfg, "train-extractor", "extractor.txt")?;
    TrainedExtractor::from_text(&source, &text)
}

/// Window parameters matching a trained extractor.
fn extractor_windows(cfg: &RunConfig, extractor: &TrainedExtractor, max_per_series: usize) -> WindowParams {
    let length = extractor.window_length();
    WindowParams {
        length,
        stride: cfg.stride.unwrap_or_else(|| default_stride(length)),
        max_per_series,
    }
}

fn window_facts(out: &mut StageOutput, params: &WindowParams) {
    out.fact("window.length", params.length);
    out.fact("window.stride", params.stride);
    out.fact("window.max_per_series", params.max_per_series);
}

fn ingest_check(cfg: &RunConfig, out: &mut StageOutput) -> Result<()> {
    let dataset = load_dataset(cfg)?;
    let (train, _) = split(&dataset).map_err(|e| e.in_stage("split"))?;
    let params = cfg.pipeline().window_params(&train);
    let mut csv = String::from("series_id,length,train_length,meta_eligible\n");
    for (s, t) in dataset.series.iter().zip(&train) {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            s.id,
            s.values.len(),
            t.values.len(),
            t.values.len() >= cfg.horizon + 2
        );
    }
    let lengths = dataset.series.iter().map(|s| s.values.len());
    out.fact("dataset.name", &dataset.name);
    out.fact("dataset.series", dataset.len());
    out.fact("dataset.min_length", lengths.clone().min().unwrap_or(0));
    out.fact("dataset.max_length", lengths.max().unwrap_or(0));
    window_facts(out, &params);
    out.file("series_summary.csv", csv);
    Ok(())
}

fn train_extractor_stage(cfg: &RunConfig, out: &mut StageOutput) -> Result<()> {
    let (_, train) = training_regions(cfg)?;
    let mut meta = meta_split(&train, cfg.horizon)?;
    let pipeline = cfg.pipeline();
    let params = pipeline.window_params(&meta.inner);
    let extractor = match &cfg.label_map {
        Some(path) => {
            let map = LabelMap::parse(&path.display().to_string(), fs::File::open(path)?)?;
            let names = map.apply(&mut meta.inner);
            out.fact("label_map.classes", names.len());
            train_labeled_extractor(&meta.inner, &names, &params, &pipeline)?
        }
        None => train_extractor(&meta.inner, &params, &pipeline)?,
    };
    let mut log = String::from("epoch,loss,accuracy\n");
    for e in &extractor.report.history {
        let _ = writeln!(log, "{},{:?},{:?}", e.epoch, e.loss, e.accuracy);
    }
    window_facts(out, &params);
    out.fact("extractor.classes", extractor.config.n_classes);
    out.fact("extractor.epochs_run", extractor.report.epochs_run);
    out.fact("extractor.final_loss", format!("{:?}", extractor.report.final_loss));
    out.fact("extractor.accuracy", format!("{:?}", extractor.report.accuracy));
    out.fact("meta.excluded", meta.excluded.join(" "));
    out.file("extractor.txt", extractor.to_text());
    out.file("training_log.csv", log);
    Ok(())
}

fn feature_header(n: usize) -> String {
    (1..=n).map(|j| format!(",f{j}")).collect()
}

fn extract(cfg: &RunConfig, out: &mut StageOutput) -> Result<()> {
    let extractor = load_extractor(cfg)?;
    let (_, train) = training_regions(cfg)?;
    let params = extractor_windows(cfg, &extractor, cfg.max_per_series);
    let grouped = extractor.extract_series(&train, &params, cfg.seed)?;
    let rows = grouped
        .iter()
        .map(|g| aggregate(g, cfg.aggregation).map(|f| f.values))
        .collect::<Result<Vec<_>>>()?;
    let matrix = FeatureMatrix {
        ids: train.iter().map(|s| s.id.clone()).collect(),
        rows,
        method: cfg.aggregation,
        transfer: train.iter().any(|s| !extractor.class_ids.contains(&s.id)),
    };
    let mut windows = format!("series_id,offset{}\n", feature_header(extractor.n_features()));
    for f in grouped.iter().flatten() {
        write_feature_row(&mut windows, f);
    }
    window_facts(out, &params);
    out.fact("aggregation", cfg.aggregation);
    out.fact("transfer", matrix.transfer);
    out.fact("windows", grouped.iter().map(Vec::len).sum::<usize>());
    out.file("features.csv", matrix.to_csv());
    out.file("window_features.csv", windows);
    Ok(())
}

fn write_feature_row(out: &mut String, f: &FeatureVector) {
    let _ = write!(out, "{},{}", f.series_id, f.window_offset.unwrap_or(0));
    for v in &f.values {
        let _ = write!(out, ",{v:?}");
    }
    out.push('\n');
}

fn forecasts_csv(sets: &[ForecastSet]) -> String {
    let mut csv = String::from("series_id,model,k,forecast\n");
    for set in sets {
        for (model, values) in &set.forecasts {
            for (k, v) in values.iter().enumerate() {
                let _ = writeln!(csv, "{},{},{},{v:?}", set.series_id, model, k + 1);
            }
        }
    }
    csv
}

fn fallbacks_csv(records: &[FallbackRecord]) -> String {
    let mut csv = String::from("series_id,stage,model,reason\n");
    for f in records {
        let _ = writeln!(csv, "{},{},{},\"{}\"", f.series_id, f.stage, f.model, f.reason.replace('"', "'"));
    }
    csv
}

fn test_fallbacks(sets: &[ForecastSet]) -> Vec<FallbackRecord> {
    sets.iter()
        .flat_map(|set| {
            set.fallbacks.iter().map(|(model, reason)| FallbackRecord {
                series_id: set.series_id.clone(),
                stage: "test",
                model: *model,
                reason: reason.clone(),
            })
        })
        .collect()
}

fn base_forecast(cfg: &RunConfig, out: &mut StageOutput) -> Result<()> {
    let (_, train) = training_regions(cfg)?;
    let sets = base_forecasts(&train, cfg.horizon, &cfg.pool)?;
    let fallbacks = test_fallbacks(&sets);
    out.fact("series", sets.len());
    out.fact("fallbacks", fallbacks.len());
    out.file("forecasts.csv", forecasts_csv(&sets));
    out.file("fallbacks.csv", fallbacks_csv(&fallbacks));
    Ok(())
}

/// Parses `forecasts.csv` back into per-series sets ordered by `pool`.
fn parse_forecasts(source: &str, text: &str, pool: &[Model]) -> Result<Vec<ForecastSet>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut order: Vec<String> = Vec::new();
    let mut table: HashMap<String, HashMap<Model, Vec<(usize, f64)>>> = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |msg: String| Error::Parse {
            path: source.to_string(),
            line,
            msg,
        };
        let (id, model, k, v) = match (record.get(0), record.get(1), record.get(2), record.get(3)) {
            (Some(id), Some(m), Some(k), Some(v)) => (id, m, k, v),
            _ => return Err(bad("expected series_id,model,k,forecast".into())),
        };
        let model: Model = model.parse().map_err(|e: Error| bad(e.to_string()))?;
        let k: usize = k.parse().map_err(|_| bad(format!("bad step {k:?}")))?;
        let v: f64 = v.parse().map_err(|_| bad(format!("bad forecast {v:?}")))?;
        if !table.contains_key(id) {
            order.push(id.to_string());
        }
        table.entry(id.to_string()).or_default().entry(model).or_default().push((k, v));
    }
    order
        .into_iter()
        .map(|id| {
            let by_model = &table[&id];
            let forecasts = pool
                .iter()
                .map(|m| {
                    let mut steps = by_model.get(m).cloned().ok_or_else(|| {
                        Error::InvalidInput(format!("{source}: no {m} forecast for {id}; rerun base-forecast"))
                    })?;
                    steps.sort_by_key(|(k, _)| *k);
                    Ok((*m, steps.into_iter().map(|(_, v)| v).collect::<Vec<_>>()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ForecastSet {
                series_id: id,
                horizon: forecasts.first().map_or(0, |(_, v)| v.len()),
                forecasts,
                fallbacks: Vec::new(),
            })
        })
        .collect()
}

fn train_meta(cfg: &RunConfig, out: &mut StageOutput) -> Result<()> {
    let extractor = load_extractor(cfg)?;
    let (_, train) = training_regions(cfg)?;
    let meta = meta_split(&train, cfg.horizon)?;
    let pipeline = cfg.pipeline();
    let params = extractor_windows(cfg, &extractor, cfg.max_per_series);
    let (instances, fallbacks) = meta_instances(&meta, &extractor, &params, &pipeline)?;
    let model = GbdtModel::fit(&instances, &pipeline.gbdt)?;

    let mut csv = format!("series_id{}", feature_header(extractor.n_features()));
    for m in &cfg.pool {
        let _ = write!(csv, ",smape_{m}");
    }
    csv.push('\n');
    for inst in &instances {
        csv.push_str(&inst.series_id);
        for v in inst.features.iter().chain(&inst.errors) {
            let _ = write!(csv, ",{v:?}");
        }
        csv.push('\n');
    }
    let mut loss = String::from("round,loss\n");
    for (r, l) in model.loss_history.iter().enumerate() {
        let _ = writeln!(loss, "{r},{l:?}");
    }
    window_facts(out, &params);
    out.fact("meta.instances", instances.len());
    out.fact("meta.excluded", meta.excluded.join(" "));
    out.fact("meta.fallbacks", fallbacks.len());
    out.file("meta_instances.csv", csv);
    out.file("meta_model.txt", model.to_text());
    out.file("meta_loss.csv", loss);
    Ok(())
}

fn weights_csv(ids: &[String], pool: &[Model], weights: &[Vec<f64>]) -> String {
    let mut csv = String::from("series_id,model,weight\n");
    for (id, w) in ids.iter().zip(weights) {
        for (m, v) in pool.iter().zip(w) {
            let _ = writeln!(csv, "{id},{m},{v:?}");
        }
    }
    csv
}

fn combined_csv(ids: &[String], combined: &[Vec<f64>]) -> String {
    let mut csv = String::from("series_id,k,forecast\n");
    for (id, f) in ids.iter().zip(combined) {
        for (k, v) in f.iter().enumerate() {
            let _ = writeln!(csv, "{id},{},{v:?}", k + 1);
        }
    }
    csv
}

fn forecast(cfg: &RunConfig, out: &mut StageOutput) -> Result<()> {
    let (source, text) = read_artifact(cfg, "train-meta", "meta_model.txt")?;
    let model = GbdtModel::from_text(&source, &text)?;
    let (source, text) = read_artifact(cfg, "extract", "features.csv")?;
    let features = FeatureMatrix::from_csv(&source, &text)?;
    let (source, text) = read_artifact(cfg, "base-forecast", "forecasts.csv")?;
    let sets = parse_forecasts(&source, &text, &cfg.pool)?;
    let set_ids: Vec<&String> = sets.iter().map(|s| &s.series_id).collect();
    if features.ids.iter().collect::<Vec<_>>() != set_ids {
        return Err(Error::InvalidInput(
            "features.csv and forecasts.csv list different series; rerun extract and base-forecast on the same data"
                .into(),
        ));
    }
    if model.n_outputs != cfg.pool.len() {
        return Err(Error::InvalidInput(format!(
            "meta model combines {} models but the pool has {}; rerun train-meta",
            model.n_outputs,
            cfg.pool.len()
        )));
    }
    let (weights, combined) = combine_all(&model, &features, &sets)?;
    out.fact("series", sets.len());
    out.file("weights.csv", weights_csv(&features.ids, &cfg.pool, &weights));
    out.file("combined_forecasts.csv", combined_csv(&features.ids, &combined));
    Ok(())
}

fn evaluate(cfg: &RunConfig, out: &mut StageOutput) -> Result<()> {
    let dataset = load_dataset(cfg)?;
    let result = run_pipeline(&dataset, &cfg.pipeline())?;
    let report = &result.report;
    window_facts(out, &result.meta.window_params);
    out.fact("dataset.series", dataset.len());
    out.fact("extractor.epochs_run", result.meta.extractor.report.epochs_run);
    out.fact("extractor.accuracy", format!("{:?}", result.meta.extractor.report.accuracy));
    out.fact("features.transfer", result.features.transfer);
    out.fact("meta.instances", result.meta.instances.len());
    out.fact("smape.zero_zero_terms", report.zero_zero_terms);
    for (m, v) in report.methods.iter().zip(&report.mean) {
        out.fact(&format!("smape.mean.{m}"), format!("{v:?}"));
    }
    out.file("per_series_smape.csv", report.per_series_csv());
    out.file("summary.csv", report.summary_csv());
    out.file("fallbacks.csv", report.fallback_csv());
    out.file("weights.csv", weights_csv(&report.ids, &cfg.pool, &result.weights));
    out.file("combined_forecasts.csv", combined_csv(&report.ids, &result.combined));
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:?}"))
}

fn analyze(cfg: &RunConfig, out: &mut StageOutput) -> Result<()> {
    let extractor = load_extractor(cfg)?;
    let (_, train) = training_regions(cfg)?;
    let n_features = extractor.n_features();
    let params = extractor_windows(cfg, &extractor, cfg.analysis_windows);
    let grouped = extractor.extract_series(&train, &params, cfg.seed)?;

    let records = stability(&grouped);
    let mut csv = format!("series_id,windows,flagged,aggregate{}\n", feature_header(n_features));
    for r in &records {
        let _ = write!(csv, "{},{},{},{}", r.series_id, r.windows, r.flagged, opt(r.aggregate));
        for v in &r.ratios {
            let _ = write!(csv, ",{}", opt(*v));
        }
        csv.push('\n');
    }
    out.file("stability.csv", csv);
    let mut csv = String::from("lower,upper,count\n");
    for b in stability_histogram(&records, HISTOGRAM_BINS, HISTOGRAM_MAX) {
        let _ = writeln!(csv, "{:?},{:?},{}", b.lower, b.upper, b.count);
    }
    out.file("stability_histogram.csv", csv);

    let ids: Vec<String> = train.iter().map(|s| s.id.clone()).collect();
    let rows = grouped
        .iter()
        .map(|g| aggregate(g, cfg.aggregation).map(|f| f.values))
        .collect::<Result<Vec<_>>>()?;
    let n = rows.len();

    if n >= 3 {
        let k_max = cfg.analysis_k_max.min(n - 1);
        let mut csv = String::from("k,inertia,silhouette\n");
        if k_max >= 2 {
            for row in elbow_sweep(&rows, 2..=k_max, cfg.restarts, cfg.seed)? {
                let _ = writeln!(csv, "{},{:?},{:?}", row.k, row.inertia, row.silhouette);
            }
        }
        out.file("elbow.csv", csv);
    }

    let k = cfg.analysis_k.clamp(2, n.max(2));
    let clusters = kmeans_pp(&rows, k, cfg.restarts, cfg.seed)?;
    let mut csv = String::from("series_id,cluster\n");
    for (id, c) in ids.iter().zip(&clusters.assignments) {
        let _ = writeln!(csv, "{id},{c}");
    }
    out.file("clusters.csv", csv);
    let mut csv = format!("cluster,statistic{}\n", feature_header(n_features));
    for (c, (mean, std)) in clusters.cluster_means.iter().zip(&clusters.cluster_stds).enumerate() {
        for (stat, values) in [("mean", mean), ("std", std)] {
            let _ = write!(csv, "{c},{stat}");
            for v in values {
                let _ = write!(csv, ",{v:?}");
            }
            csv.push('\n');
        }
    }
    out.file("cluster_profile.csv", csv);
    out.fact("clusters.k", k);
    out.fact("clusters.inertia", format!("{:?}", clusters.inertia));
    out.fact("clusters.silhouette", format!("{:?}", clusters.silhouette));

    let projection = pca_2d(&rows)?;
    let mut csv = String::from("series_id,pc1,pc2\n");
    for (id, c) in ids.iter().zip(&projection.coords) {
        let _ = writeln!(csv, "{id},{:?},{:?}", c[0], c[1]);
    }
    out.file("pca.csv", csv);
    out.fact("pca.rank_deficient", projection.rank_deficient);

    // A 3x3 grid of region centres over the projection's bounding box, each
    // with its nearest series, for picking examples by eye.
    let (lo, hi) = projection.coords.iter().fold(
        ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
        |(lo, hi), c| ([lo[0].min(c[0]), lo[1].min(c[1])], [hi[0].max(c[0]), hi[1].max(c[1])]),
    );
    let centres: Vec<[f64; 2]> = (0..3)
        .flat_map(|r| {
            (0..3).map(move |c| {
                [
                    lo[0] + (hi[0] - lo[0]) * (c as f64 + 0.5) / 3.0,
                    lo[1] + (hi[1] - lo[1]) * (r as f64 + 0.5) / 3.0,
                ]
            })
        })
        .collect();
    let mut csv = String::from("region,centre_pc1,centre_pc2,nearest_series\n");
    for (i, (centre, idx)) in centres.iter().zip(nearest_rows(&projection.coords, &centres)).enumerate() {
        let _ = writeln!(csv, "{i},{:?},{:?},{}", centre[0], centre[1], ids[idx]);
    }
    out.file("regions.csv", csv);

    let (closest, farthest) = similarity_extremes(&ids, &rows)?;
    let mut csv = String::from("kind,first,second,distance\n");
    for (kind, p) in [("closest", &closest), ("farthest", &farthest)] {
        let _ = writeln!(csv, "{kind},{},{},{:?}", p.first, p.second, p.distance);
    }
    out.file("extremes.csv", csv);

    window_facts(out, &params);
    out.fact("aggregation", cfg.aggregation);
    out.fact("stability.flagged", records.iter().filter(|r| r.flagged).count());
    out.fact("transfer", train.iter().any(|s| !extractor.class_ids.contains(&s.id)));
    Ok(())
}
