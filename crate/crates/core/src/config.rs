//! Run configuration as flat `key = value` text.
//!
//! Precedence: command-line overrides, then the config file, then the
//! built-in defaults. Unknown keys are rejected everywhere.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::data::{InputFormat, DEFAULT_MAX_WINDOWS};
use crate::error::{Error, Result};
use crate::evaluation::PipelineConfig;
use crate::extractor::{format_blocks, parse_blocks, Aggregation, ConvBlock, TrainConfig};
use crate::forecasters::{parse_pool, Model};
use crate::metalearner::GbdtParams;
use crate::nn::AdamConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub format: InputFormat,
    pub label_map: Option<PathBuf>,
    pub period: usize,
    pub horizon: usize,
    pub window_length: Option<usize>,
    pub stride: Option<usize>,
    pub max_per_series: usize,
    pub n_features: usize,
    pub conv_blocks: Vec<ConvBlock>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub min_delta: f64,
    pub rounds: usize,
    pub max_depth: usize,
    pub eta: f64,
    pub lambda: f64,
    pub min_child: usize,
    pub aggregation: Aggregation,
    pub pool: Vec<Model>,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: usize,
    pub analysis_windows: usize,
    pub analysis_k: usize,
    pub analysis_k_max: usize,
    pub restarts: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let pipeline = PipelineConfig::default();
        Self {
            data: None,
            format: InputFormat::LongCsv,
            label_map: None,
            period: 1,
            horizon: 8,
            window_length: None,
            stride: None,
            max_per_series: DEFAULT_MAX_WINDOWS,
            n_features: pipeline.n_features,
            conv_blocks: pipeline.blocks,
            epochs: pipeline.train.epochs,
            batch_size: pipeline.train.batch_size,
            learning_rate: pipeline.train.adam.learning_rate,
            patience: pipeline.train.patience,
            min_delta: pipeline.train.min_delta,
            rounds: pipeline.gbdt.rounds,
            max_depth: pipeline.gbdt.max_depth,
            eta: pipeline.gbdt.eta,
            lambda: pipeline.gbdt.lambda,
            min_child: pipeline.gbdt.min_child,
            aggregation: pipeline.aggregation,
            pool: pipeline.pool,
            seed: 0,
            out: PathBuf::from("out"),
            threads: 1,
            analysis_windows: 10,
            analysis_k: 3,
            analysis_k_max: 10,
            restarts: 10,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_auto(key: &str, value: &str) -> Result<Option<usize>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

fn auto(v: Option<usize>) -> String {
    v.map_or_else(|| "auto".to_string(), |v| v.to_string())
}

impl RunConfig {
    pub const KEYS: [&'static str; 29] = [
        "data",
        "format",
        "label_map",
        "m",
        "horizon",
        "window_length",
        "stride",
        "max_per_series",
        "n_features",
        "conv_blocks",
        "epochs",
        "batch_size",
        "lr",
        "patience",
        "min_delta",
        "rounds",
        "max_depth",
        "eta",
        "lambda",
        "min_child",
        "aggregation",
        "pool",
        "seed",
        "out",
        "threads",
        "analysis_windows",
        "analysis_k",
        "analysis_k_max",
        "restarts",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "data" => self.data = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "label_map" => self.label_map = (!value.is_empty()).then(|| PathBuf::from(value)),
            "m" => self.period = parse_num(key, value)?,
            "horizon" => self.horizon = parse_num(key, value)?,
            "window_length" => self.window_length = parse_auto(key, value)?,
            "stride" => self.stride = parse_auto(key, value)?,
            "max_per_series" => self.max_per_series = parse_num(key, value)?,
            "n_features" => self.n_features = parse_num(key, value)?,
            "conv_blocks" => self.conv_blocks = parse_blocks(value)?,
            "epochs" => self.epochs = parse_num(key, value)?,
            "batch_size" => self.batch_size = parse_num(key, value)?,
            "lr" => self.learning_rate = parse_num(key, value)?,
            "patience" => self.patience = parse_num(key, value)?,
            "min_delta" => self.min_delta = parse_num(key, value)?,
            "rounds" => self.rounds = parse_num(key, value)?,
            "max_depth" => self.max_depth = parse_num(key, value)?,
            "eta" => self.eta = parse_num(key, value)?,
            "lambda" => self.lambda = parse_num(key, value)?,
            "min_child" => self.min_child = parse_num(key, value)?,
            "aggregation" => self.aggregation = value.parse()?,
            "pool" => self.pool = parse_pool(value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "threads" => self.threads = parse_num(key, value)?,
            "analysis_windows" => self.analysis_windows = parse_num(key, value)?,
            "analysis_k" => self.analysis_k = parse_num(key, value)?,
            "analysis_k_max" => self.analysis_k_max = parse_num(key, value)?,
            "restarts" => self.restarts = parse_num(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file; `#` starts a comment.
    pub fn apply_text(&mut self, source: &str, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: source.to_string(),
                line: i + 1,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            self.set(key.trim(), value).map_err(|e| Error::Parse {
                path: source.to_string(),
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.pool.is_empty() {
            return Err(Error::Config("pool must name at least one model".into()));
        }
        Ok(())
    }

    /// Effective configuration, one `key = value` per line, in key order.
    pub fn entries(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("data", self.data.as_ref().map_or_else(String::new, |p| p.display().to_string()));
        m.insert("format", self.format.to_string());
        m.insert("label_map", self.label_map.as_ref().map_or_else(String::new, |p| p.display().to_string()));
        m.insert("m", self.period.to_string());
        m.insert("horizon", self.horizon.to_string());
        m.insert("window_length", auto(self.window_length));
        m.insert("stride", auto(self.stride));
        m.insert("max_per_series", self.max_per_series.to_string());
        m.insert("n_features", self.n_features.to_string());
        m.insert("conv_blocks", format_blocks(&self.conv_blocks));
        m.insert("epochs", self.epochs.to_string());
        m.insert("batch_size", self.batch_size.to_string());
        m.insert("lr", format!("{:?}", self.learning_rate));
        m.insert("patience", self.patience.to_string());
        m.insert("min_delta", format!("{:?}", self.min_delta));
        m.insert("rounds", self.rounds.to_string());
        m.insert("max_depth", self.max_depth.to_string());
        m.insert("eta", format!("{:?}", self.eta));
        m.insert("lambda", format!("{:?}", self.lambda));
        m.insert("min_child", self.min_child.to_string());
        m.insert("aggregation", self.aggregation.to_string());
        m.insert(
            "pool",
            self.pool.iter().map(|p| p.name()).collect::<Vec<_>>().join(","),
        );
        m.insert("seed", self.seed.to_string());
        m.insert("out", self.out.display().to_string());
        m.insert("threads", self.threads.to_string());
        m.insert("analysis_windows", self.analysis_windows.to_string());
        m.insert("analysis_k", self.analysis_k.to_string());
        m.insert("analysis_k_max", self.analysis_k_max.to_string());
        m.insert("restarts", self.restarts.to_string());
        m
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            window_length: self.window_length,
            stride: self.stride,
            max_per_series: self.max_per_series,
            n_features: self.n_features,
            blocks: self.conv_blocks.clone(),
            train: TrainConfig {
                epochs: self.epochs,
                batch_size: self.batch_size,
                adam: AdamConfig {
                    learning_rate: self.learning_rate,
                    ..AdamConfig::default()
                },
                patience: self.patience,
                min_delta: self.min_delta,
                seed: self.seed,
            },
            gbdt: GbdtParams {
                rounds: self.rounds,
                max_depth: self.max_depth,
                eta: self.eta,
                lambda: self.lambda,
                min_child: self.min_child,
            },
            aggregation: self.aggregation,
            pool: self.pool.clone(),
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_key_round_trips_through_entries() {
        let cfg = RunConfig::default();
        let entries = cfg.entries();
        assert_eq!(entries.len(), RunConfig::KEYS.len());
        let mut again = RunConfig::default();
        for (k, v) in &entries {
            if !v.is_empty() {
                again.set(k, v).unwrap();
            }
        }
        assert_eq!(again, cfg);
    }

    #[test]
    fn file_values_and_unknown_keys() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("c", "# comment\nm = 12\nhorizon=18 # trailing\nwindow_length = auto\n").unwrap();
        assert_eq!((cfg.period, cfg.horizon, cfg.window_length), (12, 18, None));
        let err = cfg.apply_text("c", "\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(cfg.apply_text("c", "epochs 5\n").is_err());
    }
}
