//! Window classifier whose penultimate layer is the feature extractor.
//!
//! Every series is a class; the network learns to tell windows of different
//! series apart. After training the output layer is dropped and the
//! `n_features`-wide linear layer underneath becomes the network output.
//! Per-series static features are the mean or medoid of the window features.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::data::{series_windows, TrainSeries, Window, WindowParams};
use crate::error::{Error, Result};
use crate::nn::io::{f64_to_hex, read_sequential, write_sequential, Lines};
use crate::nn::{
    sparse_xent_loss, Adam, AdamConfig, BatchNorm, Conv1d, Dense, GlobalAvgPool, Layer, Relu,
    Sequential, Tensor,
};
use crate::rng;

const FORMAT_TAG: &str = "tsfeat-extractor v1";
const INFER_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvBlock {
    pub filters: usize,
    pub kernel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub n_classes: usize,
    pub window_length: usize,
    pub n_features: usize,
    pub blocks: Vec<ConvBlock>,
}

/// FCN convolution stack: 128x8, 256x5, 128x3.
pub fn fcn_blocks() -> Vec<ConvBlock> {
    vec![
        ConvBlock { filters: 128, kernel: 8 },
        ConvBlock { filters: 256, kernel: 5 },
        ConvBlock { filters: 128, kernel: 3 },
    ]
}

pub fn format_blocks(blocks: &[ConvBlock]) -> String {
    blocks
        .iter()
        .map(|b| format!("{}x{}", b.filters, b.kernel))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_blocks(s: &str) -> Result<Vec<ConvBlock>> {
    s.split(',')
        .map(|part| {
            let (f, k) = part
                .trim()
                .split_once('x')
                .ok_or_else(|| Error::Config(format!("conv block {part:?} is not FILTERSxKERNEL")))?;
            let filters = f.parse().map_err(|_| Error::Config(format!("bad filter count in {part:?}")))?;
            let kernel = k.parse().map_err(|_| Error::Config(format!("bad kernel size in {part:?}")))?;
            if filters == 0 || kernel == 0 {
                return Err(Error::Config(format!("conv block {part:?} must be positive")));
            }
            Ok(ConvBlock { filters, kernel })
        })
        .collect()
}

impl NetworkConfig {
    pub fn new(n_classes: usize, window_length: usize) -> Self {
        Self {
            n_classes,
            window_length,
            n_features: 16,
            blocks: fcn_blocks(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::InvalidInput(format!(
                "a classifier needs at least 2 classes, got {}",
                self.n_classes
            )));
        }
        if self.n_features < 2 {
            return Err(Error::InvalidInput("n_features must be at least 2".into()));
        }
        if self.blocks.is_empty() {
            return Err(Error::InvalidInput("at least one convolution block is required".into()));
        }
        if self.window_length < 4 {
            return Err(Error::InvalidInput("window length must be at least 4".into()));
        }
        Ok(())
    }

    /// Conv/BN/ReLU blocks, global average pooling, then the linear feature
    /// layer, followed by the output layer as the final entry.
    pub fn build(&self, seed: u64) -> Sequential {
        let mut r = rng::stream(seed, "init");
        let mut layers = Vec::new();
        let mut channels = 1;
        for block in &self.blocks {
            layers.push(Layer::Conv1d(Conv1d::new(channels, block.filters, block.kernel, &mut r)));
            layers.push(Layer::BatchNorm(BatchNorm::new(block.filters)));
            layers.push(Layer::Relu(Relu::default()));
            channels = block.filters;
        }
        layers.push(Layer::GlobalAvgPool(GlobalAvgPool::default()));
        layers.push(Layer::Dense(Dense::new(channels, self.n_features, &mut r)));
        layers.push(Layer::Dense(Dense::new(self.n_features, self.n_classes, &mut r)));
        Sequential::new(layers)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Stop after this many consecutive epochs improving by less than `min_delta`.
    pub patience: usize,
    pub min_delta: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 128,
            adam: AdamConfig::default(),
            patience: 10,
            min_delta: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    pub final_loss: f64,
    /// Inference-mode accuracy over all training windows after training.
    pub accuracy: f64,
    pub epochs_run: usize,
    pub seed: u64,
    pub history: Vec<EpochLog>,
}

#[derive(Debug, Clone)]
pub struct TrainedExtractor {
    pub config: NetworkConfig,
    /// Everything up to and including the feature layer.
    body: Sequential,
    head: Dense,
    pub report: TrainingReport,
    /// Series ids of the training classes, by class index.
    pub class_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Window,
    Mean,
    Medoid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub series_id: String,
    pub kind: FeatureKind,
    pub values: Vec<f64>,
    /// Source window; for a medoid, the chosen window. `None` for a mean.
    pub window_offset: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Mean,
    Medoid,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "medoid" => Ok(Aggregation::Medoid),
            other => Err(Error::Config(format!("unknown aggregation {other:?}"))),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Mean => "mean",
            Aggregation::Medoid => "medoid",
        })
    }
}

/// One static feature row per series, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub method: Aggregation,
    /// Some series were not classes of the extractor.
    pub transfer: bool,
}

impl FeatureMatrix {
    pub fn n_features(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("series_id");
        for j in 1..=self.n_features() {
            out.push_str(&format!(",f{j}"));
        }
        out.push('\n');
        for (id, row) in self.ids.iter().zip(&self.rows) {
            out.push_str(id);
            for v in row {
                out.push_str(&format!(",{v:?}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(source: &str, text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let mut it = record.iter();
            ids.push(it.next().unwrap_or("").to_string());
            let row = it
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::Parse {
                        path: source.to_string(),
                        line,
                        msg: format!("non-numeric feature {v:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self {
            ids,
            rows,
            method: Aggregation::Mean,
            transfer: false,
        })
    }
}

fn windows_tensor(windows: &[&[f64]], length: usize) -> Result<Tensor> {
    let mut data = Vec::with_capacity(windows.len() * length);
    for (i, w) in windows.iter().enumerate() {
        if w.len() != length {
            return Err(Error::shape(
                "window batch",
                format!("window {i} has length {}, extractor expects {length}", w.len()),
            ));
        }
        data.extend_from_slice(w);
    }
    Tensor::new(vec![windows.len(), 1, length], data)
}

/// Class-capped epoch order: each class contributes at most the median class
/// count, then everything is shuffled.
fn epoch_order(by_class: &[Vec<usize>], cap: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let mut order = Vec::new();
    for members in by_class {
        let mut m = members.clone();
        m.shuffle(rng);
        m.truncate(cap);
        order.extend(m);
    }
    order.shuffle(rng);
    order
}

fn batches(order: &[usize], batch_size: usize) -> Vec<&[usize]> {
    let mut out: Vec<&[usize]> = order.chunks(batch_size).collect();
    // Batch norm needs two samples; fold a trailing singleton into its predecessor.
    if out.len() >= 2 && out.last().map(|b| b.len()) == Some(1) {
        out.pop();
        let n = out.len();
        let start = (n - 1) * batch_size;
        out[n - 1] = &order[start..];
    }
    out
}

pub fn train(
    windows: &[Window],
    class_ids: &[String],
    config: &NetworkConfig,
    train_config: &TrainConfig,
) -> Result<TrainedExtractor> {
    config.validate()?;
    if class_ids.len() != config.n_classes {
        return Err(Error::InvalidInput(format!(
            "{} class ids for {} classes",
            class_ids.len(),
            config.n_classes
        )));
    }
    if train_config.batch_size < 2 {
        return Err(Error::InvalidInput("batch size must be at least 2".into()));
    }
    let mut by_class = vec![Vec::new(); config.n_classes];
    for (i, w) in windows.iter().enumerate() {
        if w.values.len() != config.window_length {
            return Err(Error::shape(
                "training windows",
                format!("window {i} has length {}, expected {}", w.values.len(), config.window_length),
            ));
        }
        by_class
            .get_mut(w.class_index)
            .ok_or_else(|| Error::InvalidInput(format!("window {i} has class {} out of range", w.class_index)))?
            .push(i);
    }
    if let Some(c) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::InvalidInput(format!("class {c} ({}) has no windows", class_ids[c])));
    }
    let mut counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
    counts.sort_unstable();
    let cap = counts[(counts.len() - 1) / 2];

    let mut net = config.build(train_config.seed);
    let mut adam = Adam::new(train_config.adam.clone());
    let mut batch_rng = rng::stream(train_config.seed, "batching");
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut stalled = 0;

    for epoch in 1..=train_config.epochs {
        let order = epoch_order(&by_class, cap, &mut batch_rng);
        let (mut loss_sum, mut correct, mut seen) = (0.0, 0usize, 0usize);
        for (b, batch) in batches(&order, train_config.batch_size).into_iter().enumerate() {
            let rows: Vec<&[f64]> = batch.iter().map(|&i| windows[i].values.as_slice()).collect();
            let labels: Vec<usize> = batch.iter().map(|&i| windows[i].class_index).collect();
            let x = windows_tensor(&rows, config.window_length)?;
            let logits = net.forward_train(&x)?;
            let (loss, grad) = sparse_xent_loss(&logits, &labels)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, batch: b });
            }
            correct += count_correct(&logits, &labels);
            net.backward(&grad)?;
            adam.step(net.params_mut())
                .map_err(|_| Error::Diverged { epoch, batch: b })?;
            loss_sum += loss * batch.len() as f64;
            seen += batch.len();
        }
        let loss = loss_sum / seen as f64;
        let accuracy = correct as f64 / seen as f64;
        log::info!("epoch {epoch} loss {loss:.6} accuracy {accuracy:.4}");
        history.push(EpochLog { epoch, loss, accuracy });
        if best - loss < train_config.min_delta {
            stalled += 1;
        } else {
            stalled = 0;
        }
        best = best.min(loss);
        if stalled >= train_config.patience {
            break;
        }
    }

    let head = match net.layers.pop() {
        Some(Layer::Dense(d)) => d,
        _ => unreachable!("classifier ends in a dense layer"),
    };
    let mut extractor = TrainedExtractor {
        config: config.clone(),
        body: net,
        head,
        report: TrainingReport {
            final_loss: history.last().map_or(f64::NAN, |h| h.loss),
            accuracy: 0.0,
            epochs_run: history.len(),
            seed: train_config.seed,
            history,
        },
        class_ids: class_ids.to_vec(),
    };
    extractor.report.accuracy = extractor.accuracy(windows)?;
    Ok(extractor)
}

fn count_correct(logits: &Tensor, labels: &[usize]) -> usize {
    let classes = logits.dim(1);
    logits
        .data()
        .chunks(classes)
        .zip(labels)
        .filter(|(row, &label)| argmax(row) == label)
        .count()
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

impl TrainedExtractor {
    pub fn n_features(&self) -> usize {
        self.config.n_features
    }

    pub fn window_length(&self) -> usize {
        self.config.window_length
    }

    /// The full classifier (feature network plus output layer).
    pub fn classifier(&self) -> Sequential {
        let mut net = self.body.clone();
        net.layers.push(Layer::Dense(self.head.clone()));
        net
    }

    /// The decapitated network.
    pub fn feature_network(&self) -> &Sequential {
        &self.body
    }

    pub fn logits(&self, windows: &[&[f64]]) -> Result<Tensor> {
        let features = self.window_features(windows)?;
        self.head.infer(&Tensor::from_rows(&features)?)
    }

    /// Inference-mode classification accuracy.
    pub fn accuracy(&self, windows: &[Window]) -> Result<f64> {
        let rows: Vec<&[f64]> = windows.iter().map(|w| w.values.as_slice()).collect();
        let labels: Vec<usize> = windows.iter().map(|w| w.class_index).collect();
        let logits = self.logits(&rows)?;
        Ok(count_correct(&logits, &labels) as f64 / windows.len().max(1) as f64)
    }

    /// Feature-layer activations for each window, in input order.
    pub fn window_features(&self, windows: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let length = self.config.window_length;
        let chunks: Vec<Result<Tensor>> = windows
            .par_chunks(INFER_CHUNK)
            .map(|chunk| self.body.infer(&windows_tensor(chunk, length)?))
            .collect();
        let mut out = Vec::with_capacity(windows.len());
        for chunk in chunks {
            let t = chunk?;
            out.extend(t.data().chunks(self.config.n_features).map(<[f64]>::to_vec));
        }
        Ok(out)
    }

    pub fn extract_window_features(&self, series_id: &str, windows: &[Window]) -> Result<Vec<FeatureVector>> {
        let rows: Vec<&[f64]> = windows.iter().map(|w| w.values.as_slice()).collect();
        Ok(self
            .window_features(&rows)?
            .into_iter()
            .zip(windows)
            .map(|(values, w)| FeatureVector {
                series_id: series_id.to_string(),
                kind: FeatureKind::Window,
                values,
                window_offset: Some(w.start),
            })
            .collect())
    }

    /// Window features grouped by series, in series order.
    pub fn extract_series(
        &self,
        series: &[TrainSeries],
        params: &WindowParams,
        seed: u64,
    ) -> Result<Vec<Vec<FeatureVector>>> {
        if params.length != self.config.window_length {
            return Err(Error::shape(
                "extract",
                format!(
                    "window length {} does not match extractor length {}",
                    params.length, self.config.window_length
                ),
            ));
        }
        let per_series: Vec<Vec<Window>> = series.iter().map(|s| series_windows(s, params, seed)).collect();
        let rows: Vec<&[f64]> = per_series.iter().flatten().map(|w| w.values.as_slice()).collect();
        let mut features = self.window_features(&rows)?.into_iter();
        Ok(series
            .iter()
            .zip(&per_series)
            .map(|(s, windows)| {
                windows
                    .iter()
                    .map(|w| FeatureVector {
                        series_id: s.id.clone(),
                        kind: FeatureKind::Window,
                        values: features.next().expect("one feature row per window"),
                        window_offset: Some(w.start),
                    })
                    .collect()
            })
            .collect())
    }

    pub fn extract_static_features(
        &self,
        series: &[TrainSeries],
        params: &WindowParams,
        seed: u64,
        method: Aggregation,
    ) -> Result<FeatureMatrix> {
        let grouped = self.extract_series(series, params, seed)?;
        let rows = grouped
            .iter()
            .map(|g| aggregate(g, method).map(|f| f.values))
            .collect::<Result<Vec<_>>>()?;
        let transfer = series.iter().any(|s| !self.class_ids.contains(&s.id));
        Ok(FeatureMatrix {
            ids: series.iter().map(|s| s.id.clone()).collect(),
            rows,
            method,
            transfer,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(FORMAT_TAG);
        out.push('\n');
        out.push_str(&format!(
            "config n_classes={} window_length={} n_features={} blocks={}\n",
            self.config.n_classes,
            self.config.window_length,
            self.config.n_features,
            format_blocks(&self.config.blocks)
        ));
        out.push_str(&format!(
            "report final_loss={} accuracy={} epochs_run={} seed={}\n",
            f64_to_hex(self.report.final_loss),
            f64_to_hex(self.report.accuracy),
            self.report.epochs_run,
            self.report.seed
        ));
        out.push_str(&format!("classes {}\n", self.class_ids.len()));
        for id in &self.class_ids {
            out.push_str(&format!("class {id}\n"));
        }
        out.push_str("body\n");
        write_sequential(&mut out, &self.body);
        out.push_str("head\n");
        write_sequential(&mut out, &Sequential::new(vec![Layer::Dense(self.head.clone())]));
        out
    }

    pub fn from_text(source: &str, text: &str) -> Result<Self> {
        let mut lines = Lines::new(source, text);
        if lines.next_line()? != FORMAT_TAG {
            return Err(lines.error(format!("not a `{FORMAT_TAG}` file")));
        }
        let cfg_line = lines.next_line()?;
        let cfg = lines.fields(cfg_line, 1)?;
        let config = NetworkConfig {
            n_classes: lines.usize_field(&cfg, "n_classes")?,
            window_length: lines.usize_field(&cfg, "window_length")?,
            n_features: lines.usize_field(&cfg, "n_features")?,
            blocks: parse_blocks(cfg.get("blocks").copied().unwrap_or(""))
                .map_err(|e| lines.error(e.to_string()))?,
        };
        let rep_line = lines.next_line()?;
        let rep = lines.fields(rep_line, 1)?;
        let report = TrainingReport {
            final_loss: lines.hex_field(&rep, "final_loss")?,
            accuracy: lines.hex_field(&rep, "accuracy")?,
            epochs_run: lines.usize_field(&rep, "epochs_run")?,
            seed: rep
                .get("seed")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| lines.error("missing seed"))?,
            history: Vec::new(),
        };
        let n: usize = lines
            .next_line()?
            .strip_prefix("classes ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| lines.error("expected `classes <n>`"))?;
        let mut class_ids = Vec::with_capacity(n);
        for _ in 0..n {
            let l = lines.next_line()?;
            class_ids.push(
                l.strip_prefix("class ")
                    .ok_or_else(|| lines.error("expected `class <id>`"))?
                    .to_string(),
            );
        }
        if lines.next_line()? != "body" {
            return Err(lines.error("expected `body`"));
        }
        let body = read_sequential(&mut lines)?;
        if lines.next_line()? != "head" {
            return Err(lines.error("expected `head`"));
        }
        let mut head_net = read_sequential(&mut lines)?;
        let head = match head_net.layers.pop() {
            Some(Layer::Dense(d)) if head_net.layers.is_empty() => d,
            _ => return Err(lines.error("head must be a single dense layer")),
        };
        Ok(Self {
            config,
            body,
            head,
            report,
            class_ids,
        })
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean or medoid of one series' window features. The medoid minimizes the
/// summed Euclidean distance to the other members; ties go to the lowest
/// window offset.
pub fn aggregate(features: &[FeatureVector], method: Aggregation) -> Result<FeatureVector> {
    let first = features
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot aggregate an empty feature set".into()))?;
    let dim = first.values.len();
    if features.iter().any(|f| f.values.len() != dim) {
        return Err(Error::shape("aggregate", "feature vectors differ in length"));
    }
    let (values, window_offset) = match method {
        Aggregation::Mean => {
            let mut mean = vec![0.0; dim];
            for f in features {
                for (m, v) in mean.iter_mut().zip(&f.values) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= features.len() as f64);
            (mean, None)
        }
        Aggregation::Medoid => {
            let mut order: Vec<usize> = (0..features.len()).collect();
            order.sort_by_key(|&i| (features[i].window_offset.unwrap_or(usize::MAX), i));
            let mut best = (f64::INFINITY, order[0]);
            for &i in &order {
                let total: f64 = features
                    .iter()
                    .map(|other| euclidean(&features[i].values, &other.values))
                    .sum();
                if total < best.0 {
                    best = (total, i);
                }
            }
            (features[best.1].values.clone(), features[best.1].window_offset)
        }
    };
    Ok(FeatureVector {
        series_id: first.series_id.clone(),
        kind: match method {
            Aggregation::Mean => FeatureKind::Mean,
            Aggregation::Medoid => FeatureKind::Medoid,
        },
        values,
        window_offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(offset: usize, values: Vec<f64>) -> FeatureVector {
        FeatureVector {
            series_id: "s".into(),
            kind: FeatureKind::Window,
            values,
            window_offset: Some(offset),
        }
    }

    #[test]
    fn single_window_aggregates_to_itself() {
        let f = vec![fv(3, vec![1.0, -2.0])];
        assert_eq!(aggregate(&f, Aggregation::Mean).unwrap().values, vec![1.0, -2.0]);
        assert_eq!(aggregate(&f, Aggregation::Medoid).unwrap().values, vec![1.0, -2.0]);
    }

    #[test]
    fn two_windows_midpoint_and_tie_rule() {
        let f = vec![fv(8, vec![4.0, 0.0]), fv(2, vec![0.0, 2.0])];
        assert_eq!(aggregate(&f, Aggregation::Mean).unwrap().values, vec![2.0, 1.0]);
        assert_eq!(aggregate(&f, Aggregation::Medoid).unwrap().values, vec![0.0, 2.0]);
    }

    #[test]
    fn empty_aggregate_errors() {
        assert!(aggregate(&[], Aggregation::Mean).is_err());
    }

    #[test]
    fn block_spec_round_trip() {
        let b = parse_blocks("128x8,256x5,128x3").unwrap();
        assert_eq!(b, fcn_blocks());
        assert_eq!(format_blocks(&b), "128x8,256x5,128x3");
        assert!(parse_blocks("12").is_err());
    }

    #[test]
    fn batches_fold_trailing_singleton() {
        let order: Vec<usize> = (0..9).collect();
        let b = batches(&order, 4);
        assert_eq!(b.len(), 2);
        assert_eq!(b[1], &[4, 5, 6, 7, 8]);
        assert_eq!(batches(&order, 3).len(), 3);
    }

    #[test]
    fn one_class_is_rejected() {
        let cfg = NetworkConfig::new(1, 8);
        let w = vec![Window { class_index: 0, start: 0, values: vec![0.0; 8], norm_mean: 0.0, norm_std: 0.0 }];
        assert!(train(&w, &["a".into()], &cfg, &TrainConfig::default()).is_err());
    }
}
