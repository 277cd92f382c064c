//! Datasets, train/test splitting and labeled sliding windows.
//!
//! Every series is its own class: windows cut from series `i` carry class
//! index `i` unless a label map groups several series into one class.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub id: String,
    pub values: Vec<f64>,
    /// Seasonal period (12 monthly, 7 daily with weekly cycle, 1 none).
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub series: Vec<TimeSeries>,
    pub horizon: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// Header `series_id,value`, rows in temporal order per id.
    LongCsv,
    /// One line per series: `id,v1,v2,...`.
    Wide,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "long" | "long-csv" => Ok(InputFormat::LongCsv),
            "wide" | "one-row-per-series" => Ok(InputFormat::Wide),
            other => Err(Error::Config(format!("unknown input format {other:?}"))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::LongCsv => "long-csv",
            InputFormat::Wide => "one-row-per-series",
        })
    }
}

impl Dataset {
    pub fn new(name: impl Into<String>, series: Vec<TimeSeries>, horizon: usize) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &series {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate series id {:?}", s.id)));
            }
            if s.values.len() < 2 {
                return Err(Error::InvalidInput(format!(
                    "series {:?} has {} observations, need at least 2",
                    s.id,
                    s.values.len()
                )));
            }
            if s.period == 0 {
                return Err(Error::InvalidInput(format!("series {:?} has seasonal period 0", s.id)));
            }
            if let Some(i) = s.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "series {:?} has a non-finite value at position {i}",
                    s.id
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            series,
            horizon,
        })
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.series.iter().map(|s| s.id.clone()).collect()
    }
}

fn parse_value(source: &str, line: usize, raw: &str) -> Result<f64> {
    let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        path: source.to_string(),
        line,
        msg: format!("non-numeric value {raw:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            path: source.to_string(),
            line,
            msg: format!("non-finite value {raw:?}"),
        });
    }
    Ok(v)
}

/// Groups long-format rows by id, keeping first-appearance order of ids and
/// the row order within each id.
pub fn parse_long_csv(source: &str, reader: impl Read) -> Result<Vec<(String, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 || headers.get(0).map(str::trim) != Some("series_id") || headers.get(1).map(str::trim) != Some("value") {
        return Err(Error::Parse {
            path: source.to_string(),
            line: 1,
            msg: format!("expected header `series_id,value`, got {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }
    let mut order: Vec<(String, Vec<f64>)> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let id = record.get(0).unwrap_or("").trim().to_string();
        let raw = record.get(1).ok_or_else(|| Error::Parse {
            path: source.to_string(),
            line,
            msg: "missing value column".into(),
        })?;
        let value = parse_value(source, line, raw)?;
        let idx = *slot.entry(id.clone()).or_insert_with(|| {
            order.push((id, Vec::new()));
            order.len() - 1
        });
        order[idx].1.push(value);
    }
    Ok(order)
}

/// One series per line; trailing empty fields are ignored so ragged series
/// can share a rectangular file.
pub fn parse_wide(source: &str, reader: impl Read) -> Result<Vec<(String, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out: Vec<(String, Vec<f64>)> = Vec::new();
    let mut seen = HashSet::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut fields = record.iter();
        let id = fields.next().unwrap_or("").trim().to_string();
        if id.is_empty() {
            continue;
        }
        if !seen.insert(id.clone()) {
            return Err(Error::Parse {
                path: source.to_string(),
                line,
                msg: format!("duplicate series id {id:?}"),
            });
        }
        let raw: Vec<&str> = fields.collect();
        let used = raw.iter().rposition(|f| !f.trim().is_empty()).map_or(0, |p| p + 1);
        let values = raw[..used]
            .iter()
            .map(|f| parse_value(source, line, f))
            .collect::<Result<Vec<_>>>()?;
        out.push((id, values));
    }
    Ok(out)
}

pub fn ingest(path: &Path, format: InputFormat, period: usize, horizon: usize) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    let source = path.display().to_string();
    let rows = match format {
        InputFormat::LongCsv => parse_long_csv(&source, file)?,
        InputFormat::Wide => parse_wide(&source, file)?,
    };
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    let series = rows
        .into_iter()
        .map(|(id, values)| TimeSeries { id, values, period })
        .collect();
    Dataset::new(name, series, horizon)
}

/// The part of a series a model may look at.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSeries {
    pub id: String,
    pub values: Vec<f64>,
    pub period: usize,
    pub class_index: usize,
}

/// Held-out future values. They can only be read through scoring, so no
/// stage that produces forecasts can peek at them.
#[derive(Debug, Clone)]
pub struct HoldOut {
    ids: Vec<String>,
    values: Vec<Vec<f64>>,
    horizon: usize,
}

impl HoldOut {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// sMAPE of `forecast` against the held-out values of series `index`.
    pub fn score(&self, index: usize, forecast: &[f64]) -> Result<f64> {
        let actual = self
            .values
            .get(index)
            .ok_or_else(|| Error::InvalidInput(format!("no held-out series at index {index}")))?;
        crate::evaluation::smape(actual, forecast)
    }

    /// Number of sMAPE terms where actual and forecast are both zero.
    pub fn zero_zero_terms(&self, index: usize, forecast: &[f64]) -> usize {
        self.values[index]
            .iter()
            .zip(forecast)
            .filter(|(a, f)| a.abs() + f.abs() == 0.0)
            .count()
    }
}

/// Series as training material: class index = position.
pub fn as_train_series(dataset: &Dataset) -> Vec<TrainSeries> {
    dataset
        .series
        .iter()
        .enumerate()
        .map(|(i, s)| TrainSeries {
            id: s.id.clone(),
            values: s.values.clone(),
            period: s.period,
            class_index: i,
        })
        .collect()
}

/// Cuts the last `horizon` points of every series into a [`HoldOut`].
pub fn split_tail(series: &[TrainSeries], horizon: usize) -> Result<(Vec<TrainSeries>, HoldOut)> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    let short: Vec<String> = series
        .iter()
        .filter(|s| s.values.len() <= horizon)
        .map(|s| s.id.clone())
        .collect();
    if !short.is_empty() {
        return Err(Error::TooShort { horizon, ids: short });
    }
    let mut train = Vec::with_capacity(series.len());
    let mut held = Vec::with_capacity(series.len());
    for s in series {
        let cut = s.values.len() - horizon;
        train.push(TrainSeries {
            values: s.values[..cut].to_vec(),
            ..s.clone()
        });
        held.push(s.values[cut..].to_vec());
    }
    Ok((
        train,
        HoldOut {
            ids: series.iter().map(|s| s.id.clone()).collect(),
            values: held,
            horizon,
        },
    ))
}

/// Test = last `h` points of each series, train = the rest.
pub fn split(dataset: &Dataset) -> Result<(Vec<TrainSeries>, HoldOut)> {
    split_tail(&as_train_series(dataset), dataset.horizon)
}

/// Optional grouping of several series into one class (`series_id,class`
/// lines). Class names are mapped to dense indices in order of first use.
#[derive(Debug, Clone, Default)]
pub struct LabelMap {
    classes: HashMap<String, String>,
}

impl LabelMap {
    pub fn parse(source: &str, reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
        let mut classes = HashMap::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            match (record.get(0), record.get(1)) {
                (Some(id), Some(class)) => {
                    classes.insert(id.trim().to_string(), class.trim().to_string());
                }
                _ => {
                    return Err(Error::Parse {
                        path: source.to_string(),
                        line,
                        msg: "expected `series_id,class`".into(),
                    })
                }
            }
        }
        Ok(Self { classes })
    }

    /// Rewrites class indices; unmapped series keep a class of their own,
    /// named by their id. Returns the class names by index.
    pub fn apply(&self, series: &mut [TrainSeries]) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        let mut dense: HashMap<(bool, String), usize> = HashMap::new();
        for s in series.iter_mut() {
            let key = match self.classes.get(&s.id) {
                Some(class) => (true, class.clone()),
                None => (false, s.id.clone()),
            };
            let next = dense.len();
            s.class_index = *dense.entry(key.clone()).or_insert_with(|| {
                names.push(key.1);
                next
            });
        }
        names
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowParams {
    pub length: usize,
    pub stride: usize,
    pub max_per_series: usize,
}

impl WindowParams {
    pub fn with_default_stride(length: usize, max_per_series: usize) -> Self {
        Self {
            length,
            stride: default_stride(length),
            max_per_series,
        }
    }
}

pub const DEFAULT_MAX_WINDOWS: usize = 64;

pub fn default_stride(length: usize) -> usize {
    (length / 4).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub class_index: usize,
    /// Offset into the (left-padded, if shorter than the window) series.
    pub start: usize,
    pub values: Vec<f64>,
    pub norm_mean: f64,
    pub norm_std: f64,
}

/// Left-pads with the first observation up to `length`.
pub fn padded(values: &[f64], length: usize) -> Vec<f64> {
    if values.len() >= length {
        return values.to_vec();
    }
    let mut out = vec![values[0]; length - values.len()];
    out.extend_from_slice(values);
    out
}

/// Z-normalizes with the population standard deviation; a (near) constant
/// slice becomes all zeros.
pub fn z_normalize(slice: &[f64]) -> (Vec<f64>, f64, f64) {
    let n = slice.len() as f64;
    let mean = slice.iter().sum::<f64>() / n;
    let std = (slice.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    if std < 1e-12 {
        (vec![0.0; slice.len()], mean, 0.0)
    } else {
        (slice.iter().map(|v| (v - mean) / std).collect(), mean, std)
    }
}

/// Window offsets `0, stride, 2*stride, ...` plus the final offset.
pub fn window_offsets(len: usize, length: usize, stride: usize) -> Vec<usize> {
    let last = len - length;
    let mut offsets: Vec<usize> = (0..=last).step_by(stride).collect();
    if offsets.last() != Some(&last) {
        offsets.push(last);
    }
    offsets
}

/// Windows of one series, subsampled with the series' own random stream
/// (keyed by id, so the choice does not depend on dataset order).
pub fn series_windows(series: &TrainSeries, params: &WindowParams, seed: u64) -> Vec<Window> {
    let values = padded(&series.values, params.length);
    let mut offsets = window_offsets(values.len(), params.length, params.stride);
    if offsets.len() > params.max_per_series {
        let mut rng = rng::stream(seed, &format!("windowing/{}", series.id));
        let mut keep = index::sample(&mut rng, offsets.len(), params.max_per_series).into_vec();
        keep.sort_unstable();
        offsets = keep.into_iter().map(|i| offsets[i]).collect();
    }
    offsets
        .into_iter()
        .map(|start| {
            let (values, norm_mean, norm_std) = z_normalize(&values[start..start + params.length]);
            Window {
                class_index: series.class_index,
                start,
                values,
                norm_mean,
                norm_std,
            }
        })
        .collect()
}

/// Windows for all series, ordered by series then offset.
pub fn make_windows(series: &[TrainSeries], params: &WindowParams, seed: u64) -> Result<Vec<Window>> {
    if params.length < 4 {
        return Err(Error::InvalidInput(format!(
            "window length {} is below the minimum of 4",
            params.length
        )));
    }
    if params.stride == 0 {
        return Err(Error::InvalidInput("window stride must be at least 1".into()));
    }
    if params.max_per_series == 0 {
        return Err(Error::InvalidInput("max windows per series must be at least 1".into()));
    }
    if let Some(s) = series.iter().find(|s| s.values.is_empty()) {
        return Err(Error::InvalidInput(format!("series {:?} has no training values", s.id)));
    }
    Ok(series
        .iter()
        .flat_map(|s| series_windows(s, params, seed))
        .collect())
}

/// `clamp(3 m, 16, shortest training length)`; the upper bound wins when
/// the shortest series is below 16.
pub fn default_window_length(train: &[TrainSeries], period: usize) -> usize {
    let shortest = train.iter().map(|s| s.values.len()).min().unwrap_or(16);
    (3 * period).max(16).min(shortest)
}
