//! Python bindings for `tsfeat`.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tsfeat::analysis;
use tsfeat::config::RunConfig;
use tsfeat::data::{as_train_series, series_windows, Dataset, TimeSeries, TrainSeries, WindowParams};
use tsfeat::evaluation::{self, PipelineConfig};
use tsfeat::extractor::{Aggregation, TrainedExtractor};
use tsfeat::forecasters::{parse_pool, Model};
use tsfeat::metalearner::{GbdtModel, GbdtParams, MetaInstance};

fn py_err(e: tsfeat::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn dataset(series: Vec<(String, Vec<f64>)>, period: usize, horizon: usize) -> PyResult<Dataset> {
    let series = series
        .into_iter()
        .map(|(id, values)| TimeSeries { id, values, period })
        .collect();
    Dataset::new("python", series, horizon).map_err(py_err)
}

/// Training series with class indices in input order.
fn train_series(series: Vec<(String, Vec<f64>)>, period: usize) -> PyResult<Vec<TrainSeries>> {
    Ok(as_train_series(&dataset(series, period, 1)?))
}

/// A `RunConfig` with `options` applied as `key=value` overrides.
fn run_config(options: Option<HashMap<String, String>>) -> PyResult<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut options: Vec<_> = options.unwrap_or_default().into_iter().collect();
    options.sort();
    for (k, v) in options {
        cfg.set(&k, &v).map_err(py_err)?;
    }
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

fn aggregation(name: &str) -> PyResult<Aggregation> {
    name.parse().map_err(py_err)
}

/// Symmetric MAPE in percent, 0/0 terms counted as zero.
#[pyfunction]
fn smape(actual: Vec<f64>, forecast: Vec<f64>) -> PyResult<f64> {
    evaluation::smape(&actual, &forecast).map_err(py_err)
}

#[pyfunction]
fn models() -> Vec<&'static str> {
    Model::ALL.iter().map(|m| m.name()).collect()
}

/// Point forecast of one base model.
#[pyfunction]
#[pyo3(signature = (model, train, horizon, period = 1))]
fn forecast(model: &str, train: Vec<f64>, horizon: usize, period: usize) -> PyResult<Vec<f64>> {
    let pool = parse_pool(model).map_err(py_err)?;
    let [m] = pool[..] else {
        return Err(PyValueError::new_err("expected a single model name"));
    };
    m.forecast(&train, period, horizon).map(|f| f.values).map_err(py_err)
}

/// Z-normalised windows of one series as `(offset, values)` pairs.
#[pyfunction]
#[pyo3(signature = (values, length, stride = None, max_per_series = 64, seed = 0))]
fn windows(
    values: Vec<f64>,
    length: usize,
    stride: Option<usize>,
    max_per_series: usize,
    seed: u64,
) -> PyResult<Vec<(usize, Vec<f64>)>> {
    let series = train_series(vec![("series".into(), values)], 1)?;
    let mut params = WindowParams::with_default_stride(length, max_per_series);
    if let Some(s) = stride {
        params.stride = s;
    }
    Ok(series_windows(&series[0], &params, seed)
        .into_iter()
        .map(|w| (w.start, w.values))
        .collect())
}

/// A trained window classifier used as a feature extractor.
#[pyclass(name = "Extractor", module = "tsfeat")]
struct PyExtractor {
    inner: TrainedExtractor,
    max_per_series: usize,
    stride: Option<usize>,
}

impl PyExtractor {
    fn params(&self) -> WindowParams {
        let mut p = WindowParams::with_default_stride(self.inner.window_length(), self.max_per_series);
        if let Some(s) = self.stride {
            p.stride = s;
        }
        p
    }
}

#[pymethods]
impl PyExtractor {
    /// Trains one class per series. `options` takes the CLI config keys,
    /// e.g. `{"conv_blocks": "32x8,64x5,32x3", "epochs": "50"}`.
    #[staticmethod]
    #[pyo3(signature = (series, period = 1, options = None))]
    fn train(
        py: Python<'_>,
        series: Vec<(String, Vec<f64>)>,
        period: usize,
        options: Option<HashMap<String, String>>,
    ) -> PyResult<Self> {
        let cfg = run_config(options)?;
        let train = train_series(series, period)?;
        let pipeline = cfg.pipeline();
        let params = pipeline.window_params(&train);
        let inner = py
            .detach(|| evaluation::train_extractor(&train, &params, &pipeline))
            .map_err(py_err)?;
        Ok(Self {
            inner,
            max_per_series: cfg.max_per_series,
            stride: cfg.stride,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: TrainedExtractor::from_text("python", text).map_err(py_err)?,
            max_per_series: tsfeat::data::DEFAULT_MAX_WINDOWS,
            stride: None,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn window_length(&self) -> usize {
        self.inner.window_length()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn accuracy(&self) -> f64 {
        self.inner.report.accuracy
    }

    #[getter]
    fn class_ids(&self) -> Vec<String> {
        self.inner.class_ids.clone()
    }

    /// Feature rows for already-normalised windows of the extractor's length.
    fn window_features(&self, py: Python<'_>, windows: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let rows: Vec<&[f64]> = windows.iter().map(Vec::as_slice).collect();
        py.detach(|| self.inner.window_features(&rows)).map_err(py_err)
    }

    /// One static feature row per series, aggregated by `"mean"` or `"medoid"`.
    #[pyo3(signature = (series, period = 1, aggregation = "mean", seed = 0))]
    fn features(
        &self,
        py: Python<'_>,
        series: Vec<(String, Vec<f64>)>,
        period: usize,
        aggregation: &str,
        seed: u64,
    ) -> PyResult<(Vec<String>, Vec<Vec<f64>>)> {
        let method = self::aggregation(aggregation)?;
        let train = train_series(series, period)?;
        let params = self.params();
        let m = py
            .detach(|| self.inner.extract_static_features(&train, &params, seed, method))
            .map_err(py_err)?;
        Ok((m.ids, m.rows))
    }
}

/// Gradient-boosted trees mapping features to combination weights.
#[pyclass(name = "Gbdt", module = "tsfeat")]
struct PyGbdt {
    inner: GbdtModel,
}

#[pymethods]
impl PyGbdt {
    /// `errors[i][j]` is model `j`'s validation sMAPE on instance `i`.
    #[staticmethod]
    #[pyo3(signature = (features, errors, rounds = None, max_depth = None, eta = None))]
    fn fit(
        features: Vec<Vec<f64>>,
        errors: Vec<Vec<f64>>,
        rounds: Option<usize>,
        max_depth: Option<usize>,
        eta: Option<f64>,
    ) -> PyResult<Self> {
        if features.len() != errors.len() {
            return Err(PyValueError::new_err("features and errors differ in length"));
        }
        let defaults = GbdtParams::default();
        let params = GbdtParams {
            rounds: rounds.unwrap_or(defaults.rounds),
            max_depth: max_depth.unwrap_or(defaults.max_depth),
            eta: eta.unwrap_or(defaults.eta),
            ..defaults
        };
        let instances: Vec<MetaInstance> = features
            .into_iter()
            .zip(errors)
            .enumerate()
            .map(|(i, (features, errors))| MetaInstance {
                series_id: i.to_string(),
                features,
                errors,
            })
            .collect();
        Ok(Self {
            inner: GbdtModel::fit(&instances, &params).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: GbdtModel::from_text("python", text).map_err(py_err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn predict_weights(&self, features: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.predict_weights(&features).map_err(py_err)
    }

    #[getter]
    fn loss_history(&self) -> Vec<f64> {
        self.inner.loss_history.clone()
    }
}

/// Weighted average of per-model forecasts.
#[pyfunction]
fn combine(weights: Vec<f64>, forecasts: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    tsfeat::metalearner::combine(&weights, &forecasts).map_err(py_err)
}

/// k-means++ with restarts; returns assignments, inertia, silhouette and centroids.
#[pyfunction]
#[pyo3(signature = (points, k, restarts = 10, seed = 0))]
fn kmeans(
    points: Vec<Vec<f64>>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<(Vec<usize>, f64, f64, Vec<Vec<f64>>)> {
    let r = analysis::kmeans_pp(&points, k, restarts, seed).map_err(py_err)?;
    Ok((r.assignments, r.inertia, r.silhouette, r.centroids))
}

#[pyfunction]
fn adjusted_rand_index(a: Vec<usize>, b: Vec<usize>) -> f64 {
    analysis::adjusted_rand_index(&a, &b)
}

/// Two-dimensional PCA coordinates and the variance along each axis.
#[pyfunction]
fn pca(points: Vec<Vec<f64>>) -> PyResult<(Vec<(f64, f64)>, (f64, f64))> {
    let p = analysis::pca_2d(&points).map_err(py_err)?;
    Ok((
        p.coords.iter().map(|c| (c[0], c[1])).collect(),
        (p.explained_variance[0], p.explained_variance[1]),
    ))
}

type PairTuple = (String, String, f64);

/// Closest and farthest pairs of rows as `(id, id, distance)`.
#[pyfunction]
fn similarity_extremes(ids: Vec<String>, rows: Vec<Vec<f64>>) -> PyResult<(PairTuple, PairTuple)> {
    let (close, far) = analysis::similarity_extremes(&ids, &rows).map_err(py_err)?;
    Ok((
        (close.first, close.second, close.distance),
        (far.first, far.second, far.distance),
    ))
}

/// Full backtest: holds out the last `horizon` points, trains everything on
/// the rest and returns `{method: mean sMAPE}` plus per-series weights.
#[pyfunction]
#[pyo3(signature = (series, horizon, period = 1, options = None))]
#[allow(clippy::type_complexity)]
fn run_pipeline(
    py: Python<'_>,
    series: Vec<(String, Vec<f64>)>,
    horizon: usize,
    period: usize,
    options: Option<HashMap<String, String>>,
) -> PyResult<(Vec<(String, f64)>, Vec<Vec<f64>>)> {
    let config: PipelineConfig = run_config(options)?.pipeline();
    let data = dataset(series, period, horizon)?;
    let out = py
        .detach(|| evaluation::run_pipeline(&data, &config))
        .map_err(py_err)?;
    let means = out.report.methods.into_iter().zip(out.report.mean).collect();
    Ok((means, out.weights))
}

#[pymodule]
#[pyo3(name = "tsfeat")]
fn tsfeat_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(smape, m)?)?;
    m.add_function(wrap_pyfunction!(models, m)?)?;
    m.add_function(wrap_pyfunction!(forecast, m)?)?;
    m.add_function(wrap_pyfunction!(windows, m)?)?;
    m.add_function(wrap_pyfunction!(combine, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(adjusted_rand_index, m)?)?;
    m.add_function(wrap_pyfunction!(pca, m)?)?;
    m.add_function(wrap_pyfunction!(similarity_extremes, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_class::<PyExtractor>()?;
    m.add_class::<PyGbdt>()?;
    Ok(())
}
