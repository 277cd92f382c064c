//! sMAPE and the two-phase backtest.
//!
//! Phase 1 holds out the last `h` points of every training region, scores
//! the base models there and trains the extractor and meta-learner on the
//! shortened series. Phase 2 refits the base models on the full training
//! region, weights them with the meta-learner and scores everything on the
//! test horizon.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::data::{
    default_stride, default_window_length, make_windows, split, split_tail, Dataset, HoldOut, TrainSeries,
    WindowParams, DEFAULT_MAX_WINDOWS,
};
use crate::error::{Error, Result};
use crate::extractor::{
    fcn_blocks, train, Aggregation, ConvBlock, FeatureMatrix, NetworkConfig, TrainConfig,
    TrainedExtractor,
};
use crate::forecasters::{ForecastSet, Model};
use crate::metalearner::{combine, GbdtModel, GbdtParams, MetaInstance};

/// `200/n * sum |y - f| / (|y| + |f|)`; a term with `y = f = 0` counts as 0.
pub fn smape(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    if actual.len() != forecast.len() {
        return Err(Error::shape(
            "smape",
            format!("{} actuals vs {} forecasts", actual.len(), forecast.len()),
        ));
    }
    if actual.is_empty() {
        return Err(Error::InvalidInput("sMAPE of an empty horizon".into()));
    }
    if actual.iter().chain(forecast).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sMAPE input".into()));
    }
    let mut sum = 0.0;
    for (y, f) in actual.iter().zip(forecast) {
        let denom = y.abs() + f.abs();
        if denom == 0.0 {
            log::debug!("sMAPE term with zero actual and zero forecast counted as 0");
            continue;
        }
        sum += (y - f).abs() / denom;
    }
    Ok(200.0 / actual.len() as f64 * sum)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// `None` picks `clamp(3m, 16, shortest)`.
    pub window_length: Option<usize>,
    /// `None` picks `max(1, L/4)`.
    pub stride: Option<usize>,
    pub max_per_series: usize,
    pub n_features: usize,
    pub blocks: Vec<ConvBlock>,
    pub train: TrainConfig,
    pub gbdt: GbdtParams,
    pub aggregation: Aggregation,
    pub pool: Vec<Model>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window_length: None,
            stride: None,
            max_per_series: DEFAULT_MAX_WINDOWS,
            n_features: 16,
            blocks: fcn_blocks(),
            train: TrainConfig::default(),
            gbdt: GbdtParams::default(),
            aggregation: Aggregation::Mean,
            pool: Model::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn window_params(&self, train: &[TrainSeries]) -> WindowParams {
        let period = train.first().map_or(1, |s| s.period);
        let length = self
            .window_length
            .unwrap_or_else(|| default_window_length(train, period));
        WindowParams {
            length,
            stride: self.stride.unwrap_or_else(|| default_stride(length)),
            max_per_series: self.max_per_series,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FallbackRecord {
    pub series_id: String,
    pub stage: &'static str,
    pub model: Model,
    pub reason: String,
}

pub fn base_forecasts(series: &[TrainSeries], horizon: usize, pool: &[Model]) -> Result<Vec<ForecastSet>> {
    series
        .par_iter()
        .map(|s| ForecastSet::run(&s.id, &s.values, s.period, horizon, pool))
        .collect()
}

/// Trains the extractor on windows of `series`, one class per series.
pub fn train_extractor(
    series: &[TrainSeries],
    params: &WindowParams,
    config: &PipelineConfig,
) -> Result<TrainedExtractor> {
    let relabeled: Vec<TrainSeries> = series
        .iter()
        .enumerate()
        .map(|(i, s)| TrainSeries {
            class_index: i,
            ..s.clone()
        })
        .collect();
    let ids: Vec<String> = series.iter().map(|s| s.id.clone()).collect();
    train_labeled_extractor(&relabeled, &ids, params, config)
}

/// Trains the extractor with the class indices already set on `series`;
/// `class_names[c]` names class `c`.
pub fn train_labeled_extractor(
    series: &[TrainSeries],
    class_names: &[String],
    params: &WindowParams,
    config: &PipelineConfig,
) -> Result<TrainedExtractor> {
    let windows = make_windows(series, params, config.seed)?;
    let net = NetworkConfig {
        n_classes: class_names.len(),
        window_length: params.length,
        n_features: config.n_features,
        blocks: config.blocks.clone(),
    };
    train(
        &windows,
        class_names,
        &net,
        &TrainConfig {
            seed: config.seed,
            ..config.train.clone()
        },
    )
}

#[derive(Debug, Clone)]
pub struct MetaTraining {
    pub instances: Vec<MetaInstance>,
    /// Training regions too short for the inner validation split.
    pub excluded: Vec<String>,
    pub extractor: TrainedExtractor,
    pub window_params: WindowParams,
    pub fallbacks: Vec<FallbackRecord>,
}

/// Eligible for the inner split: the inner-train region keeps at least two
/// observations.
pub fn inner_split_eligible(series: &[TrainSeries], horizon: usize) -> (Vec<TrainSeries>, Vec<String>) {
    let (ok, short): (Vec<&TrainSeries>, Vec<&TrainSeries>) =
        series.iter().partition(|s| s.values.len() >= horizon + 2);
    (
        ok.into_iter().cloned().collect(),
        short.into_iter().map(|s| s.id.clone()).collect(),
    )
}

/// Training regions split for meta-learning: inner-train parts, the held-back
/// validation tails, and the ids too short to take part.
#[derive(Debug, Clone)]
pub struct MetaSplit {
    pub inner: Vec<TrainSeries>,
    pub validation: HoldOut,
    pub excluded: Vec<String>,
}

pub fn meta_split(train_regions: &[TrainSeries], horizon: usize) -> Result<MetaSplit> {
    let (eligible, excluded) = inner_split_eligible(train_regions, horizon);
    if eligible.len() < 2 {
        return Err(Error::TooShort {
            horizon: 2 * horizon,
            ids: excluded,
        });
    }
    let (inner, validation) = split_tail(&eligible, horizon)?;
    Ok(MetaSplit {
        inner,
        validation,
        excluded,
    })
}

/// Meta-instances for a split, using an already trained extractor: base
/// models are fitted on the inner-train parts and scored on the validation
/// tails; aggregated inner-train features become the instance inputs.
pub fn meta_instances(
    split: &MetaSplit,
    extractor: &TrainedExtractor,
    params: &WindowParams,
    config: &PipelineConfig,
) -> Result<(Vec<MetaInstance>, Vec<FallbackRecord>)> {
    let horizon = split.validation.horizon();
    let sets = base_forecasts(&split.inner, horizon, &config.pool).map_err(|e| e.in_stage("validation forecasts"))?;
    let features = extractor
        .extract_static_features(&split.inner, params, config.seed, config.aggregation)
        .map_err(|e| e.in_stage("feature extraction"))?;
    let mut instances = Vec::with_capacity(split.inner.len());
    let mut fallbacks = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        let errors = set
            .forecasts
            .iter()
            .map(|(_, f)| split.validation.score(i, f))
            .collect::<Result<Vec<_>>>()?;
        fallbacks.extend(set.fallbacks.iter().map(|(model, reason)| FallbackRecord {
            series_id: set.series_id.clone(),
            stage: "validation",
            model: *model,
            reason: reason.clone(),
        }));
        instances.push(MetaInstance {
            series_id: set.series_id.clone(),
            features: features.rows[i].clone(),
            errors,
        });
    }
    Ok((instances, fallbacks))
}

/// Builds meta-instances from the training regions, training the extractor
/// on inner-train windows only.
pub fn build_meta_training(
    train_regions: &[TrainSeries],
    horizon: usize,
    config: &PipelineConfig,
) -> Result<MetaTraining> {
    let split = meta_split(train_regions, horizon)?;
    let params = config.window_params(&split.inner);
    let extractor = train_extractor(&split.inner, &params, config).map_err(|e| e.in_stage("extractor training"))?;
    let (instances, fallbacks) = meta_instances(&split, &extractor, &params, config)?;
    Ok(MetaTraining {
        instances,
        excluded: split.excluded,
        extractor,
        window_params: params,
        fallbacks,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    /// Base model names in pool order, then `combined`.
    pub methods: Vec<String>,
    pub ids: Vec<String>,
    /// `smape[series][method]`.
    pub smape: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub fallbacks: Vec<FallbackRecord>,
    pub zero_zero_terms: usize,
    pub excluded_from_meta: Vec<String>,
}

impl MetricReport {
    pub fn mean_of(&self, method: &str) -> Option<f64> {
        self.methods.iter().position(|m| m == method).map(|i| self.mean[i])
    }

    pub fn per_series_csv(&self) -> String {
        let mut out = String::from("series_id,method,smape\n");
        for (id, row) in self.ids.iter().zip(&self.smape) {
            for (m, v) in self.methods.iter().zip(row) {
                let _ = writeln!(out, "{id},{m},{v:?}");
            }
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("method,mean_smape\n");
        for (m, v) in self.methods.iter().zip(&self.mean) {
            let _ = writeln!(out, "{m},{v:?}");
        }
        out
    }

    pub fn fallback_csv(&self) -> String {
        let mut out = String::from("series_id,stage,model,reason\n");
        for f in &self.fallbacks {
            let _ = writeln!(out, "{},{},{},\"{}\"", f.series_id, f.stage, f.model, f.reason.replace('"', "'"));
        }
        let _ = writeln!(out, "# zero/zero sMAPE terms: {}", self.zero_zero_terms);
        for id in &self.excluded_from_meta {
            let _ = writeln!(out, "# excluded from meta-training: {id}");
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: MetricReport,
    pub meta: MetaTraining,
    pub model: GbdtModel,
    pub features: FeatureMatrix,
    pub forecasts: Vec<ForecastSet>,
    pub weights: Vec<Vec<f64>>,
    pub combined: Vec<Vec<f64>>,
}

/// Weights and combined forecasts for every series.
pub fn combine_all(
    model: &GbdtModel,
    features: &FeatureMatrix,
    forecasts: &[ForecastSet],
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut weights = Vec::with_capacity(forecasts.len());
    let mut combined = Vec::with_capacity(forecasts.len());
    for (row, set) in features.rows.iter().zip(forecasts) {
        let w = model.predict_weights(row)?;
        combined.push(combine(&w, &set.matrix())?);
        weights.push(w);
    }
    Ok((weights, combined))
}

pub fn run_pipeline(dataset: &Dataset, config: &PipelineConfig) -> Result<PipelineOutput> {
    if config.pool.is_empty() {
        return Err(Error::Config("empty model pool".into()));
    }
    let (train_regions, test) = split(dataset).map_err(|e| e.in_stage("split"))?;
    let horizon = dataset.horizon;

    let meta = build_meta_training(&train_regions, horizon, config).map_err(|e| e.in_stage("meta-training"))?;
    let model = GbdtModel::fit(&meta.instances, &config.gbdt).map_err(|e| e.in_stage("meta-learner"))?;

    let features = meta
        .extractor
        .extract_static_features(&train_regions, &meta.window_params, config.seed, config.aggregation)
        .map_err(|e| e.in_stage("feature extraction"))?;
    let forecasts = base_forecasts(&train_regions, horizon, &config.pool).map_err(|e| e.in_stage("base forecasts"))?;
    let (weights, combined) = combine_all(&model, &features, &forecasts).map_err(|e| e.in_stage("combination"))?;

    let mut methods: Vec<String> = config.pool.iter().map(|m| m.name().to_string()).collect();
    methods.push("combined".into());
    let mut table = Vec::with_capacity(forecasts.len());
    let mut zero_zero_terms = 0;
    for (i, (set, comb)) in forecasts.iter().zip(&combined).enumerate() {
        let mut row = Vec::with_capacity(methods.len());
        for (_, f) in &set.forecasts {
            row.push(test.score(i, f)?);
            zero_zero_terms += test.zero_zero_terms(i, f);
        }
        row.push(test.score(i, comb)?);
        zero_zero_terms += test.zero_zero_terms(i, comb);
        table.push(row);
    }
    let n = table.len() as f64;
    let mean = (0..methods.len())
        .map(|j| table.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let mut fallbacks = meta.fallbacks.clone();
    for set in &forecasts {
        fallbacks.extend(set.fallbacks.iter().map(|(model, reason)| FallbackRecord {
            series_id: set.series_id.clone(),
            stage: "test",
            model: *model,
            reason: reason.clone(),
        }));
    }
    let report = MetricReport {
        methods,
        ids: dataset.ids(),
        smape: table,
        mean,
        fallbacks,
        zero_zero_terms,
        excluded_from_meta: meta.excluded.clone(),
    };
    Ok(PipelineOutput {
        report,
        meta,
        model,
        features,
        forecasts,
        weights,
        combined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smape_examples() {
        assert_eq!(smape(&[3.0, 5.0], &[3.0, 5.0]).unwrap(), 0.0);
        assert!((smape(&[100.0], &[50.0]).unwrap() - 200.0 * 50.0 / 150.0).abs() < 1e-12);
        assert_eq!(smape(&[0.0], &[5.0]).unwrap(), 200.0);
        assert_eq!(smape(&[0.0, 1.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(smape(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn eligibility_requires_room_for_inner_split() {
        let s = |id: &str, n: usize| TrainSeries { id: id.into(), values: vec![1.0; n], period: 1, class_index: 0 };
        let (ok, excluded) = inner_split_eligible(&[s("a", 10), s("b", 5)], 4);
        assert_eq!(ok.len(), 1);
        assert_eq!(excluded, vec!["b".to_string()]);
    }
}
