//! Classical base forecasters combined by the meta-learner.
//!
//! All parameter searches are fixed grids, so results are deterministic and
//! invariant to positive rescaling of the input.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Naive2,
    SeasonalNaive,
    RwDrift,
    Theta,
    Ets,
}

impl Model {
    pub const ALL: [Model; 5] = [
        Model::Naive2,
        Model::SeasonalNaive,
        Model::RwDrift,
        Model::Theta,
        Model::Ets,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::Naive2 => "naive2",
            Model::SeasonalNaive => "seasonal_naive",
            Model::RwDrift => "rw_drift",
            Model::Theta => "theta",
            Model::Ets => "ets",
        }
    }

    pub fn forecast(self, train: &[f64], period: usize, horizon: usize) -> Result<Forecast> {
        match self {
            Model::Naive2 => naive2(train, period, horizon),
            Model::SeasonalNaive => seasonal_naive(train, period, horizon),
            Model::RwDrift => rw_drift(train, horizon),
            Model::Theta => theta(train, period, horizon),
            Model::Ets => ets(train, period, horizon),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown base model {s:?}")))
    }
}

pub fn parse_pool(s: &str) -> Result<Vec<Model>> {
    let pool = s.split(',').map(|m| m.trim().parse()).collect::<Result<Vec<Model>>>()?;
    if pool.is_empty() {
        return Err(Error::Config("empty model pool".into()));
    }
    Ok(pool)
}

/// Point forecast plus the reason a fallback was used, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub values: Vec<f64>,
    pub fallback: Option<String>,
}

impl Forecast {
    fn plain(values: Vec<f64>) -> Self {
        Self { values, fallback: None }
    }

    fn fallback(values: Vec<f64>, reason: impl Into<String>) -> Self {
        Self {
            values,
            fallback: Some(reason.into()),
        }
    }
}

fn check(train: &[f64], horizon: usize) -> Result<()> {
    if train.is_empty() {
        return Err(Error::InvalidInput("empty training series".into()));
    }
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    if let Some(i) = train.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("training value at position {i}")));
    }
    Ok(())
}

fn last_value(train: &[f64], horizon: usize) -> Vec<f64> {
    vec![*train.last().expect("non-empty"); horizon]
}

/// Forecasts from one model for every series in a pool.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSet {
    pub series_id: String,
    pub horizon: usize,
    pub forecasts: Vec<(Model, Vec<f64>)>,
    pub fallbacks: Vec<(Model, String)>,
}

impl ForecastSet {
    pub fn run(series_id: &str, train: &[f64], period: usize, horizon: usize, pool: &[Model]) -> Result<Self> {
        let mut forecasts = Vec::with_capacity(pool.len());
        let mut fallbacks = Vec::new();
        for &model in pool {
            let f = model.forecast(train, period, horizon)?;
            if let Some(reason) = f.fallback {
                fallbacks.push((model, reason));
            }
            if f.values.len() != horizon || f.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("{model} forecast for {series_id}")));
            }
            forecasts.push((model, f.values));
        }
        Ok(Self {
            series_id: series_id.to_string(),
            horizon,
            forecasts,
            fallbacks,
        })
    }

    pub fn get(&self, model: Model) -> Option<&[f64]> {
        self.forecasts.iter().find(|(m, _)| *m == model).map(|(_, v)| v.as_slice())
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.forecasts.iter().map(|(_, v)| v.clone()).collect()
    }
}

/// `y[T+k] = y[T+k - m*ceil(k/m)]`.
pub fn seasonal_naive(train: &[f64], period: usize, horizon: usize) -> Result<Forecast> {
    check(train, horizon)?;
    let n = train.len();
    if period == 0 || period > n {
        return Ok(Forecast::fallback(
            last_value(train, horizon),
            format!("seasonal period {period} exceeds training length {n}; used naive"),
        ));
    }
    Ok(Forecast::plain(
        (1..=horizon)
            .map(|k| train[n + k - period * k.div_ceil(period) - 1])
            .collect(),
    ))
}

/// `y[T+k] = y[T] + k (y[T] - y[1]) / (T - 1)`.
pub fn rw_drift(train: &[f64], horizon: usize) -> Result<Forecast> {
    check(train, horizon)?;
    let n = train.len();
    if n < 2 {
        return Err(Error::InvalidInput("random walk with drift needs 2 observations".into()));
    }
    let last = train[n - 1];
    let drift = (last - train[0]) / (n - 1) as f64;
    Ok(Forecast::plain((1..=horizon).map(|k| last + k as f64 * drift).collect()))
}

/// Sample autocorrelations at lags `1..=max_lag`.
pub fn acf(y: &[f64], max_lag: usize) -> Vec<f64> {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let denom: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    (1..=max_lag)
        .map(|k| {
            if denom == 0.0 || k >= n {
                return 0.0;
            }
            (0..n - k).map(|t| (y[t] - mean) * (y[t + k] - mean)).sum::<f64>() / denom
        })
        .collect()
}

/// 90% autocorrelation test at the seasonal lag:
/// `|r_m| > 1.645 sqrt((1 + 2 sum_{k<m} r_k^2) / n)`, only for `m > 1`, `n >= 3m`.
pub fn seasonality_test(y: &[f64], period: usize) -> bool {
    let n = y.len();
    if period <= 1 || n < 3 * period {
        return false;
    }
    let r = acf(y, period);
    let spread: f64 = r[..period - 1].iter().map(|v| v * v).sum();
    let limit = 1.645 * ((1.0 + 2.0 * spread) / n as f64).sqrt();
    r[period - 1].abs() > limit
}

/// Centered moving average of order `m` (2xm for even `m`); `None` where
/// the window does not fit.
pub fn centered_moving_average(y: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = y.len();
    let half = period / 2;
    (0..n)
        .map(|t| {
            if t < half || t + half >= n {
                return None;
            }
            if period % 2 == 1 {
                Some(y[t - half..=t + half].iter().sum::<f64>() / period as f64)
            } else {
                let inner: f64 = y[t - half + 1..t + half].iter().sum();
                Some((inner + 0.5 * (y[t - half] + y[t + half])) / period as f64)
            }
        })
        .collect()
}

/// Multiplicative classical-decomposition seasonal indices, indexed by
/// `t mod m` and normalized to mean 1. `Err` carries the fallback reason.
pub fn seasonal_indices(y: &[f64], period: usize) -> std::result::Result<Vec<f64>, String> {
    if y.iter().any(|v| *v <= 0.0) {
        return Err("nonpositive values with multiplicative decomposition; used undecomposed series".into());
    }
    let trend = centered_moving_average(y, period);
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (t, tr) in trend.iter().enumerate() {
        if let Some(tr) = tr {
            sums[t % period] += y[t] / tr;
            counts[t % period] += 1;
        }
    }
    if counts.contains(&0) {
        return Err("series too short for classical decomposition".into());
    }
    let mut idx: Vec<f64> = sums.iter().zip(&counts).map(|(s, c)| s / *c as f64).collect();
    let mean = idx.iter().sum::<f64>() / period as f64;
    idx.iter_mut().for_each(|v| *v /= mean);
    Ok(idx)
}

/// Seasonal adjustment shared by naive2 and theta.
struct Adjusted {
    values: Vec<f64>,
    indices: Option<Vec<f64>>,
    fallback: Option<String>,
}

impl Adjusted {
    fn new(y: &[f64], period: usize) -> Self {
        if !seasonality_test(y, period) {
            return Self {
                values: y.to_vec(),
                indices: None,
                fallback: None,
            };
        }
        match seasonal_indices(y, period) {
            Ok(idx) => Self {
                values: y.iter().enumerate().map(|(t, v)| v / idx[t % period]).collect(),
                indices: Some(idx),
                fallback: None,
            },
            Err(reason) => Self {
                values: y.to_vec(),
                indices: None,
                fallback: Some(reason),
            },
        }
    }

    fn reseasonalize(&self, n: usize, mut forecast: Vec<f64>) -> Vec<f64> {
        if let Some(idx) = &self.indices {
            let m = idx.len();
            for (k, v) in forecast.iter_mut().enumerate() {
                *v *= idx[(n + k) % m];
            }
        }
        forecast
    }
}

/// Naive forecast of the seasonally adjusted series, re-seasonalized.
pub fn naive2(train: &[f64], period: usize, horizon: usize) -> Result<Forecast> {
    check(train, horizon)?;
    if train.len() < 3 {
        return Ok(Forecast::fallback(last_value(train, horizon), "fewer than 3 observations; used naive"));
    }
    let adj = Adjusted::new(train, period);
    let flat = vec![*adj.values.last().expect("non-empty"); horizon];
    Ok(Forecast {
        values: adj.reseasonalize(train.len(), flat),
        fallback: adj.fallback,
    })
}

/// Simple exponential smoothing: one-step SSE and the final level.
pub fn ses(y: &[f64], alpha: f64) -> (f64, f64) {
    let mut level = y[0];
    let mut sse = 0.0;
    for &v in &y[1..] {
        let e = v - level;
        sse += e * e;
        level += alpha * e;
    }
    (sse, level)
}

/// Least-squares slope of `y` against `t = 1..n`.
pub fn ols_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let tbar = (n + 1.0) / 2.0;
    let ybar = y.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate() {
        let dt = (i + 1) as f64 - tbar;
        num += dt * (v - ybar);
        den += dt * dt;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaFit {
    pub alpha: f64,
    pub level: f64,
    /// OLS slope of the (adjusted) series; the forecast drifts at half of it.
    pub slope: f64,
    pub seasonal: bool,
}

pub const THETA_ALPHAS: std::ops::RangeInclusive<u32> = 1..=99;

/// SES with alpha on the grid 0.01..0.99 (first minimum wins) plus the
/// OLS slope of the adjusted series.
pub fn theta_fit(adjusted: &[f64]) -> ThetaFit {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in THETA_ALPHAS {
        let alpha = f64::from(i) / 100.0;
        let (sse, level) = ses(adjusted, alpha);
        if sse < best.0 {
            best = (sse, alpha, level);
        }
    }
    ThetaFit {
        alpha: best.1,
        level: best.2,
        slope: ols_slope(adjusted),
        seasonal: false,
    }
}

/// Two-line Theta: `SES_T + (k - 1 + 1/alpha) b/2`.
pub fn theta(train: &[f64], period: usize, horizon: usize) -> Result<Forecast> {
    check(train, horizon)?;
    if train.len() < 4 {
        return Ok(Forecast::fallback(last_value(train, horizon), "fewer than 4 observations; used naive"));
    }
    if train.iter().all(|v| *v == train[0]) {
        return Ok(Forecast::plain(vec![train[0]; horizon]));
    }
    let adj = Adjusted::new(train, period);
    let fit = theta_fit(&adj.values);
    let flat = (1..=horizon)
        .map(|k| fit.level + (k as f64 - 1.0 + 1.0 / fit.alpha) * fit.slope / 2.0)
        .collect();
    Ok(Forecast {
        values: adj.reseasonalize(train.len(), flat),
        fallback: adj.fallback,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtsKind {
    Ses,
    Holt,
    DampedHolt,
    HoltWinters,
}

impl EtsKind {
    pub fn parameter_count(self) -> usize {
        match self {
            EtsKind::Ses => 2,
            EtsKind::Holt => 4,
            EtsKind::DampedHolt => 5,
            EtsKind::HoltWinters => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtsFit {
    pub kind: EtsKind,
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
    pub gamma: f64,
    pub sse: f64,
    pub aicc: f64,
    level: f64,
    trend: f64,
    season: Vec<f64>,
}

const AICC_TIE: f64 = 1e-9;

fn grid_005() -> impl Iterator<Item = f64> + Clone {
    (1..=19).map(|i| f64::from(i) * 0.05)
}

fn grid_phi() -> impl Iterator<Item = f64> + Clone {
    (0..=9).map(|i| 0.8 + f64::from(i) * 0.02)
}

struct State {
    sse: f64,
    terms: usize,
    level: f64,
    trend: f64,
    season: Vec<f64>,
}

fn run_ses(y: &[f64], alpha: f64, scored_from: usize) -> State {
    let mut level = y[0];
    let mut sse = 0.0;
    for (t, &v) in y.iter().enumerate().skip(1) {
        let e = v - level;
        if t >= scored_from {
            sse += e * e;
        }
        level += alpha * e;
    }
    State { sse, terms: y.len() - scored_from, level, trend: 0.0, season: Vec::new() }
}

fn run_holt(y: &[f64], alpha: f64, beta: f64, phi: f64, scored_from: usize) -> State {
    let mut level = y[0];
    let mut trend = y[1] - y[0];
    let mut sse = 0.0;
    for (t, &v) in y.iter().enumerate().skip(1) {
        let f = level + phi * trend;
        let e = v - f;
        if t >= scored_from {
            sse += e * e;
        }
        let new_level = f + alpha * e;
        trend = beta * (new_level - level) + (1.0 - beta) * phi * trend;
        level = new_level;
    }
    State { sse, terms: y.len() - scored_from, level, trend, season: Vec::new() }
}

/// Additive Holt-Winters; initial state fitted on the first two seasons and
/// placed at the end of the first season.
fn run_holt_winters(y: &[f64], m: usize, alpha: f64, beta: f64, gamma: f64) -> State {
    let first = y[..m].iter().sum::<f64>() / m as f64;
    let second = y[m..2 * m].iter().sum::<f64>() / m as f64;
    let mut trend = (second - first) / m as f64;
    let centre = (m as f64 - 1.0) / 2.0;
    let mut level = first + trend * centre;
    let mut season: Vec<f64> = (0..m).map(|i| y[i] - (first + trend * (i as f64 - centre))).collect();
    let mut sse = 0.0;
    for (t, &v) in y.iter().enumerate().skip(m) {
        let s = season[t % m];
        let f = level + trend + s;
        let e = v - f;
        sse += e * e;
        let new_level = alpha * (v - s) + (1.0 - alpha) * (level + trend);
        trend = beta * (new_level - level) + (1.0 - beta) * trend;
        season[t % m] = gamma * (v - new_level) + (1.0 - gamma) * s;
        level = new_level;
    }
    State { sse, terms: y.len() - m, level, trend, season }
}

fn aicc(sse: f64, floor: f64, n: usize, k: usize) -> Option<f64> {
    if n <= k + 1 {
        return None;
    }
    let n_f = n as f64;
    let k_f = k as f64;
    Some(n_f * (sse.max(floor) / n_f).ln() + 2.0 * k_f + 2.0 * k_f * (k_f + 1.0) / (n_f - k_f - 1.0))
}

/// Grid-fits SES, Holt, damped Holt and (for `m > 1`, `n >= 2m + 2`)
/// additive Holt-Winters, and keeps the lowest AICc. `None` if no candidate
/// has enough observations.
pub fn ets_fit(y: &[f64], period: usize) -> Option<EtsFit> {
    let n = y.len();
    if n < 2 {
        return None;
    }
    // SSE floor proportional to the data's energy keeps exact fits comparable
    // and the selection scale-free.
    let energy: f64 = y.iter().map(|v| v * v).sum();
    let floor = (energy * 1e-24).max(f64::MIN_POSITIVE);
    // Every candidate is scored on the same one-step errors (those Holt-Winters
    // can produce), so rescaling the data shifts all AICc values equally.
    let seasonal = period > 1 && n >= 2 * period + 2;
    let scored_from = if seasonal { period } else { 1 };
    let mut best: Option<EtsFit> = None;
    let mut consider = |kind: EtsKind, alpha: f64, beta: f64, phi: f64, gamma: f64, st: State| {
        let Some(score) = aicc(st.sse, floor, st.terms, kind.parameter_count()) else {
            return;
        };
        // Near-ties keep the earlier (simpler) candidate, so rounding noise
        // cannot flip the choice.
        if best.as_ref().is_none_or(|b| score < b.aicc - AICC_TIE) {
            best = Some(EtsFit {
                kind,
                alpha,
                beta,
                phi,
                gamma,
                sse: st.sse,
                aicc: score,
                level: st.level,
                trend: st.trend,
                season: st.season,
            });
        }
    };
    for alpha in grid_005() {
        consider(EtsKind::Ses, alpha, 0.0, 1.0, 0.0, run_ses(y, alpha, scored_from));
    }
    if n >= 3 {
        for alpha in grid_005() {
            for beta in grid_005() {
                consider(EtsKind::Holt, alpha, beta, 1.0, 0.0, run_holt(y, alpha, beta, 1.0, scored_from));
            }
        }
        for alpha in grid_005() {
            for beta in grid_005() {
                for phi in grid_phi() {
                    consider(EtsKind::DampedHolt, alpha, beta, phi, 0.0, run_holt(y, alpha, beta, phi, scored_from));
                }
            }
        }
    }
    if seasonal {
        for alpha in grid_005() {
            for beta in grid_005() {
                for gamma in grid_005() {
                    consider(
                        EtsKind::HoltWinters,
                        alpha,
                        beta,
                        1.0,
                        gamma,
                        run_holt_winters(y, period, alpha, beta, gamma),
                    );
                }
            }
        }
    }
    best
}

impl EtsFit {
    pub fn forecast(&self, n: usize, horizon: usize) -> Vec<f64> {
        (1..=horizon)
            .map(|k| match self.kind {
                EtsKind::Ses => self.level,
                EtsKind::Holt => self.level + k as f64 * self.trend,
                EtsKind::DampedHolt => {
                    let damp: f64 = (1..=k).map(|i| self.phi.powi(i as i32)).sum();
                    self.level + damp * self.trend
                }
                EtsKind::HoltWinters => {
                    let m = self.season.len();
                    self.level + k as f64 * self.trend + self.season[(n - 1 + k) % m]
                }
            })
            .collect()
    }
}

pub fn ets(train: &[f64], period: usize, horizon: usize) -> Result<Forecast> {
    check(train, horizon)?;
    match ets_fit(train, period) {
        Some(fit) => {
            let values = fit.forecast(train.len(), horizon);
            if values.iter().all(|v| v.is_finite()) {
                Ok(Forecast::plain(values))
            } else {
                Ok(Forecast::fallback(last_value(train, horizon), "non-finite ETS forecast; used naive"))
            }
        }
        None => Ok(Forecast::fallback(last_value(train, horizon), "no ETS candidate could be fitted; used naive")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seasonal_naive_examples() {
        assert_eq!(seasonal_naive(&[1.0, 2.0, 3.0, 4.0], 2, 4).unwrap().values, vec![3.0, 4.0, 3.0, 4.0]);
        assert_eq!(seasonal_naive(&[1.0, 2.0, 3.0], 1, 2).unwrap().values, vec![3.0, 3.0]);
        assert_eq!(seasonal_naive(&[5.0, 7.0, 9.0], 3, 2).unwrap().values, vec![5.0, 7.0]);
        let f = seasonal_naive(&[5.0, 7.0], 3, 2).unwrap();
        assert_eq!(f.values, vec![7.0, 7.0]);
        assert!(f.fallback.is_some());
    }

    #[test]
    fn rw_drift_examples() {
        let y: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(rw_drift(&y, 3).unwrap().values, vec![11.0, 12.0, 13.0]);
        assert_eq!(rw_drift(&[4.0; 5], 2).unwrap().values, vec![4.0, 4.0]);
        assert_eq!(rw_drift(&[0.0, 2.0], 2).unwrap().values, vec![4.0, 6.0]);
    }

    #[test]
    fn naive2_reproduces_exact_pattern() {
        let pattern = [2.0, 5.0, 3.0, 8.0];
        let y: Vec<f64> = (0..24).map(|t| pattern[t % 4]).collect();
        assert!(seasonality_test(&y, 4));
        let f = naive2(&y, 4, 6).unwrap();
        for (k, v) in f.values.iter().enumerate() {
            assert!((v - pattern[(24 + k) % 4]).abs() < 1e-12, "{:?}", f.values);
        }
    }

    #[test]
    fn naive2_plain_when_not_seasonal() {
        let y = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        assert_eq!(naive2(&y, 1, 3).unwrap().values, vec![6.0; 3]);
    }

    #[test]
    fn naive2_nonpositive_falls_back_flagged() {
        let pattern = [-2.0, 5.0, 3.0, 8.0];
        let y: Vec<f64> = (0..24).map(|t| pattern[t % 4]).collect();
        let f = naive2(&y, 4, 2).unwrap();
        assert_eq!(f.values, vec![8.0, 8.0]);
        assert!(f.fallback.is_some());
    }

    #[test]
    fn moving_average_even_order_uses_half_weights() {
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ma = centered_moving_average(&y, 2);
        assert_eq!(ma[0], None);
        assert_eq!(ma[1], Some((0.5 * 1.0 + 2.0 + 0.5 * 3.0) / 2.0));
        assert_eq!(ma[4], None);
    }

    #[test]
    fn theta_on_line_and_constant() {
        let y: Vec<f64> = (1..=30).map(|t| 2.0 * f64::from(t)).collect();
        let fit = theta_fit(&y);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        let f = theta(&y, 1, 4).unwrap().values;
        for w in f.windows(2) {
            assert!((w[1] - w[0] - fit.slope / 2.0).abs() < 1e-9);
        }
        assert_eq!(theta(&[3.0; 10], 1, 3).unwrap().values, vec![3.0; 3]);
    }

    #[test]
    fn theta_grid_matches_brute_force() {
        let y = [10.0, 12.0, 9.0, 14.0, 13.0, 15.0, 11.0, 16.0, 18.0, 17.0];
        let fit = theta_fit(&y);
        // Independent SSE evaluation over the same grid.
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..=99 {
            let a = i as f64 / 100.0;
            let mut l = y[0];
            let mut sse = 0.0;
            for v in &y[1..] {
                sse += (v - l).powi(2);
                l = a * v + (1.0 - a) * l;
            }
            if sse < best.0 - 1e-12 {
                best = (sse, a);
            }
        }
        assert_eq!(fit.alpha, best.1);
    }

    #[test]
    fn ets_constant_and_trend() {
        let fit = ets_fit(&[5.0; 20], 1).unwrap();
        assert_eq!(fit.kind, EtsKind::Ses);
        assert_eq!(ets(&[5.0; 20], 1, 3).unwrap().values, vec![5.0; 3]);

        let y: Vec<f64> = (0..30).map(|t| 3.0 + 1.5 * t as f64).collect();
        let fit = ets_fit(&y, 1).unwrap();
        assert_eq!(fit.kind, EtsKind::Holt);
        let f = ets(&y, 1, 5).unwrap().values;
        for (k, v) in f.iter().enumerate() {
            assert!((v - (3.0 + 1.5 * (30 + k) as f64)).abs() < 1e-3);
        }
    }

    #[test]
    fn holt_winters_beats_ses_on_seasonal_trend() {
        let s = [4.0, -1.0, -5.0, 2.0];
        let y: Vec<f64> = (0..32).map(|t| 50.0 + 0.7 * t as f64 + s[t % 4]).collect();
        let best_ses = grid_005().map(|a| run_ses(&y, a, 4).sse).fold(f64::INFINITY, f64::min);
        let hw = run_holt_winters(&y, 4, 0.5, 0.5, 0.5).sse;
        assert!(hw < best_ses);
        assert!(hw < 1e-18);
        assert_eq!(ets_fit(&y, 4).unwrap().kind, EtsKind::HoltWinters);
    }

    #[test]
    fn pool_parsing() {
        assert_eq!(parse_pool("naive2,ets").unwrap(), vec![Model::Naive2, Model::Ets]);
        assert!(parse_pool("arima").is_err());
    }
}
