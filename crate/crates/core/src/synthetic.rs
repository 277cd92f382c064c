//! Seeded synthetic datasets for demos and tests.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, TimeSeries};
use crate::rng;

/// Series built from two sinusoids with series-specific periods, a linear
/// trend and Gaussian noise at `noise` times the clean signal's standard
/// deviation. Values are shifted to stay positive.
pub fn mixture_dataset(n_series: usize, length: usize, period: usize, horizon: usize, noise: f64, seed: u64) -> Dataset {
    let mut r = rng::stream(seed, "synthetic/mixture");
    let series = (0..n_series)
        .map(|i| {
            let p1 = 3.0 + 1.7 * i as f64;
            let p2 = 5.0 + ((i * 7) % n_series.max(1)) as f64 * 1.3;
            let a2 = 0.3 + 0.5 * ((i % 4) as f64 / 3.0);
            let slope = (i as f64 - n_series as f64 / 2.0) * 0.004;
            let ph1 = r.gen::<f64>() * 2.0 * PI;
            let ph2 = r.gen::<f64>() * 2.0 * PI;
            let clean: Vec<f64> = (0..length)
                .map(|t| {
                    let t = t as f64;
                    (2.0 * PI * t / p1 + ph1).sin() + a2 * (2.0 * PI * t / p2 + ph2).sin() + slope * t
                })
                .collect();
            let mean = clean.iter().sum::<f64>() / length as f64;
            let std = (clean.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / length as f64).sqrt();
            let values = clean
                .iter()
                .map(|v| {
                    let e: f64 = r.sample(StandardNormal);
                    10.0 + v + noise * std * e
                })
                .collect();
            TimeSeries {
                id: format!("S{:03}", i + 1),
                values,
                period,
            }
        })
        .collect();
    Dataset::new("synthetic-mixture", series, horizon).expect("generated series are valid")
}

/// Daily positive series with a weekly profile, slow level drift and
/// multiplicative noise (the shape of ATM cash-withdrawal data).
pub fn daily_weekly_dataset(n_series: usize, length: usize, horizon: usize, seed: u64) -> Dataset {
    let mut r = rng::stream(seed, "synthetic/daily");
    let series = (0..n_series)
        .map(|i| {
            let profile: Vec<f64> = (0..7).map(|_| 0.6 + 0.8 * r.gen::<f64>()).collect();
            let base = 10.0 + 20.0 * r.gen::<f64>();
            let drift = (r.gen::<f64>() - 0.5) * 0.01;
            let yearly = 0.15 * r.gen::<f64>();
            let phase = r.gen::<f64>() * 2.0 * PI;
            let noise = 0.05 + 0.15 * r.gen::<f64>();
            let values = (0..length)
                .map(|t| {
                    let tf = t as f64;
                    let level = base * (1.0 + drift * tf / 7.0).max(0.2);
                    let season = profile[t % 7] * (1.0 + yearly * (2.0 * PI * tf / 365.0 + phase).sin());
                    let e: f64 = r.sample(StandardNormal);
                    (level * season * (1.0 + noise * e)).max(0.1)
                })
                .collect();
            TimeSeries {
                id: format!("D{:03}", i + 1),
                values,
                period: 7,
            }
        })
        .collect();
    Dataset::new("synthetic-daily", series, horizon).expect("generated series are valid")
}

/// Writes a dataset in the long `series_id,value` format.
pub fn to_long_csv(dataset: &Dataset) -> String {
    let mut out = String::from("series_id,value\n");
    for s in &dataset.series {
        for v in &s.values {
            out.push_str(&format!("{},{v:?}\n", s.id));
        }
    }
    out
}
