mod common;

use rand::Rng;

use common::{euclidean, rng};
use tsfeat::data::{as_train_series, make_windows, WindowParams};
use tsfeat::extractor::{
    aggregate, train, Aggregation, ConvBlock, FeatureKind, FeatureVector, NetworkConfig, TrainConfig,
    TrainedExtractor,
};
use tsfeat::nn::{Sequential, Tensor};
use tsfeat::synthetic::mixture_dataset;

fn small_blocks() -> Vec<ConvBlock> {
    vec![
        ConvBlock { filters: 8, kernel: 8 },
        ConvBlock { filters: 16, kernel: 5 },
        ConvBlock { filters: 8, kernel: 3 },
    ]
}

fn fixture() -> (TrainedExtractor, Vec<tsfeat::data::TrainSeries>, WindowParams) {
    let dataset = mixture_dataset(6, 120, 1, 8, 0.05, 3);
    let series = as_train_series(&dataset);
    let params = WindowParams::with_default_stride(24, 32);
    let windows = make_windows(&series, &params, 3).unwrap();
    let ids: Vec<String> = series.iter().map(|s| s.id.clone()).collect();
    let net = NetworkConfig {
        n_classes: ids.len(),
        window_length: 24,
        n_features: 16,
        blocks: small_blocks(),
    };
    let cfg = TrainConfig {
        epochs: 40,
        batch_size: 32,
        seed: 3,
        ..TrainConfig::default()
    };
    (train(&windows, &ids, &net, &cfg).unwrap(), series, params)
}

#[test]
fn decapitated_network_matches_penultimate_activations() {
    let (extractor, series, params) = fixture();
    let windows = make_windows(&series, &params, 3).unwrap();
    let rows: Vec<&[f64]> = windows.iter().map(|w| w.values.as_slice()).collect();
    let mut full = extractor.classifier();
    full.layers.pop();
    let trunk = Sequential::new(full.layers);
    let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    let x = Tensor::new(vec![rows.len(), 1, params.length], data).unwrap();
    let via_classifier = trunk.infer(&x).unwrap();
    let via_extractor = extractor.window_features(&rows).unwrap();
    let flat: Vec<f64> = via_extractor.into_iter().flatten().collect();
    assert_eq!(via_classifier.data(), flat.as_slice());
}

#[test]
fn training_report_and_persistence() {
    let (extractor, series, params) = fixture();
    assert!(extractor.report.epochs_run >= 1);
    assert!(extractor.report.final_loss.is_finite());
    assert!((0.0..=1.0).contains(&extractor.report.accuracy));
    let reloaded = TrainedExtractor::from_text("mem", &extractor.to_text()).unwrap();
    let a = extractor.extract_static_features(&series, &params, 3, Aggregation::Mean).unwrap();
    let b = reloaded.extract_static_features(&series, &params, 3, Aggregation::Mean).unwrap();
    assert_eq!(a, b);
    assert!(!a.transfer);
    assert_eq!(a.rows.len(), series.len());
    assert!(a.rows.iter().all(|r| r.len() == 16));
}

#[test]
fn extraction_is_repeatable_and_thread_count_independent() {
    let (extractor, series, params) = fixture();
    let once = extractor.extract_static_features(&series, &params, 3, Aggregation::Medoid).unwrap();
    let twice = extractor.extract_static_features(&series, &params, 3, Aggregation::Medoid).unwrap();
    assert_eq!(once, twice);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let parallel = pool.install(|| extractor.extract_static_features(&series, &params, 3, Aggregation::Medoid).unwrap());
    assert_eq!(once, parallel);
}

#[test]
fn unseen_series_are_flagged_as_transfer() {
    let (extractor, _, params) = fixture();
    let other = as_train_series(&mixture_dataset(3, 120, 1, 8, 0.05, 99));
    let renamed: Vec<_> = other
        .into_iter()
        .map(|mut s| {
            s.id = format!("new-{}", s.id);
            s
        })
        .collect();
    let m = extractor.extract_static_features(&renamed, &params, 3, Aggregation::Mean).unwrap();
    assert!(m.transfer);
}

#[test]
fn mean_aggregate_lies_near_its_windows() {
    let (extractor, series, params) = fixture();
    for group in extractor.extract_series(&series, &params, 3).unwrap() {
        let mean = aggregate(&group, Aggregation::Mean).unwrap();
        let nearest = group
            .iter()
            .map(|w| euclidean(&w.values, &mean.values))
            .fold(f64::INFINITY, f64::min);
        let mut spread: f64 = 0.0;
        for a in &group {
            for b in &group {
                spread = spread.max(euclidean(&a.values, &b.values));
            }
        }
        assert!(nearest <= spread + 1e-12, "{}: {nearest} > {spread}", mean.series_id);
    }
}

fn vectors(rows: &[Vec<f64>]) -> Vec<FeatureVector> {
    rows.iter()
        .enumerate()
        .map(|(i, v)| FeatureVector {
            series_id: "s".into(),
            kind: FeatureKind::Window,
            values: v.clone(),
            window_offset: Some(i * 10),
        })
        .collect()
}

#[test]
fn medoid_matches_exhaustive_search_and_is_a_member() {
    let mut r = rng(17);
    for _ in 0..50 {
        let n = r.gen_range(1..12);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| r.gen_range(-3.0..3.0)).collect()).collect();
        let medoid = aggregate(&vectors(&rows), Aggregation::Medoid).unwrap();
        let cost = |c: &[f64]| rows.iter().map(|o| euclidean(c, o)).sum::<f64>();
        let best = rows.iter().map(|c| cost(c)).fold(f64::INFINITY, f64::min);
        assert!(rows.contains(&medoid.values));
        assert!((cost(&medoid.values) - best).abs() <= 1e-12);
        assert_eq!(medoid.kind, FeatureKind::Medoid);
    }
}

#[test]
fn medoid_ties_go_to_the_earliest_window() {
    let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
    // Offsets 10 and 20 tie on total distance; the lower offset wins.
    let medoid = aggregate(&vectors(&rows), Aggregation::Medoid).unwrap();
    assert_eq!(medoid.values, vec![1.0]);
    assert_eq!(medoid.window_offset, Some(10));
}

#[test]
fn untrained_extractor_file_is_rejected() {
    assert!(TrainedExtractor::from_text("x", "tsfeat-gbdt v1\n").is_err());
    assert!(TrainedExtractor::from_text("x", "").is_err());
}
