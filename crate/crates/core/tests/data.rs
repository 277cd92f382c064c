use std::io::Write;

use tsfeat::data::{ingest, make_windows, split, InputFormat, TrainSeries, WindowParams};
use tsfeat::Error;

fn file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn wide_and_long_formats() {
    let wide = file("T1,1,2,3\nT2,4,5,6,7\n");
    let d = ingest(wide.path(), InputFormat::Wide, 1, 1).unwrap();
    assert_eq!(d.ids(), vec!["T1", "T2"]);
    assert_eq!(d.series[0].values, vec![1.0, 2.0, 3.0]);

    let long = file("series_id,value\nB,1\nA,10\nB,2\nA,20\nB,3\nA,30\n");
    let d = ingest(long.path(), InputFormat::LongCsv, 1, 1).unwrap();
    assert_eq!(d.ids(), vec!["B", "A"]);
    assert_eq!(d.series[1].values, vec![10.0, 20.0, 30.0]);
}

#[test]
fn ingest_errors_name_the_problem() {
    let bad = file("series_id,value\nA,1\nA,abc\n");
    match ingest(bad.path(), InputFormat::LongCsv, 1, 1).unwrap_err() {
        Error::Parse { line, msg, .. } => {
            assert_eq!(line, 3);
            assert!(msg.contains("abc"));
        }
        other => panic!("unexpected {other}"),
    }
    let dup = file("A,1,2,3\nA,4,5,6\n");
    assert!(ingest(dup.path(), InputFormat::Wide, 1, 1).unwrap_err().to_string().contains('A'));
    let short = file("A,1\nB,1,2,3\n");
    assert!(ingest(short.path(), InputFormat::Wide, 1, 1).is_err());
    let nan = file("A,1,NaN,3\n");
    assert!(ingest(nan.path(), InputFormat::Wide, 1, 1).is_err());
}

#[test]
fn split_keeps_the_last_horizon_points() {
    let values: Vec<String> = (1..=20).map(|v| v.to_string()).collect();
    let f = file(&format!("M,{}\nW,{}\n", values.join(","), values.join(",")));
    let d = ingest(f.path(), InputFormat::Wide, 12, 8).unwrap();
    let (train, test) = split(&d).unwrap();
    assert_eq!(train[0].values, (1..=12).map(f64::from).collect::<Vec<_>>());
    assert_eq!(test.horizon(), 8);
    // Scoring against the true tail: a perfect forecast scores 0.
    let tail: Vec<f64> = (13..=20).map(f64::from).collect();
    assert_eq!(test.score(0, &tail).unwrap(), 0.0);
    let short = file("A,1,2,3\n");
    let d = ingest(short.path(), InputFormat::Wide, 1, 3).unwrap();
    assert!(matches!(split(&d).unwrap_err(), Error::TooShort { .. }));
}

#[test]
fn windows_never_reach_the_test_region() {
    let values: Vec<f64> = (0..50).map(|t| (t as f64 * 0.3).sin() + t as f64).collect();
    let f = file(&format!(
        "A,{}\n",
        values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
    ));
    let d = ingest(f.path(), InputFormat::Wide, 1, 10).unwrap();
    let (train, _) = split(&d).unwrap();
    let windows = make_windows(&train, &WindowParams::with_default_stride(8, 100), 0).unwrap();
    assert!(windows.iter().all(|w| w.start + 8 <= 40));
    assert_eq!(windows.last().unwrap().start, 32);
    let constant = TrainSeries { id: "c".into(), values: vec![2.0; 12], period: 1, class_index: 0 };
    let w = make_windows(&[constant], &WindowParams::with_default_stride(5, 10), 0).unwrap();
    assert!(w.iter().all(|w| w.values.iter().all(|v| *v == 0.0)));
    assert!(make_windows(&train, &WindowParams::with_default_stride(3, 10), 0).is_err());
}
