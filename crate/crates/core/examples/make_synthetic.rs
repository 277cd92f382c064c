//! Writes the bundled synthetic datasets in long CSV form.
//!
//!     cargo run --example make_synthetic -- mixture data/synthetic20.csv
//!     cargo run --example make_synthetic -- daily /tmp/daily111.csv
//!
//! `mixture`: 20 series of 200 points, two sinusoids plus trend, 5% noise.
//! `daily`: 111 series of 791 points with a weekly profile.

use tsfeat::synthetic::{daily_weekly_dataset, mixture_dataset, to_long_csv};

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind = args.next().unwrap_or_else(|| "mixture".into());
    let dataset = match kind.as_str() {
        "mixture" => mixture_dataset(20, 200, 1, 8, 0.05, 0),
        "daily" => daily_weekly_dataset(111, 791, 56, 0),
        other => {
            eprintln!("unknown dataset {other:?}; expected `mixture` or `daily`");
            std::process::exit(2);
        }
    };
    let path = args.next().unwrap_or_else(|| format!("data/{kind}.csv"));
    std::fs::write(&path, to_long_csv(&dataset))?;
    eprintln!("wrote {} series to {path}", dataset.len());
    Ok(())
}
