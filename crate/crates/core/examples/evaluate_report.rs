//! Metrics and report files for a pair of toy forecasters.

use chrono::{Duration, TimeZone, Utc};
use cryptotrend::evaluation::{compute_metrics, generate_report, naive_last_value, ModelOutput, Partition, SeriesPoint};

fn main() -> cryptotrend::Result<()> {
    let actual: Vec<f64> = (0..50).map(|t| 100.0 + (t as f64 * 0.3).sin() * 5.0).collect();
    let naive = naive_last_value(&actual[..49]);
    let smooth: Vec<f64> = actual[1..].iter().zip(&actual[..49]).map(|(a, b)| 0.5 * (a + b)).collect();
    let truth = &actual[1..];

    let metrics = vec![compute_metrics("naive", "DEMO", &naive, truth)?, compute_metrics("smooth", "DEMO", &smooth, truth)?];
    for m in &metrics {
        println!("{}: MAE {:.3} RMSE {:.3} max δ {:.2}%", m.model, m.mae, m.rmse, m.max_delta_pct);
    }

    let t0 = Utc.with_ymd_and_hms(2022, 3, 1, 0, 0, 0).unwrap();
    let series = |pred: &[f64]| {
        pred.iter()
            .zip(truth)
            .enumerate()
            .map(|(i, (p, a))| SeriesPoint {
                timestamp: t0 + Duration::minutes(i as i64 + 1),
                actual: *a,
                predicted: *p,
                partition: Partition::Test,
            })
            .collect()
    };
    let outputs = vec![
        ModelOutput { model: "naive".into(), coin: "DEMO".into(), loss_curve: vec![], series: series(&naive) },
        ModelOutput { model: "smooth".into(), coin: "DEMO".into(), loss_curve: vec![], series: series(&smooth) },
    ];
    let dir = tempfile::tempdir().expect("tempdir");
    let files = generate_report(dir.path(), &metrics, &outputs)?;
    println!("wrote {} and {} series files", files.metrics_csv.display(), files.series.len());
    Ok(())
}
