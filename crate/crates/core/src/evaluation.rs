//! Chronological splitting, error metrics and report files.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::files::{csv_err, csv_writer, write_json};
use crate::ingest::format_timestamp;
use crate::{Error, Result};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.70;

pub trait Timestamped {
    fn timestamp(&self) -> DateTime<Utc>;
}

impl Timestamped for DateTime<Utc> {
    fn timestamp(&self) -> DateTime<Utc> {
        *self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChronoSplit {
    /// First timestamp of the test partition.
    pub split_timestamp: DateTime<Utc>,
    pub train_fraction: f64,
    pub n_train: usize,
    pub n_test: usize,
}

impl ChronoSplit {
    pub fn is_train(&self, ts: DateTime<Utc>) -> bool {
        ts < self.split_timestamp
    }
}

/// `ceil(fraction * n)` that does not round 70.00000000000001 up to 71.
fn ceil_count(fraction: f64, n: usize) -> usize {
    let x = fraction * n as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Splits time-sorted rows: the first `ceil(fraction * N)` go to training,
/// the rest to test, no shuffling. If the boundary falls inside a run of
/// equal timestamps the run is kept whole in the training side so that
/// every train timestamp is strictly before every test timestamp.
pub fn chrono_split<T: Timestamped>(rows: &[T], fraction: f64) -> Result<(ChronoSplit, &[T], &[T])> {
    if rows.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "chronological split needs at least 10 rows, got {}",
            rows.len()
        )));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(vec![format!("train fraction must be in (0, 1), got {fraction}")]));
    }
    if rows.windows(2).any(|w| w[1].timestamp() < w[0].timestamp()) {
        return Err(Error::Data("rows must be sorted by timestamp before splitting".into()));
    }
    let mut n_train = ceil_count(fraction, rows.len()).clamp(1, rows.len() - 1);
    while n_train < rows.len() && rows[n_train].timestamp() == rows[n_train - 1].timestamp() {
        n_train += 1;
    }
    if n_train == rows.len() {
        return Err(Error::InsufficientData("all rows share the boundary timestamp; test partition is empty".into()));
    }
    let (train, test) = rows.split_at(n_train);
    let split = ChronoSplit {
        split_timestamp: test[0].timestamp(),
        train_fraction: fraction,
        n_train,
        n_test: test.len(),
    };
    Ok((split, train, test))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub model: String,
    pub coin: String,
    pub mae: f64,
    pub rmse: f64,
    /// Largest pointwise `100 * |pred - actual| / actual`.
    pub max_delta_pct: f64,
    pub n_test: usize,
}

pub fn compute_metrics(model: &str, coin: &str, predictions: &[f64], actuals: &[f64]) -> Result<ModelMetrics> {
    if predictions.len() != actuals.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} actuals",
            predictions.len(),
            actuals.len()
        )));
    }
    if actuals.is_empty() {
        return Err(Error::InsufficientData("no test points to evaluate".into()));
    }
    if let Some(bad) = actuals.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::Data(format!("actual price {bad} is not positive")));
    }
    let n = actuals.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut max_delta: f64 = 0.0;
    for (p, a) in predictions.iter().zip(actuals) {
        let err = (p - a).abs();
        abs_sum += err;
        sq_sum += err * err;
        max_delta = max_delta.max(100.0 * err / a);
    }
    let mae = abs_sum / n;
    // guard the power-mean inequality against last-ulp rounding
    let rmse = (sq_sum / n).sqrt().max(mae);
    Ok(ModelMetrics {
        model: model.to_string(),
        coin: coin.to_string(),
        mae,
        rmse,
        max_delta_pct: max_delta,
        n_test: actuals.len(),
    })
}

/// Predicts each test close as the previous close.
pub fn naive_last_value(previous: &[f64]) -> Vec<f64> {
    previous.to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Test,
}

impl Partition {
    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub timestamp: DateTime<Utc>,
    pub actual: f64,
    pub predicted: f64,
    pub partition: Partition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelOutput {
    pub model: String,
    pub coin: String,
    pub loss_curve: Vec<f64>,
    pub series: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub units: String,
    pub note: String,
}

impl Default for ReportMeta {
    fn default() -> Self {
        ReportMeta {
            units: "USD".into(),
            note: "errors are computed after inverting the min-max target scaling; scaled-unit errors are mae / (train max - train min)".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportFiles {
    pub metrics_csv: PathBuf,
    pub metrics_json: PathBuf,
    pub loss_curves: Vec<PathBuf>,
    pub series: Vec<PathBuf>,
}

pub fn write_metrics_csv(path: &Path, metrics: &[ModelMetrics]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["model", "coin", "mae", "rmse", "max_delta_pct", "n_test"])
        .map_err(|e| csv_err(path, e))?;
    for m in metrics {
        w.write_record([
            m.model.clone(),
            m.coin.clone(),
            m.mae.to_string(),
            m.rmse.to_string(),
            m.max_delta_pct.to_string(),
            m.n_test.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_loss_curve(path: &Path, losses: &[f64]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["epoch", "loss"]).map_err(|e| csv_err(path, e))?;
    for (i, l) in losses.iter().enumerate() {
        w.write_record([(i + 1).to_string(), l.to_string()]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_series(path: &Path, series: &[SeriesPoint]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["timestamp", "actual", "predicted", "partition"])
        .map_err(|e| csv_err(path, e))?;
    for p in series {
        w.write_record([
            format_timestamp(p.timestamp),
            p.actual.to_string(),
            p.predicted.to_string(),
            p.partition.as_str().to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `metrics.csv`, `metrics.json` and, per model output,
/// `<model>/loss.csv` and `<model>/series.csv` under `dir`.
pub fn generate_report(dir: &Path, metrics: &[ModelMetrics], outputs: &[ModelOutput]) -> Result<ReportFiles> {
    if metrics.is_empty() {
        return Err(Error::InsufficientData("report needs at least one metrics row".into()));
    }
    let mut files = ReportFiles {
        metrics_csv: dir.join("metrics.csv"),
        metrics_json: dir.join("metrics.json"),
        ..Default::default()
    };
    write_metrics_csv(&files.metrics_csv, metrics)?;
    #[derive(Serialize)]
    struct MetricsJson<'a> {
        meta: ReportMeta,
        metrics: &'a [ModelMetrics],
    }
    write_json(
        &files.metrics_json,
        &MetricsJson {
            meta: ReportMeta::default(),
            metrics,
        },
    )?;
    for out in outputs {
        let model_dir = dir.join(&out.model);
        let loss = model_dir.join("loss.csv");
        write_loss_curve(&loss, &out.loss_curve)?;
        let series = model_dir.join("series.csv");
        write_series(&series, &out.series)?;
        files.loss_curves.push(loss);
        files.series.push(series);
    }
    Ok(files)
}
