//! Feature rows, per-minute aggregates, scalers and LSTM lookback windows.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::evaluation::{ChronoSplit, Timestamped};
use crate::files::{csv_err, csv_writer};
use crate::ingest::{format_timestamp, JoinedRow, PriceBar};
use crate::sentiment::{SentimentLabel, SentimentResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub favourite_count: f64,
    pub retweet_count: f64,
    pub user_followers_count: f64,
    /// 0 or 1.
    pub user_verified: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceFeatures {
    pub high: f64,
    pub low: f64,
    pub open: f64,
    pub volume_from: f64,
    pub volume_to: f64,
}

impl From<&PriceBar> for PriceFeatures {
    fn from(b: &PriceBar) -> Self {
        PriceFeatures {
            high: b.high,
            low: b.low,
            open: b.open,
            volume_from: b.volume_from,
            volume_to: b.volume_to,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub timestamp: DateTime<Utc>,
    /// negative, neutral, positive
    pub sentiment_onehot: [f64; 3],
    pub sentiment_score: f64,
    pub metadata: Option<Metadata>,
    pub price: Option<PriceFeatures>,
    pub target_close: f64,
}

impl Timestamped for FeatureRow {
    fn timestamp(&self) -> DateTime<Utc> {
        self.timestamp
    }
}

pub fn onehot(label: SentimentLabel) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[label.index()] = 1.0;
    v
}

impl FeatureRow {
    /// Model inputs in column order (target excluded).
    pub fn values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(13);
        v.extend_from_slice(&self.sentiment_onehot);
        v.push(self.sentiment_score);
        if let Some(m) = &self.metadata {
            v.extend([m.favourite_count, m.retweet_count, m.user_followers_count, m.user_verified]);
        }
        if let Some(p) = &self.price {
            v.extend([p.high, p.low, p.open, p.volume_from, p.volume_to]);
        }
        v
    }

    pub fn column_names(&self) -> Vec<&'static str> {
        let mut names = vec!["sentiment_negative", "sentiment_neutral", "sentiment_positive", "sentiment_score"];
        if self.metadata.is_some() {
            names.extend(["favourite_count", "retweet_count", "user_followers_count", "user_verified"]);
        }
        if self.price.is_some() {
            names.extend(["high", "low", "open", "volume_from", "volume_to"]);
        }
        names
    }
}

fn sentiment_index(sentiments: &[SentimentResult]) -> HashMap<u64, &SentimentResult> {
    sentiments.iter().map(|s| (s.tweet_id, s)).collect()
}

/// One row per joined tweet, sorted by tweet time.
pub fn assemble_features(
    joined: &[JoinedRow],
    sentiments: &[SentimentResult],
    include_metadata: bool,
    include_price_features: bool,
) -> Result<Vec<FeatureRow>> {
    let by_id = sentiment_index(sentiments);
    let mut rows = joined
        .iter()
        .map(|j| {
            let s = by_id.get(&j.tweet.id).ok_or(Error::MissingSentiment(j.tweet.id))?;
            let t = &j.tweet;
            Ok((
                (t.created_at, t.id),
                FeatureRow {
                    timestamp: t.created_at,
                    sentiment_onehot: onehot(s.label),
                    sentiment_score: s.score,
                    metadata: include_metadata.then(|| Metadata {
                        favourite_count: t.favourite_count as f64,
                        retweet_count: t.retweet_count as f64,
                        user_followers_count: t.user_followers_count as f64,
                        user_verified: if t.user_verified { 1.0 } else { 0.0 },
                    }),
                    price: include_price_features.then(|| PriceFeatures::from(&j.bar)),
                    target_close: j.target_close,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.0);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// One row per bar minute from the first to the last joined bar, so the
/// series is uniform in time. Each row carries the mean sentiment score,
/// the majority label (ties to the earlier class), summed engagement counts,
/// whether any author was verified, and the bar's OHLCV. Minutes without
/// tweets get a neutral label and zero score / counts.
pub fn aggregate_minutes(
    joined: &[JoinedRow],
    sentiments: &[SentimentResult],
    bars: &[PriceBar],
    include_metadata: bool,
) -> Result<Vec<FeatureRow>> {
    let by_id = sentiment_index(sentiments);
    #[derive(Default)]
    struct Acc {
        labels: [usize; 3],
        score: f64,
        n: usize,
        fav: f64,
        rt: f64,
        followers: f64,
        verified: bool,
    }
    let mut acc: BTreeMap<DateTime<Utc>, Acc> = BTreeMap::new();
    for j in joined {
        let s = by_id.get(&j.tweet.id).ok_or(Error::MissingSentiment(j.tweet.id))?;
        let a = acc.entry(j.bar.time).or_default();
        a.labels[s.label.index()] += 1;
        a.score += s.score;
        a.n += 1;
        a.fav += j.tweet.favourite_count as f64;
        a.rt += j.tweet.retweet_count as f64;
        a.followers += j.tweet.user_followers_count as f64;
        a.verified |= j.tweet.user_verified;
    }
    let (Some(first), Some(last)) = (acc.keys().next().copied(), acc.keys().next_back().copied()) else {
        return Ok(Vec::new());
    };
    let empty = Acc::default();
    Ok(bars
        .iter()
        .filter(|b| b.time >= first && b.time <= last)
        .map(|b| {
            let a = acc.get(&b.time).unwrap_or(&empty);
            let label = if a.n == 0 {
                SentimentLabel::Neutral
            } else {
                let mut best = 0;
                for k in 1..3 {
                    if a.labels[k] > a.labels[best] {
                        best = k;
                    }
                }
                SentimentLabel::from_index(best)
            };
            FeatureRow {
                timestamp: b.time,
                sentiment_onehot: onehot(label),
                sentiment_score: if a.n == 0 { 0.0 } else { a.score / a.n as f64 },
                metadata: include_metadata.then(|| Metadata {
                    favourite_count: a.fav,
                    retweet_count: a.rt,
                    user_followers_count: a.followers,
                    user_verified: if a.verified { 1.0 } else { 0.0 },
                }),
                price: Some(PriceFeatures::from(b)),
                target_close: b.close,
            }
        })
        .collect())
}

pub fn write_feature_matrix(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    if let Some(first) = rows.first() {
        let mut header = vec!["timestamp"];
        header.extend(first.column_names());
        header.push("target_close");
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
    }
    for r in rows {
        let mut rec = vec![format_timestamp(r.timestamp)];
        rec.extend(r.values().iter().map(f64::to_string));
        rec.push(r.target_close.to_string());
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalerKind {
    Standard,
    MinMax,
}

/// Per-column affine scaler, `(x - offset) / spread`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub kind: ScalerKind,
    /// Mean (standard) or min (min-max) per column.
    pub offset: Vec<f64>,
    /// Population std (standard) or max - min (min-max) per column. Zero
    /// spread is stored as-is; see [`Scaler::transform`].
    pub spread: Vec<f64>,
}

impl Scaler {
    /// Fits on training rows only.
    pub fn fit(rows: &[Vec<f64>], kind: ScalerKind) -> Result<Self> {
        let width = rows.first().map(Vec::len).ok_or_else(|| {
            Error::InsufficientData("cannot fit a scaler on zero rows".into())
        })?;
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Data("ragged feature rows".into()));
        }
        let n = rows.len() as f64;
        let mut offset = vec![0.0; width];
        let mut spread = vec![0.0; width];
        for c in 0..width {
            let col = rows.iter().map(|r| r[c]);
            match kind {
                ScalerKind::Standard => {
                    let mean = col.clone().sum::<f64>() / n;
                    let var = col.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                    offset[c] = mean;
                    spread[c] = var.sqrt();
                }
                ScalerKind::MinMax => {
                    let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                    offset[c] = lo;
                    spread[c] = hi - lo;
                }
            }
        }
        Ok(Scaler { kind, offset, spread })
    }

    pub fn fit_column(values: &[f64], kind: ScalerKind) -> Result<Self> {
        let rows: Vec<Vec<f64>> = values.iter().map(|v| vec![*v]).collect();
        Self::fit(&rows, kind)
    }

    pub fn width(&self) -> usize {
        self.offset.len()
    }

    /// Scales one value of column `c`. A zero-variance column gets divisor 1
    /// under standard scaling (so it centres to 0); a max = min column maps
    /// to 0 under min-max.
    pub fn transform_value(&self, c: usize, v: f64) -> f64 {
        let s = self.spread[c];
        match self.kind {
            ScalerKind::Standard => (v - self.offset[c]) / if s > 0.0 { s } else { 1.0 },
            ScalerKind::MinMax if s > 0.0 => (v - self.offset[c]) / s,
            ScalerKind::MinMax => 0.0,
        }
    }

    pub fn inverse_value(&self, c: usize, v: f64) -> f64 {
        let s = self.spread[c];
        match self.kind {
            ScalerKind::Standard => v * if s > 0.0 { s } else { 1.0 } + self.offset[c],
            ScalerKind::MinMax => v * s + self.offset[c],
        }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(c, v)| self.transform_value(c, *v)).collect()
    }

    pub fn inverse_transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(c, v)| self.inverse_value(c, *v)).collect()
    }

    pub fn transform_rows(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

/// `lookback` consecutive input rows and the scaled close that follows them.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesWindow {
    /// Row-major `lookback × width`.
    pub inputs: Vec<f64>,
    pub lookback: usize,
    pub width: usize,
    pub target: f64,
    /// Index of the target row in the source series.
    pub target_index: usize,
}

impl SeriesWindow {
    pub fn step(&self, t: usize) -> &[f64] {
        &self.inputs[t * self.width..(t + 1) * self.width]
    }
}

fn window(inputs: &[Vec<f64>], targets: &[f64], lookback: usize, t: usize) -> SeriesWindow {
    let width = inputs[0].len();
    let mut flat = Vec::with_capacity(lookback * width);
    for row in &inputs[t - lookback..t] {
        flat.extend_from_slice(row);
    }
    SeriesWindow {
        inputs: flat,
        lookback,
        width,
        target: targets[t],
        target_index: t,
    }
}

/// All stride-1 windows of an unsplit series: `N - lookback` of them.
pub fn all_windows(inputs: &[Vec<f64>], targets: &[f64], lookback: usize) -> Vec<SeriesWindow> {
    if lookback == 0 || inputs.len() <= lookback {
        return Vec::new();
    }
    (lookback..inputs.len()).map(|t| window(inputs, targets, lookback, t)).collect()
}

/// Appends each row's scaled close as an extra input channel, so a window
/// sees the closes of the rows before its target.
pub fn with_target_history(inputs: &[Vec<f64>], scaled_targets: &[f64]) -> Vec<Vec<f64>> {
    inputs
        .iter()
        .zip(scaled_targets)
        .map(|(row, y)| {
            let mut r = row.clone();
            r.push(*y);
            r
        })
        .collect()
}

/// Train windows have inputs and target inside the train partition; test
/// windows have targets in the test partition and may read lookback rows
/// from the train tail.
pub fn build_windows(
    inputs: &[Vec<f64>],
    targets: &[f64],
    times: &[DateTime<Utc>],
    lookback: usize,
    split: &ChronoSplit,
) -> Result<(Vec<SeriesWindow>, Vec<SeriesWindow>)> {
    if lookback == 0 {
        return Err(Error::Config(vec!["lookback must be at least 1".into()]));
    }
    if inputs.len() != targets.len() || inputs.len() != times.len() {
        return Err(Error::Data("inputs, targets and times differ in length".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Data("window rows must be time-sorted".into()));
    }
    let n_train = times.iter().take_while(|t| split.is_train(**t)).count();
    let n_test = times.len() - n_train;
    for (name, n) in [("train", n_train), ("test", n_test)] {
        if n < lookback + 1 {
            return Err(Error::InsufficientHistory(format!(
                "{name} partition has {n} rows, lookback {lookback} needs at least {}",
                lookback + 1
            )));
        }
    }
    let train = (lookback..n_train).map(|t| window(inputs, targets, lookback, t)).collect();
    let test = (n_train..times.len()).map(|t| window(inputs, targets, lookback, t)).collect();
    Ok((train, test))
}
