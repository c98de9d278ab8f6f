//! Three-class tweet sentiment.
//!
//! The classifier is multinomial logistic regression over a signed hashed
//! bag of unigrams and bigrams (2^18 buckets), trained with mini-batch
//! gradient descent on cross-entropy plus L2. Externally produced scores can
//! be imported instead through [`import_scores`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::hashing::hashed_tf;
use crate::ingest::JoinedRow;
use crate::files::{csv_err, csv_writer, read_json, write_json};
use crate::{seed, Error, Result};

pub const DEFAULT_HASH_DIM: usize = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

impl SentimentLabel {
    /// Class order used everywhere: negative, neutral, positive.
    pub const ALL: [SentimentLabel; 3] = [Self::Negative, Self::Neutral, Self::Positive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Negative => "negative",
            Self::Neutral => "neutral",
            Self::Positive => "positive",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "negative" => Ok(Self::Negative),
            "neutral" => Ok(Self::Neutral),
            "positive" => Ok(Self::Positive),
            other => Err(format!("unknown sentiment label '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentResult {
    pub tweet_id: u64,
    pub label: SentimentLabel,
    /// Confidence of `label`, in `[0, 1]`.
    pub score: f64,
}

impl SentimentResult {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(0.0..=1.0).contains(&self.score) {
            return Err(format!("score {} outside [0, 1]", self.score));
        }
        Ok(())
    }
}

/// Numerically stable softmax over a logit triple.
pub fn softmax(logits: [f64; 3]) -> [f64; 3] {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e = logits.map(|z| (z - m).exp());
    let total: f64 = e.iter().sum();
    e.map(|v| v / total)
}

/// Index of the largest entry; ties go to the earlier class.
fn argmax(p: &[f64; 3]) -> usize {
    let mut best = 0;
    for k in 1..3 {
        if p[k] > p[best] {
            best = k;
        }
    }
    best
}

/// Unigram and bigram features of an already cleaned text.
pub fn text_features(clean_text: &str, dim: usize) -> Vec<(usize, f64)> {
    let words: Vec<&str> = clean_text.split_whitespace().collect();
    let bigrams: Vec<String> = words.windows(2).map(|w| format!("{} {}", w[0], w[1])).collect();
    hashed_tf(
        words.iter().copied().chain(bigrams.iter().map(String::as_str)),
        dim,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Fraction of the corpus held out for accuracy reporting.
    pub holdout_fraction: f64,
    pub hash_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 10,
            l2: 1e-4,
            batch_size: 64,
            seed: 42,
            holdout_fraction: 0.2,
            hash_dim: DEFAULT_HASH_DIM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_accuracy: f64,
    pub holdout_accuracy: f64,
    pub n_train: usize,
    pub n_holdout: usize,
    /// Corpus examples per class, negative / neutral / positive.
    pub class_counts: [usize; 3],
    /// Mean training cross-entropy before training (index 0) and after each epoch.
    pub epoch_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentClassifier {
    hash_dim: usize,
    /// Row-major 3 × hash_dim; the true weights are `scale * weights`.
    weights: Vec<f64>,
    scale: f64,
    bias: [f64; 3],
    config: TrainConfig,
}

#[derive(Serialize, Deserialize)]
struct SavedClassifier {
    format: String,
    hash_dim: usize,
    bias: [f64; 3],
    config: TrainConfig,
    /// `[bucket, w_negative, w_neutral, w_positive]` for nonzero buckets.
    columns: Vec<(usize, [f64; 3])>,
}

impl SentimentClassifier {
    fn zeros(config: &TrainConfig) -> Self {
        SentimentClassifier {
            hash_dim: config.hash_dim,
            weights: vec![0.0; 3 * config.hash_dim],
            scale: 1.0,
            bias: [0.0; 3],
            config: config.clone(),
        }
    }

    pub fn hash_dim(&self) -> usize {
        self.hash_dim
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Materialised weight row for class `k`.
    pub fn weight_row(&self, k: usize) -> Vec<f64> {
        self.weights[k * self.hash_dim..(k + 1) * self.hash_dim]
            .iter()
            .map(|w| w * self.scale)
            .collect()
    }

    fn logits(&self, x: &[(usize, f64)]) -> [f64; 3] {
        let mut z = self.bias;
        for (k, zk) in z.iter_mut().enumerate() {
            let row = &self.weights[k * self.hash_dim..];
            *zk += self.scale * x.iter().map(|(i, v)| row[*i] * v).sum::<f64>();
        }
        z
    }

    pub fn probabilities(&self, clean_text: &str) -> [f64; 3] {
        let x = text_features(clean_text, self.hash_dim);
        if x.is_empty() {
            return [1.0 / 3.0; 3];
        }
        softmax(self.logits(&x))
    }

    fn fold_scale(&mut self) {
        let s = self.scale;
        self.weights.iter_mut().for_each(|w| *w *= s);
        self.scale = 1.0;
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let columns = (0..self.hash_dim)
            .filter_map(|i| {
                let col = [0, 1, 2].map(|k| self.weights[k * self.hash_dim + i] * self.scale);
                (col != [0.0; 3]).then_some((i, col))
            })
            .collect();
        let saved = SavedClassifier {
            format: "sentiment-classifier/1".into(),
            hash_dim: self.hash_dim,
            bias: self.bias,
            config: self.config.clone(),
            columns,
        };
        write_json(path, &saved)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let saved: SavedClassifier = read_json(path)?;
        let mut model = SentimentClassifier::zeros(&saved.config);
        model.hash_dim = saved.hash_dim;
        model.weights = vec![0.0; 3 * saved.hash_dim];
        model.bias = saved.bias;
        for (i, col) in saved.columns {
            if i >= saved.hash_dim {
                return Err(Error::Data(format!("{}: bucket {i} out of range", path.display())));
            }
            for k in 0..3 {
                model.weights[k * saved.hash_dim + i] = col[k];
            }
        }
        Ok(model)
    }
}

fn mean_loss(model: &SentimentClassifier, xs: &[Vec<(usize, f64)>], ys: &[usize], idx: &[usize]) -> f64 {
    let total: f64 = idx
        .iter()
        .map(|&i| -softmax(model.logits(&xs[i]))[ys[i]].max(1e-300).ln())
        .sum();
    total / idx.len().max(1) as f64
}

fn accuracy(model: &SentimentClassifier, xs: &[Vec<(usize, f64)>], ys: &[usize], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return f64::NAN;
    }
    let hits = idx
        .iter()
        .filter(|&&i| argmax(&softmax(model.logits(&xs[i]))) == ys[i])
        .count();
    hits as f64 / idx.len() as f64
}

/// Trains on `(clean_text, label)` pairs. Deterministic given `config.seed`.
pub fn train_classifier(
    corpus: &[(String, SentimentLabel)],
    config: &TrainConfig,
) -> Result<(SentimentClassifier, TrainReport)> {
    let mut class_counts = [0usize; 3];
    for (_, label) in corpus {
        class_counts[label.index()] += 1;
    }
    if let Some(k) = class_counts.iter().position(|&c| c == 0) {
        return Err(Error::DegenerateCorpus(format!(
            "no {} examples among {} texts",
            SentimentLabel::from_index(k),
            corpus.len()
        )));
    }
    if !(config.holdout_fraction > 0.0 && config.holdout_fraction < 1.0) {
        return Err(Error::Config(vec![format!(
            "holdout_fraction must be in (0, 1), got {}",
            config.holdout_fraction
        )]));
    }
    if config.hash_dim == 0 || config.batch_size == 0 {
        return Err(Error::Config(vec!["hash_dim and batch_size must be positive".into()]));
    }

    let xs: Vec<Vec<(usize, f64)>> = corpus.iter().map(|(t, _)| text_features(t, config.hash_dim)).collect();
    let ys: Vec<usize> = corpus.iter().map(|(_, l)| l.index()).collect();

    let mut rng = seed::rng(config.seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut rng);
    let n_holdout = ((corpus.len() as f64 * config.holdout_fraction).round() as usize).clamp(1, corpus.len() - 1);
    let (holdout, train) = order.split_at(n_holdout);
    let mut train = train.to_vec();
    let holdout = holdout.to_vec();

    let mut model = SentimentClassifier::zeros(config);
    let dim = config.hash_dim;
    let lr = config.learning_rate;
    let mut epoch_losses = vec![mean_loss(&model, &xs, &ys, &train)];

    for _ in 0..config.epochs {
        train.shuffle(&mut rng);
        for batch in train.chunks(config.batch_size) {
            let step = lr / batch.len() as f64;
            let residuals: Vec<[f64; 3]> = batch
                .iter()
                .map(|&i| {
                    let mut p = softmax(model.logits(&xs[i]));
                    p[ys[i]] -= 1.0;
                    p
                })
                .collect();
            // L2 as multiplicative decay applied lazily through `scale`
            model.scale *= 1.0 - lr * config.l2;
            if model.scale < 1e-6 {
                model.fold_scale();
            }
            for (&i, g) in batch.iter().zip(&residuals) {
                for k in 0..3 {
                    let coef = step * g[k] / model.scale;
                    let row = &mut model.weights[k * dim..(k + 1) * dim];
                    for (j, v) in &xs[i] {
                        row[*j] -= coef * v;
                    }
                    model.bias[k] -= step * g[k];
                }
            }
        }
        let loss = mean_loss(&model, &xs, &ys, &train);
        if !loss.is_finite() {
            return Err(Error::Numerical(format!(
                "sentiment training loss became non-finite at epoch {}",
                epoch_losses.len()
            )));
        }
        epoch_losses.push(loss);
    }
    model.fold_scale();

    let report = TrainReport {
        train_accuracy: accuracy(&model, &xs, &ys, &train),
        holdout_accuracy: accuracy(&model, &xs, &ys, &holdout),
        n_train: train.len(),
        n_holdout: holdout.len(),
        class_counts,
        epoch_losses,
    };
    Ok((model, report))
}

/// Label is the argmax class, score its probability. Empty text scores as
/// `(neutral, 1/3)`.
pub fn score_text(model: &SentimentClassifier, tweet_id: u64, clean_text: &str) -> SentimentResult {
    let x = text_features(clean_text, model.hash_dim);
    if x.is_empty() {
        return SentimentResult {
            tweet_id,
            label: SentimentLabel::Neutral,
            score: 1.0 / 3.0,
        };
    }
    let p = softmax(model.logits(&x));
    let k = argmax(&p);
    SentimentResult {
        tweet_id,
        label: SentimentLabel::from_index(k),
        score: p[k],
    }
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<(String, SentimentLabel)>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.into(),
        })
    };
    let (text_col, label_col) = (col("text")?, col("label")?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let label = rec[label_col]
            .parse()
            .map_err(|e| Error::Data(format!("{}:{}: {e}", path.display(), i + 2)))?;
        out.push((rec[text_col].to_string(), label));
    }
    Ok(out)
}

pub fn write_corpus(path: impl AsRef<Path>, corpus: &[(String, SentimentLabel)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    w.write_record(["text", "label"]).map_err(|e| csv_err(path, e))?;
    for (text, label) in corpus {
        w.write_record([text.as_str(), label.as_str()]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImportedScores {
    pub results: Vec<SentimentResult>,
    /// `(line number, reason)` for every rejected row.
    pub rejected: Vec<(usize, String)>,
}

/// Reads `tweet_id,label,score` rows, rejecting (not failing on) rows that
/// violate the result invariants.
pub fn import_scores(path: impl AsRef<Path>) -> Result<ImportedScores> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let mut cols = [0usize; 3];
    for (slot, name) in cols.iter_mut().zip(["tweet_id", "label", "score"]) {
        *slot = headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.into(),
        })?;
    }
    let mut out = ImportedScores::default();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let parsed = rec.map_err(|e| e.to_string()).and_then(|rec| {
            let get = |c: usize| rec.get(c).ok_or("missing field".to_string());
            let tweet_id = get(cols[0])?.parse::<u64>().map_err(|e| format!("tweet_id: {e}"))?;
            let label = get(cols[1])?.parse::<SentimentLabel>()?;
            let score = get(cols[2])?.parse::<f64>().map_err(|e| format!("score: {e}"))?;
            let r = SentimentResult { tweet_id, label, score };
            r.validate()?;
            Ok(r)
        });
        match parsed {
            Ok(r) => out.results.push(r),
            Err(msg) => {
                log::warn!("{} line {line}: {msg}", path.display());
                out.rejected.push((line, msg));
            }
        }
    }
    Ok(out)
}

/// Keeps results for known tweet ids; returns them with the number of
/// results that matched no tweet.
pub fn intersect_scores(results: &[SentimentResult], tweet_ids: &HashSet<u64>) -> (Vec<SentimentResult>, usize) {
    let (keep, drop): (Vec<SentimentResult>, Vec<SentimentResult>) =
        results.iter().partition(|r| tweet_ids.contains(&r.tweet_id));
    if !drop.is_empty() {
        log::warn!("{} imported scores match no tweet", drop.len());
    }
    (keep, drop.len())
}

pub fn write_scores(path: impl AsRef<Path>, results: &[SentimentResult]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    w.write_record(["tweet_id", "label", "score"]).map_err(|e| csv_err(path, e))?;
    for r in results {
        w.write_record([r.tweet_id.to_string(), r.label.to_string(), r.score.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-class label weights for the weighted sentiment series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentWeights {
    pub positive: f64,
    pub neutral: f64,
    pub negative: f64,
}

impl Default for SentimentWeights {
    fn default() -> Self {
        SentimentWeights {
            positive: 1.0,
            neutral: 0.0,
            negative: -1.0,
        }
    }
}

impl SentimentWeights {
    pub fn weight(&self, label: SentimentLabel) -> f64 {
        match label {
            SentimentLabel::Positive => self.positive,
            SentimentLabel::Neutral => self.neutral,
            SentimentLabel::Negative => self.negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSentimentPoint {
    pub bucket_start: DateTime<Utc>,
    pub weighted_score: f64,
    pub mean_price: f64,
    pub tweet_count: usize,
}

/// Buckets results by tweet time and averages `weight(label) * score`.
///
/// With `scale_to_price`, the scores are mapped affinely onto the range of
/// the bucket mean prices (a flat series lands on the middle of that range).
pub fn weighted_sentiment_series(
    results: &[SentimentResult],
    joined: &[JoinedRow],
    bucket: Duration,
    weights: SentimentWeights,
    scale_to_price: bool,
) -> Result<Vec<WeightedSentimentPoint>> {
    let width = bucket.num_seconds();
    if width < 60 {
        return Err(Error::Config(vec![format!("bucket must be at least one minute, got {width}s")]));
    }
    let by_id: HashMap<u64, &JoinedRow> = joined.iter().map(|r| (r.tweet.id, r)).collect();
    // bucket start -> (sum weighted score, sum price, count)
    let mut acc: BTreeMap<i64, (f64, f64, usize)> = BTreeMap::new();
    for r in results {
        let row = by_id.get(&r.tweet_id).ok_or_else(|| {
            Error::Data(format!("sentiment result for tweet {} has no joined row", r.tweet_id))
        })?;
        let start = row.tweet.created_at.timestamp().div_euclid(width) * width;
        let e = acc.entry(start).or_default();
        e.0 += weights.weight(r.label) * r.score;
        e.1 += row.target_close;
        e.2 += 1;
    }
    let mut points: Vec<WeightedSentimentPoint> = acc
        .into_iter()
        .map(|(start, (ws, price, n))| WeightedSentimentPoint {
            bucket_start: Utc.timestamp_opt(start, 0).unwrap(),
            weighted_score: ws / n as f64,
            mean_price: price / n as f64,
            tweet_count: n,
        })
        .collect();
    if scale_to_price && !points.is_empty() {
        let (smin, smax) = min_max(points.iter().map(|p| p.weighted_score));
        let (pmin, pmax) = min_max(points.iter().map(|p| p.mean_price));
        for p in &mut points {
            p.weighted_score = if smax > smin {
                pmin + (p.weighted_score - smin) / (smax - smin) * (pmax - pmin)
            } else {
                0.5 * (pmin + pmax)
            };
        }
    }
    Ok(points)
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub fn write_weighted_series(path: impl AsRef<Path>, points: &[WeightedSentimentPoint]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv_writer(path)?;
    w.write_record(["bucket_start", "weighted_score", "mean_price", "tweet_count"])
        .map_err(|e| csv_err(path, e))?;
    for p in points {
        w.write_record([
            crate::ingest::format_timestamp(p.bucket_start),
            p.weighted_score.to_string(),
            p.mean_price.to_string(),
            p.tweet_count.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::sentiment_corpus;
    use proptest::prelude::*;

    fn small_config() -> TrainConfig {
        TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn degenerate_corpus_rejected() {
        let corpus = vec![("good".to_string(), SentimentLabel::Positive); 10];
        let err = train_classifier(&corpus, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateCorpus(_)));
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = sentiment_corpus(300, 3);
        let (a, ra) = train_classifier(&corpus, &small_config()).unwrap();
        let (b, rb) = train_classifier(&corpus, &small_config()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn loss_decreases_and_keywords_classify() {
        let corpus = sentiment_corpus(600, 11);
        let (model, report) = train_classifier(&corpus, &small_config()).unwrap();
        assert!(report.epoch_losses.last().unwrap() < &report.epoch_losses[0]);
        let positive_words = crate::fixture::KEYWORDS_POSITIVE[..4].join(" ");
        assert_eq!(score_text(&model, 1, &positive_words).label, SentimentLabel::Positive);
    }

    #[test]
    fn empty_text_is_uninformative() {
        let corpus = sentiment_corpus(90, 1);
        let (model, _) = train_classifier(&corpus, &small_config()).unwrap();
        let r = score_text(&model, 9, "");
        assert_eq!(r.label, SentimentLabel::Neutral);
        assert!((r.score - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ties_go_to_earlier_class() {
        assert_eq!(argmax(&[0.4, 0.4, 0.2]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
    }

    #[test]
    fn save_load_roundtrip() {
        let corpus = sentiment_corpus(120, 5);
        let (model, _) = train_classifier(&corpus, &small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clf.json");
        model.save(&path).unwrap();
        let loaded = SentimentClassifier::load(&path).unwrap();
        for (text, _) in corpus.iter().take(20) {
            assert_eq!(model.probabilities(text), loaded.probabilities(text));
        }
    }

    #[test]
    fn import_validates_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        std::fs::write(&path, "tweet_id,label,score\n18,positive,1.7\n17,positive,0.98\n19,happy,0.5\n").unwrap();
        let imported = import_scores(&path).unwrap();
        assert_eq!(
            imported.results,
            vec![SentimentResult { tweet_id: 17, label: SentimentLabel::Positive, score: 0.98 }]
        );
        assert_eq!(imported.rejected.len(), 2);
        assert_eq!(imported.rejected[0].0, 2);
        assert_eq!(imported.rejected[1].0, 4);
    }

    #[test]
    fn disjoint_ids_leave_nothing() {
        let results: Vec<SentimentResult> = (100..110)
            .map(|id| SentimentResult { tweet_id: id, label: SentimentLabel::Neutral, score: 0.5 })
            .collect();
        let known: HashSet<u64> = (0..50).collect();
        let (kept, unmatched) = intersect_scores(&results, &known);
        // brute-force set intersection
        let expected = results.iter().filter(|r| known.iter().any(|k| *k == r.tweet_id)).count();
        assert_eq!(kept.len(), expected);
        assert_eq!(unmatched, results.len() - expected);
        assert!(kept.is_empty());
    }

    proptest! {
        #[test]
        fn softmax_is_a_distribution(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -50.0f64..50.0) {
            let p = softmax([a, b, c]);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!(p.iter().cloned().fold(0.0, f64::max) >= 1.0 / 3.0);
        }
    }
}
