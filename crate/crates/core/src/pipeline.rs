//! Stage orchestration: configuration, the stage graph and on-disk artifacts.
//!
//! Every artifact lives under `<output_dir>/<coin>/<stage>/`. A stage reads
//! only its prerequisites' artifacts, so stages can be rerun one at a time.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::Duration;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    corpus_stats, embed_texts, engagement_by_verified, import_embeddings, label_distribution, pca_2d,
    sample_per_class, write_engagement, write_freqs, write_label_distribution, write_pca_points,
    DEFAULT_EMBEDDING_DIM, DEFAULT_PER_CLASS,
};
use crate::evaluation::{
    chrono_split, compute_metrics, generate_report, write_metrics_csv, ChronoSplit, ModelMetrics, ModelOutput,
    Partition, SeriesPoint, DEFAULT_TRAIN_FRACTION,
};
use crate::features::{
    aggregate_minutes, assemble_features, build_windows, with_target_history, write_feature_matrix, FeatureRow,
    Scaler, ScalerKind, SeriesWindow,
};
use crate::files::{read_json, write_json};
use crate::fixture::{write_fixture, FixtureConfig};
use crate::ingest::{
    join_tweets_prices, parse_price_bars, parse_tweets, read_joined_jsonl, write_joined_csv, write_joined_jsonl,
    write_price_bars, IngestReport, JoinCounts, JoinedRow, PriceBar,
};
use crate::models::{
    fit_ols, fit_random_forest, fit_sgd_huber, load_model, lstm_train, save_model, Forest, ForestConfig,
    LinearModel, LstmConfig, LstmModel, ModelKind, SgdConfig,
};
use crate::preprocess::{clean_tweet, crypto_relevance, CleanTweet, CryptoLexicon, RelevanceMode};
use crate::seed::stage_seed;
use crate::sentiment::{
    import_scores, intersect_scores, read_corpus, score_text, train_classifier, weighted_sentiment_series,
    write_scores, write_weighted_series, SentimentClassifier, SentimentResult, SentimentWeights, TrainConfig,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinConfig {
    pub coin: String,
    pub tweets: PathBuf,
    pub prices: PathBuf,
    /// Coin name is also an everyday word; apply the relevance filter.
    #[serde(default)]
    pub ambiguous: bool,
    /// Precomputed `tweet_id,label,score` rows used instead of the classifier.
    #[serde(default)]
    pub scores: Option<PathBuf>,
    /// External embedding matrix aligned with this coin's scored tweets.
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    #[serde(default)]
    pub sentiment_weights: SentimentWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub embedding_dim: usize,
    pub per_class: usize,
    pub top_n: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { embedding_dim: DEFAULT_EMBEDDING_DIM, per_class: DEFAULT_PER_CLASS, top_n: 50 }
    }
}

/// JSON configuration. Relative paths are resolved against the directory of
/// the config file. Component seeds are derived from `seed`; `seeds`
/// overrides individual ones by name (see [`SEED_NAMES`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub coins: Vec<CoinConfig>,
    /// Labelled `text,label` corpus for the sentiment classifier.
    pub corpus: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub seeds: BTreeMap<String, u64>,
    pub lookback: usize,
    pub train_fraction: f64,
    pub bucket_minutes: i64,
    pub include_metadata: bool,
    /// Give the regressors the joined bar's OHLCV columns too.
    pub regression_price_features: bool,
    pub sentiment: TrainConfig,
    pub sgd: SgdConfig,
    pub forest: ForestConfig,
    pub lstm: LstmConfig,
    pub analysis: AnalysisConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            coins: Vec::new(),
            corpus: None,
            lexicon: None,
            output_dir: PathBuf::from("out"),
            seed: 42,
            seeds: BTreeMap::new(),
            lookback: 16,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            bucket_minutes: 60,
            include_metadata: true,
            regression_price_features: false,
            sentiment: TrainConfig::default(),
            sgd: SgdConfig::default(),
            forest: ForestConfig::default(),
            lstm: LstmConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

pub const SEED_NAMES: [&str; 5] = ["sentiment", "train.sgd", "train.rf", "train.lstm", "analyze"];

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for c in &mut self.coins {
            fix(&mut c.tweets);
            fix(&mut c.prices);
            c.scores.as_mut().map(fix);
            c.embeddings.as_mut().map(fix);
        }
        self.corpus.as_mut().map(fix);
        self.lexicon.as_mut().map(fix);
        fix(&mut self.output_dir);
    }

    /// The seed a component actually uses.
    pub fn seed_for(&self, name: &str) -> u64 {
        self.seeds.get(name).copied().unwrap_or_else(|| stage_seed(self.seed, name))
    }

    /// Every violation, not just the first.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.coins.is_empty() {
            errs.push("no coins configured".into());
        }
        let mut seen = HashSet::new();
        let exists = |p: &Path, what: &str, errs: &mut Vec<String>| {
            if !p.exists() {
                errs.push(format!("{what} {} does not exist", p.display()));
            }
        };
        for c in &self.coins {
            if c.coin.is_empty() || c.coin.contains(['/', '\\']) {
                errs.push(format!("invalid coin name '{}'", c.coin));
            }
            if !seen.insert(c.coin.clone()) {
                errs.push(format!("coin '{}' listed twice", c.coin));
            }
            exists(&c.tweets, &format!("{} tweets file", c.coin), &mut errs);
            exists(&c.prices, &format!("{} prices file", c.coin), &mut errs);
            if let Some(p) = &c.scores {
                exists(p, &format!("{} scores file", c.coin), &mut errs);
            }
            if let Some(p) = &c.embeddings {
                exists(p, &format!("{} embeddings file", c.coin), &mut errs);
            }
            if c.scores.is_none() && self.corpus.is_none() {
                errs.push(format!("coin '{}' has no scores file and no corpus is configured", c.coin));
            }
        }
        if let Some(p) = &self.corpus {
            exists(p, "corpus", &mut errs);
        }
        if let Some(p) = &self.lexicon {
            exists(p, "lexicon", &mut errs);
        }
        for name in self.seeds.keys() {
            if !SEED_NAMES.contains(&name.as_str()) {
                errs.push(format!("unknown seed override '{name}' (known: {})", SEED_NAMES.join(", ")));
            }
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            errs.push(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction));
        }
        if self.lookback == 0 {
            errs.push("lookback must be at least 1".into());
        }
        if self.bucket_minutes < 1 {
            errs.push(format!("bucket_minutes must be at least 1, got {}", self.bucket_minutes));
        }
        if self.analysis.embedding_dim < 2 {
            errs.push("analysis.embedding_dim must be at least 2".into());
        }
        if self.analysis.per_class == 0 {
            errs.push("analysis.per_class must be at least 1".into());
        }
        if !(self.sentiment.holdout_fraction > 0.0 && self.sentiment.holdout_fraction < 1.0) {
            errs.push("sentiment.holdout_fraction must lie in (0, 1)".into());
        }
        errs.extend(self.sgd.validate());
        errs.extend(self.forest.validate());
        errs.extend(self.lstm.validate());
        errs
    }

    fn check(&self) -> Result<()> {
        let errs = self.validate();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    fn lexicon(&self) -> Result<CryptoLexicon> {
        match &self.lexicon {
            Some(p) => CryptoLexicon::load(p),
            None => Ok(CryptoLexicon::builtin()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Preprocess,
    Sentiment,
    Features,
    Train,
    Evaluate,
    Analyze,
}

impl Stage {
    /// Topological order.
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Preprocess,
        Stage::Sentiment,
        Stage::Features,
        Stage::Train,
        Stage::Evaluate,
        Stage::Analyze,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Preprocess => "preprocess",
            Stage::Sentiment => "sentiment",
            Stage::Features => "features",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Analyze => "analyze",
        }
    }

    pub fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Preprocess => &[Stage::Ingest],
            Stage::Sentiment => &[Stage::Preprocess],
            Stage::Features => &[Stage::Ingest, Stage::Sentiment],
            Stage::Train => &[Stage::Features],
            Stage::Evaluate => &[Stage::Features, Stage::Train],
            Stage::Analyze => &[Stage::Ingest, Stage::Preprocess, Stage::Sentiment],
        }
    }
}

/// Artifact paths for one coin.
#[derive(Debug, Clone)]
pub struct CoinDir {
    root: PathBuf,
}

impl CoinDir {
    pub fn new(output_dir: &Path, coin: &str) -> Self {
        CoinDir { root: output_dir.join(coin) }
    }

    pub fn stage(&self, s: Stage) -> PathBuf {
        self.root.join(s.name())
    }

    pub fn joined(&self) -> PathBuf {
        self.stage(Stage::Ingest).join("joined.jsonl")
    }
    pub fn bars(&self) -> PathBuf {
        self.stage(Stage::Ingest).join("bars.csv")
    }
    pub fn clean(&self) -> PathBuf {
        self.stage(Stage::Preprocess).join("clean.jsonl")
    }
    pub fn scores(&self) -> PathBuf {
        self.stage(Stage::Sentiment).join("scores.csv")
    }
    pub fn regression_rows(&self) -> PathBuf {
        self.stage(Stage::Features).join("regression_rows.json")
    }
    pub fn minute_rows(&self) -> PathBuf {
        self.stage(Stage::Features).join("minute_rows.json")
    }
    pub fn model(&self, kind: ModelKind) -> PathBuf {
        self.stage(Stage::Train).join(format!("{kind}.json"))
    }
    pub fn report(&self) -> PathBuf {
        self.stage(Stage::Evaluate)
    }
}

fn require(stage: Stage, prerequisite: Stage, path: PathBuf) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::MissingStage { stage: stage.name(), prerequisite: prerequisite.name(), missing: path })
    }
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut w = BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    for it in items {
        let line = serde_json::to_string(it).map_err(|e| Error::Data(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    std::io::BufReader::new(f)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(i, l)| {
            let l = l.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&l).map_err(|e| Error::Data(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IngestSummary {
    tweets: IngestReport,
    prices: IngestReport,
    join: JoinCounts,
}

pub fn run_ingest(cfg: &PipelineConfig, coin: &CoinConfig) -> Result<()> {
    let dir = CoinDir::new(&cfg.output_dir, &coin.coin);
    let (tweets, tweet_report) = parse_tweets(&coin.tweets)?;
    let (bars, price_report) = parse_price_bars(&coin.prices, &coin.coin)?;
    let (joined, counts) = join_tweets_prices(&tweets, &bars);
    log::info!("{}: {} tweets joined, {} without a bar", coin.coin, counts.joined, counts.dropped);
    write_joined_jsonl(dir.joined(), &joined)?;
    write_joined_csv(dir.stage(Stage::Ingest).join("joined.csv"), &joined)?;
    write_price_bars(dir.bars(), &bars)?;
    write_json(
        &dir.stage(Stage::Ingest).join("report.json"),
        &IngestSummary { tweets: tweet_report, prices: price_report, join: counts },
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PreprocessSummary {
    tweets: usize,
    relevant: usize,
    filtered_out: usize,
    filter: RelevanceMode,
}

/// Cleaned tweets that pass the relevance filter.
pub fn run_preprocess(cfg: &PipelineConfig, coin: &CoinConfig) -> Result<()> {
    let dir = CoinDir::new(&cfg.output_dir, &coin.coin);
    let joined = read_joined_jsonl(require(Stage::Preprocess, Stage::Ingest, dir.joined())?)?;
    let lexicon = cfg.lexicon()?;
    let mode = if coin.ambiguous { RelevanceMode::FilterOn } else { RelevanceMode::FilterOff };
    let cleaned: Vec<CleanTweet> = joined.par_iter().map(|j| clean_tweet(&j.tweet, &lexicon)).collect();
    let kept: Vec<CleanTweet> = cleaned.into_iter().filter(|c| crypto_relevance(c, &lexicon, mode)).collect();
    write_jsonl(&dir.clean(), &kept)?;
    write_json(
        &dir.stage(Stage::Preprocess).join("summary.json"),
        &PreprocessSummary { tweets: joined.len(), relevant: kept.len(), filtered_out: joined.len() - kept.len(), filter: mode },
    )
}

/// Trains the shared classifier once; every coin stage gets its own copy.
pub fn train_sentiment(cfg: &PipelineConfig) -> Result<Option<(SentimentClassifier, crate::sentiment::TrainReport)>> {
    if cfg.coins.iter().all(|c| c.scores.is_some()) {
        return Ok(None);
    }
    let path = cfg.corpus.as_ref().ok_or_else(|| Error::Config(vec!["no corpus configured".into()]))?;
    let corpus = read_corpus(path)?;
    let tc = TrainConfig { seed: cfg.seed_for("sentiment"), ..cfg.sentiment.clone() };
    let (model, report) = train_classifier(&corpus, &tc)?;
    log::info!("sentiment classifier held-out accuracy {:.3}", report.holdout_accuracy);
    Ok(Some((model, report)))
}

pub fn run_sentiment(
    cfg: &PipelineConfig,
    coin: &CoinConfig,
    classifier: Option<&(SentimentClassifier, crate::sentiment::TrainReport)>,
) -> Result<()> {
    let dir = CoinDir::new(&cfg.output_dir, &coin.coin);
    let clean: Vec<CleanTweet> = read_jsonl(&require(Stage::Sentiment, Stage::Preprocess, dir.clean())?)?;
    let joined = read_joined_jsonl(require(Stage::Sentiment, Stage::Ingest, dir.joined())?)?;
    let out = dir.stage(Stage::Sentiment);
    let results = match (&coin.scores, classifier) {
        (Some(path), _) => {
            let imported = import_scores(path)?;
            let ids: HashSet<u64> = clean.iter().map(|c| c.tweet_id).collect();
            let (mut kept, unmatched) = intersect_scores(&imported.results, &ids);
            kept.sort_by_key(|r| r.tweet_id);
            #[derive(Serialize)]
            struct ImportSummary {
                imported: usize,
                rejected: Vec<(usize, String)>,
                unmatched: usize,
            }
            write_json(
                &out.join("import_report.json"),
                &ImportSummary { imported: kept.len(), rejected: imported.rejected, unmatched },
            )?;
            kept
        }
        (None, Some((model, report))) => {
            model.save(out.join("classifier.json"))?;
            write_json(&out.join("train_report.json"), report)?;
            write_probabilities(&out.join("probabilities.csv"), model, &clean)?;
            clean.par_iter().map(|c| score_text(model, c.tweet_id, &c.clean_text)).collect()
        }
        (None, None) => return Err(Error::Config(vec![format!("coin '{}' needs a corpus or scores", coin.coin)])),
    };
    write_scores(dir.scores(), &results)?;
    let series = weighted_sentiment_series(
        &results,
        &joined,
        Duration::minutes(cfg.bucket_minutes),
        coin.sentiment_weights,
        true,
    )?;
    write_weighted_series(out.join("weighted_sentiment.csv"), &series)
}

/// Full class probabilities behind each confidence score.
fn write_probabilities(path: &Path, model: &SentimentClassifier, clean: &[CleanTweet]) -> Result<()> {
    let rows: Vec<[f64; 3]> = clean.par_iter().map(|c| model.probabilities(&c.clean_text)).collect();
    let mut w = BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let io = |e| Error::io(path, e);
    writeln!(w, "tweet_id,negative,neutral,positive").map_err(io)?;
    for (c, p) in clean.iter().zip(rows) {
        writeln!(w, "{},{},{},{}", c.tweet_id, p[0], p[1], p[2]).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn read_scores(path: &Path) -> Result<Vec<SentimentResult>> {
    let imported = import_scores(path)?;
    if let Some((line, msg)) = imported.rejected.first() {
        return Err(Error::Data(format!("{}:{line}: {msg}", path.display())));
    }
    Ok(imported.results)
}

fn scored_rows(dir: &CoinDir, stage: Stage) -> Result<(Vec<JoinedRow>, Vec<SentimentResult>)> {
    let scores = read_scores(&require(stage, Stage::Sentiment, dir.scores())?)?;
    let joined = read_joined_jsonl(require(stage, Stage::Ingest, dir.joined())?)?;
    let ids: HashSet<u64> = scores.iter().map(|s| s.tweet_id).collect();
    let joined = joined.into_iter().filter(|j| ids.contains(&j.tweet.id)).collect();
    Ok((joined, scores))
}

pub fn run_features(cfg: &PipelineConfig, coin: &CoinConfig) -> Result<()> {
    let dir = CoinDir::new(&cfg.output_dir, &coin.coin);
    let (joined, scores) = scored_rows(&dir, Stage::Features)?;
    let (bars, _) = parse_price_bars(require(Stage::Features, Stage::Ingest, dir.bars())?, &coin.coin)?;
    let regression = assemble_features(&joined, &scores, cfg.include_metadata, cfg.regression_price_features)?;
    let minutes = aggregate_minutes(&joined, &scores, &bars, cfg.include_metadata)?;
    let out = dir.stage(Stage::Features);
    write_json(&dir.regression_rows(), &regression)?;
    write_json(&dir.minute_rows(), &minutes)?;
    write_feature_matrix(&out.join("regression.csv"), &regression)?;
    write_feature_matrix(&out.join("minutes.csv"), &minutes)
}

/// A fitted regressor with the scalers it was trained through.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trained<M> {
    pub model: M,
    pub x_scaler: Scaler,
    pub y_scaler: Scaler,
    pub split: ChronoSplit,
    pub loss_curve: Vec<f64>,
    /// LSTM only.
    #[serde(default)]
    pub lookback: usize,
    /// LSTM only.
    #[serde(default)]
    pub delta_scaler: Option<Scaler>,
}

/// Scaled design matrices for the per-tweet regressors.
pub struct RegressionData {
    pub split: ChronoSplit,
    pub x_scaler: Scaler,
    pub y_scaler: Scaler,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub n_train: usize,
}

pub fn regression_data(rows: &[FeatureRow], fraction: f64) -> Result<RegressionData> {
    let (split, train, _) = chrono_split(rows, fraction)?;
    let raw: Vec<Vec<f64>> = rows.iter().map(FeatureRow::values).collect();
    let targets: Vec<f64> = rows.iter().map(|r| r.target_close).collect();
    let x_scaler = Scaler::fit(&raw[..train.len()], ScalerKind::Standard)?;
    let y_scaler = Scaler::fit_column(&targets[..train.len()], ScalerKind::MinMax)?;
    Ok(RegressionData {
        x: x_scaler.transform_rows(&raw),
        y: targets.iter().map(|v| y_scaler.transform_value(0, *v)).collect(),
        split,
        x_scaler,
        y_scaler,
        n_train: train.len(),
    })
}

/// Windows over the per-minute series for the LSTM.
pub struct SequenceData {
    pub split: ChronoSplit,
    pub x_scaler: Scaler,
    pub y_scaler: Scaler,
    /// Standardises the minute-to-minute change in close.
    pub delta_scaler: Scaler,
    pub train: Vec<SeriesWindow>,
    pub test: Vec<SeriesWindow>,
}

/// Inputs are the standardised minute features plus the min-max scaled
/// close of the same minute, so a window ending at `t - 1` sees the closes
/// up to `t - 1`. The target is the standardised change `close[t] -
/// close[t - 1]`; [`lstm_closes`] adds it back onto the last close.
pub fn sequence_data(rows: &[FeatureRow], fraction: f64, lookback: usize) -> Result<SequenceData> {
    let (split, train, _) = chrono_split(rows, fraction)?;
    let n_train = train.len();
    let raw: Vec<Vec<f64>> = rows.iter().map(FeatureRow::values).collect();
    let closes: Vec<f64> = rows.iter().map(|r| r.target_close).collect();
    let x_scaler = Scaler::fit(&raw[..n_train], ScalerKind::Standard)?;
    let y_scaler = Scaler::fit_column(&closes[..n_train], ScalerKind::MinMax)?;
    let deltas: Vec<f64> =
        std::iter::once(0.0).chain(closes.windows(2).map(|w| w[1] - w[0])).collect();
    let delta_scaler = Scaler::fit_column(&deltas[1..n_train.max(2)], ScalerKind::Standard)?;
    let y: Vec<f64> = closes.iter().map(|v| y_scaler.transform_value(0, *v)).collect();
    let targets: Vec<f64> = deltas.iter().map(|d| delta_scaler.transform_value(0, *d)).collect();
    let inputs = with_target_history(&x_scaler.transform_rows(&raw), &y);
    let times: Vec<_> = rows.iter().map(|r| r.timestamp).collect();
    let (train, test) = build_windows(&inputs, &targets, &times, lookback, &split)?;
    Ok(SequenceData { split, x_scaler, y_scaler, delta_scaler, train, test })
}

/// Close forecasts for `windows` over the minute series `rows`.
pub fn lstm_closes(model: &LstmModel, delta_scaler: &Scaler, rows: &[FeatureRow], windows: &[SeriesWindow]) -> Result<Vec<f64>> {
    let deltas = crate::models::lstm_predict(model, windows, delta_scaler)?;
    Ok(windows.iter().zip(deltas).map(|(w, d)| rows[w.target_index - 1].target_close + d).collect())
}

fn scaled_mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / y.len() as f64
}

pub fn run_train(cfg: &PipelineConfig, coin: &CoinConfig) -> Result<()> {
    let dir = CoinDir::new(&cfg.output_dir, &coin.coin);
    let rows: Vec<FeatureRow> = read_json(&require(Stage::Train, Stage::Features, dir.regression_rows())?)?;
    let minutes: Vec<FeatureRow> = read_json(&require(Stage::Train, Stage::Features, dir.minute_rows())?)?;
    let data = regression_data(&rows, cfg.train_fraction)?;
    let (xt, yt) = (&data.x[..data.n_train], &data.y[..data.n_train]);
    fn bundle<M>(data: &RegressionData, model: M, loss_curve: Vec<f64>) -> Trained<M> {
        Trained {
            model,
            x_scaler: data.x_scaler.clone(),
            y_scaler: data.y_scaler.clone(),
            split: data.split,
            loss_curve,
            lookback: 0,
            delta_scaler: None,
        }
    }

    let lr = fit_ols(xt, yt)?;
    let lr_loss = vec![scaled_mse(&lr.predict(xt), yt)];
    save_model(&dir.model(ModelKind::Lr), ModelKind::Lr, &bundle(&data, lr, lr_loss))?;

    let sgd_cfg = SgdConfig { seed: cfg.seed_for("train.sgd"), ..cfg.sgd.clone() };
    let (sgd, sgd_loss) = fit_sgd_huber(xt, yt, &sgd_cfg)?;
    save_model(&dir.model(ModelKind::Sgd), ModelKind::Sgd, &bundle(&data, sgd, sgd_loss))?;

    let rf_cfg = ForestConfig { seed: cfg.seed_for("train.rf"), ..cfg.forest.clone() };
    let rf = fit_random_forest(xt, yt, &rf_cfg)?;
    let rf_loss = vec![scaled_mse(&crate::models::forest_predict(&rf, xt), yt)];
    save_model(&dir.model(ModelKind::Rf), ModelKind::Rf, &bundle(&data, rf, rf_loss))?;

    let seq = sequence_data(&minutes, cfg.train_fraction, cfg.lookback)?;
    let lstm_cfg = LstmConfig { seed: cfg.seed_for("train.lstm"), ..cfg.lstm.clone() };
    let width = seq.train[0].width;
    let (lstm, lstm_loss) = lstm_train(&LstmModel::new(width, &lstm_cfg)?, &seq.train)?;
    log::info!("{}: LSTM final training loss {:.3e}", coin.coin, lstm_loss.last().copied().unwrap_or(f64::NAN));
    save_model(
        &dir.model(ModelKind::Lstm),
        ModelKind::Lstm,
        &Trained {
            model: lstm,
            x_scaler: seq.x_scaler,
            y_scaler: seq.y_scaler,
            split: seq.split,
            loss_curve: lstm_loss,
            lookback: cfg.lookback,
            delta_scaler: Some(seq.delta_scaler),
        },
    )
}

/// Metrics for every model plus the last-value baseline on the LSTM's test
/// minutes.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinEvaluation {
    pub metrics: Vec<ModelMetrics>,
    pub baseline: ModelMetrics,
}

fn series_points(times: &[chrono::DateTime<chrono::Utc>], actual: &[f64], pred: &[f64], n_train: usize) -> Vec<SeriesPoint> {
    (0..pred.len())
        .map(|i| SeriesPoint {
            timestamp: times[i],
            actual: actual[i],
            predicted: pred[i],
            partition: if i < n_train { Partition::Train } else { Partition::Test },
        })
        .collect()
}

fn load_trained<M: serde::de::DeserializeOwned>(dir: &CoinDir, kind: ModelKind) -> Result<Trained<M>> {
    load_model(&require(Stage::Evaluate, Stage::Train, dir.model(kind))?, kind)
}

pub fn run_evaluate(cfg: &PipelineConfig, coin: &CoinConfig) -> Result<CoinEvaluation> {
    let dir = CoinDir::new(&cfg.output_dir, &coin.coin);
    let lr: Trained<LinearModel> = load_trained(&dir, ModelKind::Lr)?;
    let sgd: Trained<LinearModel> = load_trained(&dir, ModelKind::Sgd)?;
    let rf: Trained<Forest> = load_trained(&dir, ModelKind::Rf)?;
    let lstm: Trained<LstmModel> = load_trained(&dir, ModelKind::Lstm)?;
    let rows: Vec<FeatureRow> = read_json(&require(Stage::Evaluate, Stage::Features, dir.regression_rows())?)?;
    let minutes: Vec<FeatureRow> = read_json(&require(Stage::Evaluate, Stage::Features, dir.minute_rows())?)?;

    let times: Vec<_> = rows.iter().map(|r| r.timestamp).collect();
    let actual: Vec<f64> = rows.iter().map(|r| r.target_close).collect();
    let n_train = rows.iter().take_while(|r| lr.split.is_train(r.timestamp)).count();
    let mut metrics = Vec::new();
    let mut outputs = Vec::new();
    let mut regression = |name: ModelKind, pred_scaled: Vec<f64>, y_scaler: &Scaler, loss: &[f64]| -> Result<()> {
        let pred: Vec<f64> = pred_scaled.iter().map(|v| y_scaler.inverse_value(0, *v)).collect();
        metrics.push(compute_metrics(name.as_str(), &coin.coin, &pred[n_train..], &actual[n_train..])?);
        outputs.push(ModelOutput {
            model: name.as_str().into(),
            coin: coin.coin.clone(),
            loss_curve: loss.to_vec(),
            series: series_points(&times, &actual, &pred, n_train),
        });
        Ok(())
    };
    let x_of = |t_scaler: &Scaler| -> Vec<Vec<f64>> { rows.iter().map(|r| t_scaler.transform(&r.values())).collect() };
    regression(ModelKind::Lr, lr.model.predict(&x_of(&lr.x_scaler)), &lr.y_scaler, &lr.loss_curve)?;
    regression(ModelKind::Sgd, sgd.model.predict(&x_of(&sgd.x_scaler)), &sgd.y_scaler, &sgd.loss_curve)?;
    regression(ModelKind::Rf, crate::models::forest_predict(&rf.model, &x_of(&rf.x_scaler)), &rf.y_scaler, &rf.loss_curve)?;

    let seq = sequence_data(&minutes, cfg.train_fraction, lstm.lookback)?;
    if seq.x_scaler != lstm.x_scaler || seq.y_scaler != lstm.y_scaler || Some(&seq.delta_scaler) != lstm.delta_scaler.as_ref() {
        return Err(Error::Data(format!("{}: features changed since the LSTM was trained; rerun train", coin.coin)));
    }
    let windows: Vec<SeriesWindow> = seq.train.iter().chain(&seq.test).cloned().collect();
    let pred = lstm_closes(&lstm.model, &seq.delta_scaler, &minutes, &windows)?;
    let idx: Vec<usize> = windows.iter().map(|w| w.target_index).collect();
    let m_times: Vec<_> = idx.iter().map(|&i| minutes[i].timestamp).collect();
    let m_actual: Vec<f64> = idx.iter().map(|&i| minutes[i].target_close).collect();
    let n_tr = seq.train.len();
    metrics.push(compute_metrics("lstm", &coin.coin, &pred[n_tr..], &m_actual[n_tr..])?);
    outputs.push(ModelOutput {
        model: "lstm".into(),
        coin: coin.coin.clone(),
        loss_curve: lstm.loss_curve.clone(),
        series: series_points(&m_times, &m_actual, &pred, n_tr),
    });
    let previous: Vec<f64> = idx[n_tr..].iter().map(|&i| minutes[i - 1].target_close).collect();
    let baseline = compute_metrics("naive", &coin.coin, &crate::evaluation::naive_last_value(&previous), &m_actual[n_tr..])?;

    generate_report(&dir.report(), &metrics, &outputs)?;
    write_metrics_csv(&dir.report().join("baseline.csv"), std::slice::from_ref(&baseline))?;
    Ok(CoinEvaluation { metrics, baseline })
}

#[derive(Debug, Clone, Serialize)]
struct AnalysisSummary {
    explained_variance: [f64; 2],
    total_variance: f64,
    sampled_per_class: [usize; 3],
    empty_rows: usize,
    average_token_count: f64,
    top_tokens: Vec<(String, u64)>,
}

pub fn run_analyze(cfg: &PipelineConfig, coin: &CoinConfig) -> Result<()> {
    let dir = CoinDir::new(&cfg.output_dir, &coin.coin);
    let clean: Vec<CleanTweet> = read_jsonl(&require(Stage::Analyze, Stage::Preprocess, dir.clean())?)?;
    let (joined, scores) = scored_rows(&dir, Stage::Analyze)?;
    let out = dir.stage(Stage::Analyze);

    let samples = sample_per_class(&scores, cfg.analysis.per_class, cfg.seed_for("analyze"));
    let labels: Vec<_> = samples
        .iter()
        .zip(crate::sentiment::SentimentLabel::ALL)
        .flat_map(|(ids, l)| std::iter::repeat_n(l, ids.len()))
        .collect();
    let order: Vec<u64> = samples.iter().flatten().copied().collect();
    let matrix = match &coin.embeddings {
        Some(path) => {
            let all = import_embeddings(path, &scores.iter().map(|s| s.label).collect::<Vec<_>>())?;
            let pos: BTreeMap<u64, usize> = scores.iter().enumerate().map(|(i, s)| (s.tweet_id, i)).collect();
            let rows = order
                .iter()
                .map(|id| {
                    let row = all.row(pos[id]);
                    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    row.iter().map(|v| if norm > 0.0 { v / norm } else { 0.0 }).collect()
                })
                .collect();
            crate::analysis::EmbeddingMatrix::from_rows(rows, labels.clone())?
        }
        None => {
            let text: BTreeMap<u64, &str> = clean.iter().map(|c| (c.tweet_id, c.clean_text.as_str())).collect();
            let texts: Vec<&str> = order.iter().map(|id| text.get(id).copied().unwrap_or("")).collect();
            embed_texts(&texts, &labels, cfg.analysis.embedding_dim)?
        }
    };
    let pca = pca_2d(&matrix)?;
    write_pca_points(&out.join("pca_points.csv"), &pca, &labels)?;

    let stats = corpus_stats(&coin.coin, &clean);
    write_freqs(&out.join("freqs.csv"), &stats)?;
    let tweets: Vec<_> = joined.iter().map(|j| j.tweet.clone()).collect();
    write_engagement(&out.join("engagement.csv"), &coin.coin, &engagement_by_verified(&tweets))?;
    write_label_distribution(&out.join("labels.csv"), &coin.coin, label_distribution(&scores))?;
    write_json(
        &out.join("summary.json"),
        &AnalysisSummary {
            explained_variance: pca.explained_variance,
            total_variance: pca.total_variance,
            sampled_per_class: [samples[0].len(), samples[1].len(), samples[2].len()],
            empty_rows: matrix.empty_rows.iter().filter(|e| **e).count(),
            average_token_count: stats.average_token_count,
            top_tokens: stats.top_n(cfg.analysis.top_n),
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Stage(Stage),
    All,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub stages: Vec<Stage>,
    pub evaluations: BTreeMap<String, CoinEvaluation>,
}

/// Runs one stage, or the whole graph, for the selected coins. Coins are
/// processed in parallel within a stage.
pub fn run(command: Command, cfg: &PipelineConfig, only_coin: Option<&str>) -> Result<RunSummary> {
    cfg.check()?;
    let coins: Vec<&CoinConfig> = match only_coin {
        Some(name) => vec![cfg
            .coins
            .iter()
            .find(|c| c.coin == name)
            .ok_or_else(|| Error::Config(vec![format!("coin '{name}' is not configured")]))?],
        None => cfg.coins.iter().collect(),
    };
    let stages: Vec<Stage> = match command {
        Command::Stage(s) => vec![s],
        Command::All => Stage::ALL.to_vec(),
    };
    let mut summary = RunSummary { stages: stages.clone(), ..Default::default() };
    for stage in stages {
        log::info!("stage {}", stage.name());
        let classifier = if stage == Stage::Sentiment { train_sentiment(cfg)? } else { None };
        let results: Vec<Result<Option<CoinEvaluation>>> = coins
            .par_iter()
            .map(|coin| {
                Ok(match stage {
                    Stage::Ingest => run_ingest(cfg, coin).map(|_| None)?,
                    Stage::Preprocess => run_preprocess(cfg, coin).map(|_| None)?,
                    Stage::Sentiment => run_sentiment(cfg, coin, classifier.as_ref()).map(|_| None)?,
                    Stage::Features => run_features(cfg, coin).map(|_| None)?,
                    Stage::Train => run_train(cfg, coin).map(|_| None)?,
                    Stage::Evaluate => Some(run_evaluate(cfg, coin)?),
                    Stage::Analyze => run_analyze(cfg, coin).map(|_| None)?,
                })
            })
            .collect();
        for (coin, r) in coins.iter().zip(results) {
            if let Some(ev) = r? {
                summary.evaluations.insert(coin.coin.clone(), ev);
            }
        }
        if stage == Stage::Evaluate {
            write_combined_metrics(cfg)?;
        }
    }
    Ok(summary)
}

/// `<output_dir>/metrics.csv` over every configured coin that has a report.
pub fn write_combined_metrics(cfg: &PipelineConfig) -> Result<PathBuf> {
    #[derive(Deserialize)]
    struct MetricsJson {
        metrics: Vec<ModelMetrics>,
    }
    let mut all = Vec::new();
    for c in &cfg.coins {
        let p = CoinDir::new(&cfg.output_dir, &c.coin).report().join("metrics.json");
        if p.exists() {
            all.extend(read_json::<MetricsJson>(&p)?.metrics);
        }
    }
    let path = cfg.output_dir.join("metrics.csv");
    write_metrics_csv(&path, &all)?;
    Ok(path)
}

/// Writes a fixture into `dir` along with a `config.json` that points at it.
pub fn generate_fixture(dir: &Path, fixture: &FixtureConfig, corpus_size: usize) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = write_fixture(dir, fixture, corpus_size)?;
    let rel = |p: &Path| PathBuf::from(p.file_name().expect("fixture file"));
    let cfg = PipelineConfig {
        coins: files
            .coins
            .iter()
            .map(|c| CoinConfig {
                coin: c.coin.clone(),
                tweets: rel(&c.tweets),
                prices: rel(&c.prices),
                ambiguous: c.ambiguous,
                scores: None,
                embeddings: None,
                sentiment_weights: SentimentWeights::default(),
            })
            .collect(),
        corpus: Some(rel(&files.corpus)),
        ..PipelineConfig::default()
    };
    let path = dir.join("config.json");
    write_json(&path, &cfg)?;
    Ok(path)
}

/// Loads the bars of an ingested coin (for examples and tests).
pub fn ingested_bars(cfg: &PipelineConfig, coin: &str) -> Result<Vec<PriceBar>> {
    let dir = CoinDir::new(&cfg.output_dir, coin);
    Ok(parse_price_bars(require(Stage::Features, Stage::Ingest, dir.bars())?, coin)?.0)
}
