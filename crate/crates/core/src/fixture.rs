//! Synthetic tweets and minute bars where crowd sentiment moves the price.
//!
//! Each coin follows a three-state sentiment regime (a sticky Markov chain).
//! Tweets posted in a minute mostly carry the regime's keywords, and the
//! close moves by `impact · P0 · regime` a fixed number of bars later, with
//! mean reversion towards `P0` and Gaussian noise. Ambiguous coins also get
//! off-topic tweets that only the relevance filter removes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::ingest::{target_minute, write_price_bars, write_tweets, PriceBar, TweetRecord};
use crate::seed::{rng, splitmix64};
use crate::hashing::fnv1a;
use crate::sentiment::{write_corpus, SentimentLabel};
use crate::Result;

pub const KEYWORDS_POSITIVE: [&str; 10] =
    ["moon", "gains", "love", "great", "rally", "amazing", "happy", "soaring", "winning", "breakout"];
pub const KEYWORDS_NEGATIVE: [&str; 10] =
    ["crash", "scam", "rekt", "fear", "panic", "terrible", "collapse", "sad", "worried", "losses"];
pub const KEYWORDS_NEUTRAL: [&str; 10] =
    ["update", "report", "announced", "today", "volume", "news", "listing", "weekly", "analysis", "scheduled"];
const FILLER: [&str; 24] = [
    "the", "a", "is", "this", "just", "for", "on", "and", "we", "it", "to", "of", "now", "with", "my", "all",
    "people", "time", "see", "what", "next", "here", "they", "again",
];
const OFF_TOPIC: [&str; 12] = [
    "hockey", "game", "goal", "snow", "mountain", "ski", "team", "season", "ice", "playoffs", "warning", "slope",
];

pub fn keywords(label: SentimentLabel) -> &'static [&'static str] {
    match label {
        SentimentLabel::Negative => &KEYWORDS_NEGATIVE,
        SentimentLabel::Neutral => &KEYWORDS_NEUTRAL,
        SentimentLabel::Positive => &KEYWORDS_POSITIVE,
    }
}

fn sign(label: SentimentLabel) -> f64 {
    match label {
        SentimentLabel::Negative => -1.0,
        SentimentLabel::Neutral => 0.0,
        SentimentLabel::Positive => 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinSpec {
    pub symbol: String,
    /// Word the ambiguous off-topic tweets share with the coin's name.
    pub name: String,
    pub p0: f64,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixtureConfig {
    pub coins: Vec<CoinSpec>,
    pub minutes: usize,
    pub min_tweets_per_minute: usize,
    pub max_tweets_per_minute: usize,
    /// Probability the regime stays the same from one minute to the next.
    pub persistence: f64,
    /// Probability a tweet's label is drawn uniformly instead of from the regime.
    pub label_noise: f64,
    /// Fraction of an ambiguous coin's tweets that are off-topic.
    pub off_topic_fraction: f64,
    /// Bars between a tweet's bar and the price move it causes.
    pub lag: usize,
    pub impact: f64,
    pub mean_reversion: f64,
    pub volatility: f64,
    pub start: DateTime<Utc>,
    pub seed: u64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        FixtureConfig {
            coins: vec![
                CoinSpec { symbol: "DOGE".into(), name: "dogecoin".into(), p0: 0.12, ambiguous: false },
                CoinSpec { symbol: "AVAX".into(), name: "avalanche".into(), p0: 80.0, ambiguous: true },
            ],
            minutes: 1200,
            min_tweets_per_minute: 2,
            max_tweets_per_minute: 5,
            persistence: 0.85,
            label_noise: 0.15,
            off_topic_fraction: 0.2,
            lag: 3,
            impact: 0.004,
            mean_reversion: 0.05,
            volatility: 0.001,
            start: Utc.with_ymd_and_hms(2022, 3, 1, 0, 0, 0).unwrap(),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoinFixture {
    pub coin: String,
    pub tweets: Vec<TweetRecord>,
    pub bars: Vec<PriceBar>,
    /// Regime of the tweets posted in each minute.
    pub regimes: Vec<SentimentLabel>,
    /// Ids of off-topic tweets (empty for unambiguous coins).
    pub off_topic_ids: Vec<u64>,
}

struct User {
    id: u64,
    name: String,
    verified: bool,
    followers: u64,
    friends: u64,
    favourites: u64,
}

fn users(r: &mut ChaCha8Rng, n: usize) -> Vec<User> {
    let followers = LogNormal::new(6.0, 1.5).unwrap();
    (0..n)
        .map(|i| {
            let verified = r.random_bool(0.08);
            let f = followers.sample(r) * if verified { 20.0 } else { 1.0 };
            User {
                id: 10_000 + i as u64,
                name: format!("user{i:04}"),
                verified,
                followers: f as u64,
                friends: r.random_range(10..2000),
                favourites: r.random_range(0..50_000),
            }
        })
        .collect()
}

fn next_regime(r: &mut ChaCha8Rng, cur: SentimentLabel, persistence: f64) -> SentimentLabel {
    if r.random_bool(persistence) {
        cur
    } else {
        let others: Vec<SentimentLabel> = SentimentLabel::ALL.into_iter().filter(|l| *l != cur).collect();
        *others.choose(r).unwrap()
    }
}

fn sentiment_words(r: &mut ChaCha8Rng, label: SentimentLabel, words: &mut Vec<String>) {
    let kw = keywords(label);
    for _ in 0..r.random_range(2..=3) {
        words.push(kw.choose(r).unwrap().to_string());
    }
    for _ in 0..r.random_range(1..=4) {
        words.push(FILLER.choose(r).unwrap().to_string());
    }
}

fn tweet_text(r: &mut ChaCha8Rng, coin: &CoinSpec, label: SentimentLabel, off_topic: bool) -> String {
    let mut words = Vec::new();
    sentiment_words(r, label, &mut words);
    if off_topic {
        for _ in 0..r.random_range(2..=3) {
            words.push(OFF_TOPIC.choose(r).unwrap().to_string());
        }
        words.push(coin.name.clone());
        words.shuffle(r);
        return finish(r, words, label, false);
    }
    let mention = match r.random_range(0..4) {
        0 => format!("#{}", coin.symbol),
        1 => format!("${}", coin.symbol),
        2 => coin.symbol.to_lowercase(),
        _ => format!("{} crypto", coin.name),
    };
    words.push(mention);
    words.shuffle(r);
    finish(r, words, label, true)
}

fn finish(r: &mut ChaCha8Rng, mut words: Vec<String>, label: SentimentLabel, decorate: bool) -> String {
    if decorate && r.random_bool(0.3) {
        let handle = format!("@trader{}", r.random_range(1..500));
        words.insert(0, handle);
    }
    if r.random_bool(0.25) {
        words.push(match label {
            SentimentLabel::Positive => "🚀".into(),
            SentimentLabel::Negative => ":(".into(),
            SentimentLabel::Neutral => "📈".into(),
        });
    }
    if decorate && r.random_bool(0.2) {
        words.push(format!("https://t.co/{:x}", r.random::<u32>()));
    }
    if r.random_bool(0.1) {
        words.insert(0, "RT".into());
    }
    let mut s = words.join(" ");
    if r.random_bool(0.5) {
        s.push('!');
    }
    s
}

fn label_for(r: &mut ChaCha8Rng, regime: SentimentLabel, noise: f64) -> SentimentLabel {
    if r.random_bool(noise) {
        *SentimentLabel::ALL.choose(r).unwrap()
    } else {
        regime
    }
}

pub fn generate_coin(cfg: &FixtureConfig, coin: &CoinSpec, coin_seed: u64, first_id: u64) -> CoinFixture {
    let mut r = rng(coin_seed);
    let pool = users(&mut r, 300);
    let n_min = cfg.minutes;
    let mut regimes = Vec::with_capacity(n_min);
    let mut cur = SentimentLabel::Neutral;
    for _ in 0..n_min {
        cur = next_regime(&mut r, cur, cfg.persistence);
        regimes.push(cur);
    }

    let mut tweets = Vec::new();
    let mut off_topic_ids = Vec::new();
    let mut id = first_id;
    let poisson_rt = Poisson::new(3.0).unwrap();
    // tweets posted in minute m join the bar of minute m + 1; the last minute gets none
    for (m, regime) in regimes.iter().enumerate().take(n_min - 1) {
        let n = r.random_range(cfg.min_tweets_per_minute..=cfg.max_tweets_per_minute);
        let mut secs: Vec<i64> = (0..n).map(|_| r.random_range(0..60)).collect();
        secs.sort_unstable();
        for s in secs {
            let off = coin.ambiguous && r.random_bool(cfg.off_topic_fraction);
            let label = if off { *SentimentLabel::ALL.choose(&mut r).unwrap() } else { label_for(&mut r, *regime, cfg.label_noise) };
            let u = pool.choose(&mut r).unwrap();
            let boost = if u.verified { 8.0 } else { 1.0 };
            let rt = (poisson_rt.sample(&mut r) * boost) as u64;
            let fav = (poisson_rt.sample(&mut r) * 2.5 * boost) as u64;
            let text = tweet_text(&mut r, coin, label, off);
            let created = cfg.start + Duration::minutes(m as i64) + Duration::seconds(s);
            let mut extra = BTreeMap::new();
            extra.insert("lang".to_string(), serde_json::Value::from("en"));
            tweets.push(TweetRecord {
                id,
                text,
                favourite_count: fav,
                retweet_count: rt,
                created_at: created,
                user_id: u.id,
                user_followers_count: u.followers,
                user_friends_count: u.friends,
                user_favourites_count: u.favourites,
                user_verified: u.verified,
                user_screen_name: u.name.clone(),
                place: None,
                user_extra: extra,
            });
            if off {
                off_topic_ids.push(id);
            }
            id += 1;
        }
    }

    let noise = Normal::new(0.0, 1.0).unwrap();
    let p0 = coin.p0;
    let mut bars = Vec::with_capacity(n_min);
    let mut prev = p0;
    for j in 0..n_min {
        // bar j carries tweets of minute j - 1; the move at j reacts to bar j - lag
        let driver = j
            .checked_sub(cfg.lag + 1)
            .map_or(0.0, |k| sign(regimes[k]));
        let close = (prev + cfg.impact * p0 * driver - cfg.mean_reversion * (prev - p0)
            + cfg.volatility * p0 * noise.sample(&mut r))
        .max(p0 * 0.05);
        let open = prev;
        let wiggle = |r: &mut ChaCha8Rng| cfg.volatility * p0 * noise.sample(r).abs() * 0.5;
        let high = open.max(close) + wiggle(&mut r);
        let low = (open.min(close) - wiggle(&mut r)).max(p0 * 0.01);
        let vol = LogNormal::new(8.0, 0.4).unwrap().sample(&mut r) * (1.0 + driver.abs());
        bars.push(PriceBar {
            time: cfg.start + Duration::minutes(j as i64),
            high,
            low,
            open,
            close,
            volume_from: vol,
            volume_to: vol * close,
            coin: coin.symbol.clone(),
        });
        prev = close;
    }
    debug_assert!(tweets.iter().all(|t| target_minute(t.created_at) <= bars.last().unwrap().time));
    CoinFixture { coin: coin.symbol.clone(), tweets, bars, regimes, off_topic_ids }
}

pub fn generate(cfg: &FixtureConfig) -> Vec<CoinFixture> {
    cfg.coins
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let seed = splitmix64(cfg.seed ^ fnv1a(c.symbol.as_bytes()));
            generate_coin(cfg, c, seed, 1_000_000 * (k as u64 + 1))
        })
        .collect()
}

/// Balanced labelled texts in cleaned form: sentiment keywords plus filler.
pub fn sentiment_corpus(n: usize, seed: u64) -> Vec<(String, SentimentLabel)> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let label = SentimentLabel::from_index(i % 3);
            let mut words = Vec::new();
            sentiment_words(&mut r, label, &mut words);
            if r.random_bool(0.3) {
                words.push(["doge", "avax", "crypto", "price"].choose(&mut r).unwrap().to_string());
            }
            words.shuffle(&mut r);
            (words.join(" "), label)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinFiles {
    pub coin: String,
    pub tweets: PathBuf,
    pub prices: PathBuf,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureFiles {
    pub coins: Vec<CoinFiles>,
    pub corpus: PathBuf,
}

/// Writes `tweets_<coin>.jsonl`, `prices_<coin>.csv` and `sentiment_corpus.csv`.
pub fn write_fixture(dir: &Path, cfg: &FixtureConfig, corpus_size: usize) -> Result<FixtureFiles> {
    let mut coins = Vec::new();
    for (spec, fx) in cfg.coins.iter().zip(generate(cfg)) {
        let lower = fx.coin.to_lowercase();
        let tweets = dir.join(format!("tweets_{lower}.jsonl"));
        let prices = dir.join(format!("prices_{lower}.csv"));
        write_tweets(&tweets, &fx.tweets)?;
        write_price_bars(&prices, &fx.bars)?;
        coins.push(CoinFiles { coin: fx.coin, tweets, prices, ambiguous: spec.ambiguous });
    }
    let corpus = dir.join("sentiment_corpus.csv");
    write_corpus(&corpus, &sentiment_corpus(corpus_size, splitmix64(cfg.seed ^ 0xc0)))?;
    Ok(FixtureFiles { coins, corpus })
}
