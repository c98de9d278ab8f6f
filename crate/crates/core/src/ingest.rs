//! Tweet and minute-bar ingestion, plus the tweet → next-minute price join.
//!
//! Tweets arrive as JSONL with the Twitter v1.1 shape (a nested `user`
//! object); prices arrive as CryptoCompare `histominute` CSV with header
//! `time,high,low,open,volumefrom,volumeto,close`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::{Error, Result};

/// One raw tweet with its engagement counts and the four-plus user fields
/// used downstream. Any other user keys survive in `user_extra`.
#[derive(Debug, Clone, PartialEq)]
pub struct TweetRecord {
    pub id: u64,
    pub text: String,
    pub favourite_count: u64,
    pub retweet_count: u64,
    pub created_at: DateTime<Utc>,
    pub user_id: u64,
    pub user_followers_count: u64,
    pub user_friends_count: u64,
    pub user_favourites_count: u64,
    pub user_verified: bool,
    pub user_screen_name: String,
    pub place: Option<String>,
    pub user_extra: BTreeMap<String, Value>,
}

/// One minute of OHLCV data for a coin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceBar {
    pub time: DateTime<Utc>,
    pub high: f64,
    pub low: f64,
    pub open: f64,
    pub close: f64,
    pub volume_from: f64,
    pub volume_to: f64,
    pub coin: String,
}

/// A tweet paired with the bar of the minute after it was posted.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedRow {
    pub tweet: TweetRecord,
    pub bar: PriceBar,
    pub target_close: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub parsed: usize,
    /// Malformed or invariant-violating lines.
    pub skipped: usize,
    /// Repeated tweet ids / repeated bar minutes. The first occurrence wins.
    pub duplicates: usize,
    /// 1-based line numbers of skipped input lines.
    pub skipped_lines: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinCounts {
    pub joined: usize,
    pub dropped: usize,
}

const USER_KNOWN: &[&str] = &[
    "id",
    "followers_count",
    "friends_count",
    "favourites_count",
    "favorites_count",
    "verified",
    "screen_name",
];

fn floor_minute(ts: DateTime<Utc>) -> DateTime<Utc> {
    let secs = ts.timestamp().div_euclid(60) * 60;
    Utc.timestamp_opt(secs, 0).unwrap()
}

/// The bar a tweet posted at `hh:mm:ss` is joined to: `hh:(mm+1):00`,
/// including when `ss == 00`.
pub fn target_minute(created_at: DateTime<Utc>) -> DateTime<Utc> {
    floor_minute(created_at) + chrono::Duration::seconds(60)
}

pub fn format_timestamp(ts: DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Parses the timestamp shapes seen in scraped data: RFC 3339, naive ISO
/// (treated as UTC), Twitter's `Tue Mar 01 12:05:37 +0000 2022`, and UNIX
/// seconds. Sub-second precision is dropped.
pub fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    let ts = if let Ok(secs) = raw.parse::<i64>() {
        Utc.timestamp_opt(secs, 0).single()?
    } else if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        dt.with_timezone(&Utc)
    } else if let Ok(dt) = DateTime::parse_from_str(raw, "%a %b %d %H:%M:%S %z %Y") {
        dt.with_timezone(&Utc)
    } else {
        let naive = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())?;
        Utc.from_utc_datetime(&naive)
    };
    Utc.timestamp_opt(ts.timestamp(), 0).single()
}

fn as_count(v: Option<&Value>, name: &str) -> std::result::Result<u64, String> {
    match v {
        None | Some(Value::Null) => Ok(0),
        Some(v) => v
            .as_u64()
            .or_else(|| v.as_str().and_then(|s| s.parse().ok()))
            .ok_or_else(|| format!("field '{name}' is not a non-negative integer: {v}")),
    }
}

fn first<'a>(obj: &'a Map<String, Value>, keys: &[&str]) -> Option<&'a Value> {
    keys.iter().find_map(|k| obj.get(*k))
}

impl TweetRecord {
    /// Builds a record from one decoded JSON object, flattening the nested
    /// `user` object.
    pub fn from_json(value: &Value) -> std::result::Result<Self, String> {
        let obj = value.as_object().ok_or("line is not a JSON object")?;
        let id = match obj.get("id").or_else(|| obj.get("id_str")) {
            Some(v) => v
                .as_u64()
                .or_else(|| v.as_str().and_then(|s| s.parse().ok()))
                .ok_or("field 'id' is not an unsigned integer")?,
            None => return Err("missing field 'id'".into()),
        };
        let text = first(obj, &["text", "full_text"])
            .and_then(Value::as_str)
            .ok_or("missing field 'text'")?
            .to_string();
        let created_raw = obj.get("created_at").ok_or("missing field 'created_at'")?;
        let created_at = match created_raw {
            Value::String(s) => parse_timestamp(s),
            Value::Number(n) => n.as_i64().and_then(|s| Utc.timestamp_opt(s, 0).single()),
            _ => None,
        }
        .ok_or_else(|| format!("unparseable created_at: {created_raw}"))?;
        let favourite_count =
            as_count(first(obj, &["favorite_count", "favourite_count"]), "favourite_count")?;
        let retweet_count = as_count(obj.get("retweet_count"), "retweet_count")?;
        let place = match obj.get("place") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(Value::Object(p)) => first(p, &["full_name", "name"])
                .and_then(Value::as_str)
                .map(str::to_string),
            Some(other) => return Err(format!("unsupported place value: {other}")),
        };

        let empty = Map::new();
        let user = match obj.get("user") {
            None | Some(Value::Null) => &empty,
            Some(Value::Object(u)) => u,
            Some(_) => return Err("field 'user' is not an object".into()),
        };
        let user_verified = match user.get("verified") {
            None | Some(Value::Null) => false,
            Some(Value::Bool(b)) => *b,
            Some(other) => return Err(format!("user.verified is not a boolean: {other}")),
        };
        let user_extra = user
            .iter()
            .filter(|(k, _)| !USER_KNOWN.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();

        Ok(TweetRecord {
            id,
            text,
            favourite_count,
            retweet_count,
            created_at,
            user_id: as_count(user.get("id"), "user.id")?,
            user_followers_count: as_count(user.get("followers_count"), "user.followers_count")?,
            user_friends_count: as_count(user.get("friends_count"), "user.friends_count")?,
            user_favourites_count: as_count(
                first(user, &["favourites_count", "favorites_count"]),
                "user.favourites_count",
            )?,
            user_verified,
            user_screen_name: user
                .get("screen_name")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string(),
            place,
            user_extra,
        })
    }

    /// Inverse of [`TweetRecord::from_json`], in the same nested shape.
    pub fn to_json(&self) -> Value {
        let mut user: Map<String, Value> = self
            .user_extra
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        user.insert("id".into(), json!(self.user_id));
        user.insert("followers_count".into(), json!(self.user_followers_count));
        user.insert("friends_count".into(), json!(self.user_friends_count));
        user.insert("favourites_count".into(), json!(self.user_favourites_count));
        user.insert("verified".into(), json!(self.user_verified));
        user.insert("screen_name".into(), json!(self.user_screen_name));
        json!({
            "id": self.id,
            "text": self.text,
            "favourite_count": self.favourite_count,
            "retweet_count": self.retweet_count,
            "created_at": format_timestamp(self.created_at),
            "user": Value::Object(user),
            "place": self.place,
        })
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn parse_tweets(path: impl AsRef<Path>) -> Result<(Vec<TweetRecord>, IngestReport)> {
    let path = path.as_ref();
    parse_tweets_from(BufReader::new(open(path)?)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        e => e,
    })
}

pub fn parse_tweets_from(reader: impl BufRead) -> Result<(Vec<TweetRecord>, IngestReport)> {
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    let mut tweets = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<tweets>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<Value>(&line)
            .map_err(|e| e.to_string())
            .and_then(|v| TweetRecord::from_json(&v));
        match parsed {
            Ok(tweet) => {
                if seen.insert(tweet.id) {
                    report.parsed += 1;
                    tweets.push(tweet);
                } else {
                    report.duplicates += 1;
                }
            }
            Err(msg) => {
                log::debug!("tweets line {}: {msg}", idx + 1);
                report.skipped += 1;
                report.skipped_lines.push(idx + 1);
            }
        }
    }
    Ok((tweets, report))
}

pub fn write_tweets(path: impl AsRef<Path>, tweets: &[TweetRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for t in tweets {
        writeln!(w, "{}", t.to_json()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

const PRICE_COLUMNS: [&str; 7] = ["time", "high", "low", "open", "volumefrom", "volumeto", "close"];

impl PriceBar {
    /// OHLC ordering, positive prices and non-negative volumes.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err("prices must be finite and positive".into());
        }
        if !(self.volume_from >= 0.0 && self.volume_to >= 0.0) {
            return Err("volumes must be non-negative".into());
        }
        if self.low > self.high {
            return Err(format!("low {} > high {}", self.low, self.high));
        }
        for (name, p) in [("open", self.open), ("close", self.close)] {
            if p < self.low || p > self.high {
                return Err(format!("{name} {p} outside [low {}, high {}]", self.low, self.high));
            }
        }
        Ok(())
    }
}

pub fn parse_price_bars(path: impl AsRef<Path>, coin: &str) -> Result<(Vec<PriceBar>, IngestReport)> {
    let path = path.as_ref();
    parse_price_bars_from(open(path)?, coin).map_err(|e| match e {
        Error::MissingColumn { column, .. } => Error::MissingColumn {
            path: path.to_path_buf(),
            column,
        },
        Error::Io { source, .. } => Error::io(path, source),
        e => e,
    })
}

pub fn parse_price_bars_from(reader: impl Read, coin: &str) -> Result<(Vec<PriceBar>, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Data(format!("price csv header: {e}")))?
        .clone();
    let mut idx = [0usize; 7];
    for (slot, name) in idx.iter_mut().zip(PRICE_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn {
                path: "<prices>".into(),
                column: name.to_string(),
            })?;
    }

    let mut report = IngestReport::default();
    let mut bars: Vec<(PriceBar, usize)> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // header is line 1
        let line_no = i + 2;
        let bar = record.map_err(|e| e.to_string()).and_then(|rec| {
            let field = |k: usize| rec.get(idx[k]).ok_or_else(|| format!("missing {}", PRICE_COLUMNS[k]));
            let num = |k: usize| {
                field(k)?
                    .parse::<f64>()
                    .map_err(|e| format!("{}: {e}", PRICE_COLUMNS[k]))
            };
            let raw_time = field(0)?;
            let time = parse_timestamp(raw_time)
                .or_else(|| raw_time.parse::<f64>().ok().and_then(|s| Utc.timestamp_opt(s as i64, 0).single()))
                .ok_or_else(|| format!("unparseable time '{raw_time}'"))?;
            let bar = PriceBar {
                time: floor_minute(time),
                high: num(1)?,
                low: num(2)?,
                open: num(3)?,
                volume_from: num(4)?,
                volume_to: num(5)?,
                close: num(6)?,
                coin: coin.to_string(),
            };
            bar.validate()?;
            Ok(bar)
        });
        match bar {
            Ok(bar) => bars.push((bar, line_no)),
            Err(msg) => {
                log::debug!("prices line {line_no}: {msg}");
                report.skipped += 1;
                report.skipped_lines.push(line_no);
            }
        }
    }
    // stable: the first row for a repeated minute wins
    bars.sort_by_key(|(b, line)| (b.time, *line));
    let mut out: Vec<PriceBar> = Vec::with_capacity(bars.len());
    for (bar, _) in bars {
        if out.last().is_some_and(|prev| prev.time == bar.time) {
            report.duplicates += 1;
        } else {
            out.push(bar);
        }
    }
    report.parsed = out.len();
    Ok((out, report))
}

/// Writes bars in CryptoCompare column order with UNIX-second times.
pub fn write_price_bars(path: impl AsRef<Path>, bars: &[PriceBar]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", PRICE_COLUMNS.join(",")).map_err(io)?;
    for b in bars {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            b.time.timestamp(),
            b.high,
            b.low,
            b.open,
            b.volume_from,
            b.volume_to,
            b.close
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Joins each tweet to the bar at [`target_minute`]. Tweets with no bar for
/// that minute are dropped and counted. Output is ordered by
/// `(created_at, id)`, so the result does not depend on input order.
pub fn join_tweets_prices(tweets: &[TweetRecord], bars: &[PriceBar]) -> (Vec<JoinedRow>, JoinCounts) {
    let by_minute: HashMap<i64, &PriceBar> = bars.iter().map(|b| (b.time.timestamp(), b)).collect();
    let mut counts = JoinCounts::default();
    let mut joined: Vec<JoinedRow> = tweets
        .iter()
        .filter_map(|t| match by_minute.get(&target_minute(t.created_at).timestamp()) {
            Some(bar) => {
                counts.joined += 1;
                Some(JoinedRow {
                    tweet: t.clone(),
                    bar: (*bar).clone(),
                    target_close: bar.close,
                })
            }
            None => {
                counts.dropped += 1;
                None
            }
        })
        .collect();
    joined.sort_by_key(|r| (r.tweet.created_at, r.tweet.id));
    (joined, counts)
}

pub fn write_joined_jsonl(path: impl AsRef<Path>, rows: &[JoinedRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for r in rows {
        let line = json!({ "tweet": r.tweet.to_json(), "bar": r.bar });
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_joined_jsonl(path: impl AsRef<Path>) -> Result<Vec<JoinedRow>> {
    let path = path.as_ref();
    let reader = BufReader::new(open(path)?);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let bad = |msg: String| Error::Data(format!("{}:{}: {msg}", path.display(), i + 1));
        let v: Value = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let tweet = TweetRecord::from_json(&v["tweet"]).map_err(bad)?;
        let bar: PriceBar = serde_json::from_value(v["bar"].clone()).map_err(|e| bad(e.to_string()))?;
        rows.push(JoinedRow {
            target_close: bar.close,
            tweet,
            bar,
        });
    }
    Ok(rows)
}

/// Flat, human-readable view of the join for inspection.
pub fn write_joined_csv(path: impl AsRef<Path>, rows: &[JoinedRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(
        w,
        "tweet_id,created_at,favourite_count,retweet_count,user_followers_count,user_verified,bar_time,high,low,open,volumefrom,volumeto,close"
    )
    .map_err(io)?;
    for r in rows {
        let t = &r.tweet;
        let b = &r.bar;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.id,
            format_timestamp(t.created_at),
            t.favourite_count,
            t.retweet_count,
            t.user_followers_count,
            t.user_verified as u8,
            format_timestamp(b.time),
            b.high,
            b.low,
            b.open,
            b.volume_from,
            b.volume_to,
            b.close
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
