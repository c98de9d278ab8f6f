//! Minute-level cryptocurrency price prediction from tweet sentiment and
//! user metadata.
//!
//! The crate is organised as a pipeline:
//!
//! 1. [`ingest`] parses tweet JSONL and CryptoCompare-style minute bars and
//!    joins every tweet to the bar of the following minute.
//! 2. [`preprocess`] cleans tweet text (mentions, URLs, hashtags, emoticons,
//!    case, punctuation) and flags crypto-relevant tweets.
//! 3. [`sentiment`] labels tweets as negative / neutral / positive with a
//!    confidence score, either with a hashed bag-of-words classifier or from
//!    externally computed scores.
//! 4. [`features`] builds per-tweet feature rows, per-minute aggregates and
//!    LSTM lookback windows, and owns the scalers.
//! 5. [`models`] holds the four predictors: OLS, Huber SGD, random forest
//!    and an LSTM trained with backpropagation through time.
//! 6. [`evaluation`] does the chronological split, MAE / RMSE / max
//!    percentage error, and report writing.
//! 7. [`analysis`] produces PCA projections, word frequencies, engagement
//!    totals and other plot-ready tables.
//!
//! [`pipeline`] wires the stages together behind a JSON config, and
//! [`fixture`] generates synthetic data with a known sentiment-to-price lag.

pub mod analysis;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod files;
pub mod fixture;
pub mod hashing;
pub mod ingest;
pub mod linalg;
pub mod models;
pub mod pipeline;
pub mod preprocess;
pub mod seed;
pub mod sentiment;

pub use error::{Error, Result};
