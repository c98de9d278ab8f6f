//! Per-tweet feature rows, per-minute aggregates and LSTM windows.

use cryptotrend::evaluation::chrono_split;
use cryptotrend::fixture::{generate, FixtureConfig};
use cryptotrend::features::{aggregate_minutes, assemble_features};
use cryptotrend::ingest::join_tweets_prices;
use cryptotrend::pipeline::sequence_data;
use cryptotrend::sentiment::SentimentResult;

fn main() -> cryptotrend::Result<()> {
    let fx = generate(&FixtureConfig { minutes: 300, ..FixtureConfig::default() }).remove(0);
    let (joined, _) = join_tweets_prices(&fx.tweets, &fx.bars);
    let results: Vec<SentimentResult> = joined
        .iter()
        .enumerate()
        .map(|(i, j)| SentimentResult { tweet_id: j.tweet.id, label: fx.regimes[i % fx.regimes.len()], score: 0.9 })
        .collect();

    let rows = assemble_features(&joined, &results, true, false)?;
    println!("{} tweet rows, columns {:?}", rows.len(), rows[0].column_names());
    let (split, train, test) = chrono_split(&rows, 0.7)?;
    println!("split at {}: {} train / {} test", split.split_timestamp, train.len(), test.len());

    let minutes = aggregate_minutes(&joined, &results, &fx.bars, true)?;
    let seq = sequence_data(&minutes, 0.7, 16)?;
    println!("{} minute rows -> {} train / {} test windows", minutes.len(), seq.train.len(), seq.test.len());
    Ok(())
}
