//! Hourly weighted sentiment, rescaled onto the price range for co-plotting.

use chrono::Duration;
use cryptotrend::fixture::{generate, FixtureConfig};
use cryptotrend::ingest::join_tweets_prices;
use cryptotrend::sentiment::{SentimentResult, SentimentWeights, weighted_sentiment_series};

fn main() -> cryptotrend::Result<()> {
    let fx = generate(&FixtureConfig { minutes: 600, ..FixtureConfig::default() }).remove(0);
    let (joined, _) = join_tweets_prices(&fx.tweets, &fx.bars);
    // ground-truth regimes stand in for classifier output here
    let results: Vec<SentimentResult> = joined
        .iter()
        .map(|j| {
            let minute = ((j.tweet.created_at - fx.bars[0].time).num_minutes()) as usize;
            SentimentResult { tweet_id: j.tweet.id, label: fx.regimes[minute.min(fx.regimes.len() - 1)], score: 1.0 }
        })
        .collect();
    let series = weighted_sentiment_series(&results, &joined, Duration::minutes(60), SentimentWeights::default(), true)?;
    for p in &series {
        println!("{}  sentiment {:.5}  price {:.5}  n={}", p.bucket_start, p.weighted_score, p.mean_price, p.tweet_count);
    }
    Ok(())
}
