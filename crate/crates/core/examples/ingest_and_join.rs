//! Parse a tweet file and a minute-bar file, then join each tweet to the
//! bar of the following minute.

use cryptotrend::fixture::{write_fixture, FixtureConfig};
use cryptotrend::ingest::{join_tweets_prices, parse_price_bars, parse_tweets};

fn main() -> cryptotrend::Result<()> {
    let dir = tempfile::tempdir().expect("tempdir");
    let files = write_fixture(dir.path(), &FixtureConfig { minutes: 120, ..FixtureConfig::default() }, 10)?;
    let coin = &files.coins[0];

    let (tweets, report) = parse_tweets(&coin.tweets)?;
    let (bars, _) = parse_price_bars(&coin.prices, &coin.coin)?;
    println!("parsed {} tweets ({} skipped), {} bars", report.parsed, report.skipped, bars.len());

    let (joined, counts) = join_tweets_prices(&tweets, &bars);
    println!("joined {}, dropped {}", counts.joined, counts.dropped);
    for row in joined.iter().take(3) {
        println!("{} -> bar {} close {:.5}", row.tweet.created_at, row.bar.time, row.target_close);
    }
    Ok(())
}
