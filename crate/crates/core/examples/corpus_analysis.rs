//! Word frequencies, engagement by verification and label counts.

use cryptotrend::analysis::{corpus_stats, engagement_by_verified};
use cryptotrend::fixture::{generate, FixtureConfig};
use cryptotrend::preprocess::{clean_tweet, CryptoLexicon};

fn main() {
    let fx = generate(&FixtureConfig { minutes: 200, ..FixtureConfig::default() }).remove(0);
    let lexicon = CryptoLexicon::builtin();
    let clean: Vec<_> = fx.tweets.iter().map(|t| clean_tweet(t, &lexicon)).collect();
    let stats = corpus_stats(&fx.coin, &clean);
    println!("{}: {} tweets, {:.1} tokens on average", stats.coin, stats.n_tweets, stats.average_token_count);
    for (tok, n) in stats.top_n(10) {
        println!("  {tok:<12} {n}");
    }
    let e = engagement_by_verified(&fx.tweets);
    println!("verified: {} retweets, {} favourites", e.verified.retweets, e.verified.favourites);
    println!("unverified: {} retweets, {} favourites", e.unverified.retweets, e.unverified.favourites);
}
