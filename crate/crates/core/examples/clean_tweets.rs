//! Tweet cleaning and the crypto-relevance filter.

use cryptotrend::ingest::TweetRecord;
use cryptotrend::preprocess::{clean_tweet, crypto_relevance, CryptoLexicon, RelevanceMode};

fn main() {
    let lexicon = CryptoLexicon::builtin();
    let texts = [
        "@sarthakj01 buy #DOGECOIN now! https://t.co/x",
        "RT @whale_alert: huge $DOGE transfer 🚀",
        "so happy :-))",
        "Avalanche beat the Oilers again #GoAvsGo",
        "Bitcoin is not a good investment",
    ];
    for (id, text) in texts.iter().enumerate() {
        let raw = TweetRecord::from_json(&serde_json::json!({
            "id": id, "text": text, "created_at": "2022-03-01T12:00:00Z"
        }))
        .expect("valid tweet");
        let clean = clean_tweet(&raw, &lexicon);
        let keep = crypto_relevance(&clean, &lexicon, RelevanceMode::FilterOn);
        println!("{text:?}\n  -> {:?} tags {:?} relevant={keep}", clean.clean_text, clean.hashtags);
    }
}
