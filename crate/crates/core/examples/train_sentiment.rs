//! Train the hashed bag-of-words sentiment classifier and score a few texts.

use cryptotrend::fixture::sentiment_corpus;
use cryptotrend::sentiment::{score_text, train_classifier, TrainConfig};

fn main() -> cryptotrend::Result<()> {
    let corpus = sentiment_corpus(3000, 1);
    let (model, report) = train_classifier(&corpus, &TrainConfig::default())?;
    println!(
        "train accuracy {:.3}, held-out {:.3} ({} / {} texts)",
        report.train_accuracy, report.holdout_accuracy, report.n_train, report.n_holdout
    );
    for (i, text) in ["moon pump bullish", "crash dump scam", "price update today"].iter().enumerate() {
        let r = score_text(&model, i as u64, text);
        println!("{text:?}: {} ({:.3}) {:?}", r.label, r.score, model.probabilities(text));
    }
    Ok(())
}
