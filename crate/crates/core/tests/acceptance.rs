//! The twelve acceptance checks. Prints one PASS/FAIL line per check and
//! exits non-zero if any fail. A substring argument runs matching checks only.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use cryptotrend::analysis::{pca_2d, EmbeddingMatrix};
use cryptotrend::evaluation::compute_metrics;
use cryptotrend::features::SeriesWindow;
use cryptotrend::fixture::sentiment_corpus;
use cryptotrend::ingest::{join_tweets_prices, PriceBar, TweetRecord};
use cryptotrend::models::{fit_ols, huber_derivative, huber_loss, LstmConfig, LstmModel};
use cryptotrend::models::lstm::loss_and_gradient;
use cryptotrend::pipeline::{CoinEvaluation, PipelineConfig};
use cryptotrend::preprocess::{clean_tweet, map_emoticons, CryptoLexicon};
use cryptotrend::sentiment::{softmax, train_classifier, SentimentLabel, TrainConfig};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn budget(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, budget {limit:?}"))
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

fn metric_oracles() -> Result<String, String> {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let n = r.random_range(1..60);
        let actual: Vec<f64> = (0..n).map(|_| r.random_range(0.01..500.0)).collect();
        let pred: Vec<f64> = actual.iter().map(|a| a + normal(&mut r) * a * 0.2).collect();
        let m = compute_metrics("m", "c", &pred, &actual).map_err(|e| e.to_string())?;
        let mut abs = Vec::new();
        let mut rel = Vec::new();
        for i in 0..n {
            let e = if pred[i] > actual[i] { pred[i] - actual[i] } else { actual[i] - pred[i] };
            abs.push(e);
            rel.push(e / actual[i] * 100.0);
        }
        let mae = abs.iter().sum::<f64>() / n as f64;
        let rmse = (abs.iter().map(|e| e * e).sum::<f64>() / n as f64).sqrt();
        let maxd = rel.iter().cloned().fold(f64::MIN, f64::max);
        for (got, want) in [(m.mae, mae), (m.rmse, rmse), (m.max_delta_pct, maxd)] {
            let d = (got - want).abs() / want.abs().max(1.0);
            worst = worst.max(d);
            ensure(d <= 1e-10, || format!("trial {trial}: {got} vs {want}"))?;
        }
        ensure(m.rmse >= m.mae, || format!("trial {trial}: RMSE {} < MAE {}", m.rmse, m.mae))?;
    }
    budget(start, Duration::from_secs(1))?;
    Ok(format!("1000 trials, worst deviation {worst:.1e}"))
}

/// Gaussian elimination with partial pivoting on the normal equations of
/// `[X 1]`.
fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let f = x[0].len() + 1;
    let mut a = vec![vec![0.0; f + 1]; f];
    for (row, &t) in x.iter().zip(y) {
        let aug: Vec<f64> = row.iter().copied().chain([1.0]).collect();
        for i in 0..f {
            for j in 0..f {
                a[i][j] += aug[i] * aug[j];
            }
            a[i][f] += aug[i] * t;
        }
    }
    for c in 0..f {
        let p = (c..f).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        for i in 0..f {
            if i != c {
                let k = a[i][c] / a[c][c];
                for j in c..=f {
                    a[i][j] -= k * a[c][j];
                }
            }
        }
    }
    (0..f).map(|i| a[i][f] / a[i][i]).collect()
}

fn ols_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for sys in 0..50 {
        let w: Vec<f64> = (0..6).map(|_| normal(&mut r) * 3.0).collect();
        let x: Vec<Vec<f64>> = (0..200).map(|_| (0..6).map(|_| normal(&mut r)).collect()).collect();
        let y: Vec<f64> =
            x.iter().map(|row| row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + 1.5 + normal(&mut r) * 0.1).collect();
        let m = fit_ols(&x, &y).map_err(|e| e.to_string())?;
        let beta = normal_equations(&x, &y);
        for (i, row) in x.iter().enumerate() {
            let oracle = row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + beta[6];
            let d = ((y[i] - m.predict_one(row)) - (y[i] - oracle)).abs();
            worst = worst.max(d);
            ensure(d <= 1e-8, || format!("system {sys}, row {i}: residuals differ by {d:e}"))?;
        }
    }
    budget(start, Duration::from_secs(5))?;
    Ok(format!("50 systems, worst residual gap {worst:.1e}"))
}

fn huber_seam() -> Result<String, String> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for eps in [0.1f64, 1.0, 1.35] {
        for r in [eps, -eps] {
            let quad = 0.5 * r * r;
            let lin = eps * r.abs() - 0.5 * eps * eps;
            let dquad = r;
            let dlin = eps * r.signum();
            let inside = r - r.signum() * f64::EPSILON * eps;
            let outside = r + r.signum() * f64::EPSILON * eps;
            let pairs = [
                (quad, lin),
                (huber_loss(r, eps), quad),
                (huber_loss(inside, eps), huber_loss(outside, eps)),
                (dquad, dlin),
                (huber_derivative(r, eps), dlin),
                (huber_derivative(inside, eps), huber_derivative(outside, eps)),
            ];
            for (a, b) in pairs {
                let d = (a - b).abs();
                worst = worst.max(d);
                ensure(d <= 1e-12, || format!("eps {eps}, r {r}: {a} vs {b}"))?;
            }
        }
    }
    budget(start, Duration::from_secs(1))?;
    Ok(format!("worst branch gap {worst:.1e}"))
}

fn lstm_gradient_check() -> Result<String, String> {
    let start = Instant::now();
    let cfg = LstmConfig { hidden_size: 3, ..LstmConfig::default() };
    let mut model = LstmModel::new(2, &cfg).map_err(|e| e.to_string())?;
    let mut r = ChaCha8Rng::seed_from_u64(4);
    model.params.iter_mut().for_each(|p| *p += normal(&mut r) * 0.3);
    let windows: Vec<SeriesWindow> = (0..3)
        .map(|i| SeriesWindow {
            inputs: (0..8).map(|_| normal(&mut r)).collect(),
            lookback: 4,
            width: 2,
            target: normal(&mut r),
            target_index: i,
        })
        .collect();
    let (_, grad) = loss_and_gradient(&model, &windows).map_err(|e| e.to_string())?;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..model.params.len() {
        let mut plus = model.clone();
        plus.params[k] += h;
        let mut minus = model.clone();
        minus.params[k] -= h;
        let lp = loss_and_gradient(&plus, &windows).unwrap().0;
        let lm = loss_and_gradient(&minus, &windows).unwrap().0;
        let numeric = (lp - lm) / (2.0 * h);
        let rel = (grad[k] - numeric).abs() / grad[k].abs().max(numeric.abs()).max(1e-7);
        worst = worst.max(rel);
        ensure(rel < 1e-4, || format!("parameter {k}: analytic {} vs numeric {numeric}", grad[k]))?;
    }
    budget(start, Duration::from_secs(10))?;
    Ok(format!("{} parameters, worst relative error {worst:.1e}", model.params.len()))
}

fn coin_lines(evals: &BTreeMap<String, CoinEvaluation>) -> String {
    evals
        .iter()
        .map(|(coin, ev)| {
            let lstm = ev.metrics.iter().find(|m| m.model == "lstm").unwrap();
            format!("{coin} lstm {:.4e} naive {:.4e} max δ {:.2}%", lstm.mae, ev.baseline.mae, lstm.max_delta_pct)
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn learnability() -> Result<String, String> {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let (_, summary) = common::run_fixture(dir.path(), 7, |_| {});
    for (coin, ev) in &summary.evaluations {
        let lstm = ev.metrics.iter().find(|m| m.model == "lstm").unwrap();
        ensure(lstm.mae <= 0.9 * ev.baseline.mae, || {
            format!("{coin}: LSTM MAE {} not 10% below naive {}", lstm.mae, ev.baseline.mae)
        })?;
        ensure(lstm.max_delta_pct < 43.83, || format!("{coin}: max δ {}%", lstm.max_delta_pct))?;
    }
    budget(start, Duration::from_secs(120))?;
    Ok(coin_lines(&summary.evaluations))
}

fn ordering() -> Result<String, String> {
    let start = Instant::now();
    let mut held = 0;
    let mut notes = Vec::new();
    for seed in [7, 11, 13, 17, 19] {
        let dir = tempfile::tempdir().unwrap();
        let (_, summary) = common::run_fixture(dir.path(), seed, |_| {});
        let ok = summary.evaluations.values().all(|ev| {
            let lstm = ev.metrics.iter().find(|m| m.model == "lstm").unwrap().mae;
            ev.metrics.iter().filter(|m| m.model != "lstm").all(|m| lstm <= m.mae)
        });
        held += ok as usize;
        notes.push(format!("{seed}:{}", if ok { "ok" } else { "violated" }));
    }
    ensure(held >= 4, || format!("ordering held on {held}/5 seeds ({})", notes.join(" ")))?;
    budget(start, Duration::from_secs(300))?;
    Ok(format!("held on {held}/5 seeds"))
}

fn minute_floor_plus_one(ts: DateTime<Utc>) -> i64 {
    (ts.timestamp().div_euclid(60) + 1) * 60
}

fn join_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(7);
    let t0 = Utc.with_ymd_and_hms(2022, 3, 1, 0, 0, 0).unwrap().timestamp();
    let minutes: Vec<i64> = (0..3000).filter(|_| r.random_bool(0.8)).collect();
    let bars: Vec<PriceBar> = minutes
        .into_iter()
        .map(|m| {
            let close = r.random_range(1.0..2.0);
            PriceBar {
                time: Utc.timestamp_opt(t0 + 60 * m, 0).unwrap(),
                high: close,
                low: close,
                open: close,
                close,
                volume_from: 1.0,
                volume_to: 1.0,
                coin: "X".into(),
            }
        })
        .collect();
    let tweets: Vec<TweetRecord> = (0..5000u64)
        .map(|id| {
            let secs = t0 - 600 + r.random_range(0..3000 * 60 + 1200);
            let created = Utc.timestamp_opt(secs, 0).unwrap();
            TweetRecord::from_json(&serde_json::json!({
                "id": id,
                "text": "t",
                "created_at": created.to_rfc3339(),
            }))
            .unwrap()
        })
        .collect();
    let mut oracle = Vec::new();
    for t in &tweets {
        for b in &bars {
            if b.time.timestamp() == minute_floor_plus_one(t.created_at) {
                oracle.push((t.created_at, t.id, b.time, b.close));
            }
        }
    }
    oracle.sort_by_key(|o| (o.0, o.1));
    let (joined, counts) = join_tweets_prices(&tweets, &bars);
    let got: Vec<_> = joined.iter().map(|j| (j.tweet.created_at, j.tweet.id, j.bar.time, j.target_close)).collect();
    ensure(got == oracle, || format!("{} joined rows vs {} from brute force", got.len(), oracle.len()))?;
    ensure(counts.joined + counts.dropped == tweets.len(), || format!("{counts:?}"))?;
    budget(start, Duration::from_secs(5))?;
    Ok(format!("{} joined, {} dropped", counts.joined, counts.dropped))
}

fn preprocessing_fixtures() -> Result<String, String> {
    let start = Instant::now();
    let lex = CryptoLexicon::builtin();
    let clean = |text: &str| {
        let raw = TweetRecord::from_json(&serde_json::json!({"id": 1, "text": text, "created_at": "2022-03-01T00:00:00Z"}))
            .unwrap();
        clean_tweet(&raw, &lex)
    };
    let m = clean("@sarthakj01 buy #DOGECOIN now! https://t.co/x");
    ensure(m.clean_text == "buy now" && m.hashtags == ["dogecoin"], || format!("mention case gave {m:?}"))?;
    let e = clean("so happy :-))");
    ensure(e.clean_text == "so happy very_happy", || format!("emoticon case gave {:?}", e.clean_text))?;
    ensure(map_emoticons(":-))") == " very_happy ", || format!("map gave {:?}", map_emoticons(":-))")))?;
    let s = clean("Bitcoin is not a good investment");
    ensure(s.clean_text == "bitcoin is not a good investment", || format!("stopword case gave {:?}", s.clean_text))?;
    budget(start, Duration::from_secs(1))?;
    Ok("3 fixtures exact".into())
}

fn sentiment_classifier() -> Result<String, String> {
    let start = Instant::now();
    let corpus = sentiment_corpus(3000, 9);
    let (_, report) = train_classifier(&corpus, &TrainConfig::default()).map_err(|e| e.to_string())?;
    ensure(report.holdout_accuracy >= 0.9, || format!("held-out accuracy {}", report.holdout_accuracy))?;
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let logits = [0, 1, 2].map(|_| normal(&mut r) * 30.0);
        let p = softmax(logits);
        let d = (p.iter().sum::<f64>() - 1.0).abs();
        worst = worst.max(d);
        ensure(d <= 1e-9 && p.iter().all(|v| (0.0..=1.0).contains(v)), || format!("softmax {logits:?} -> {p:?}"))?;
    }
    budget(start, Duration::from_secs(30))?;
    Ok(format!("held-out accuracy {:.3}, softmax worst {worst:.1e}", report.holdout_accuracy))
}

fn pca() -> Result<String, String> {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(10);
    let (n, d) = (300, 40);
    let basis: Vec<Vec<f64>> = (0..2).map(|_| (0..d).map(|_| normal(&mut r)).collect()).collect();
    let mean: Vec<f64> = (0..d).map(|_| normal(&mut r) * 5.0).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let (a, b) = (normal(&mut r) * 4.0, normal(&mut r));
            (0..d).map(|j| mean[j] + a * basis[0][j] + b * basis[1][j]).collect()
        })
        .collect();
    let m = EmbeddingMatrix::from_rows(rows.clone(), vec![SentimentLabel::Neutral; n]).map_err(|e| e.to_string())?;
    let p = pca_2d(&m).map_err(|e| e.to_string())?;
    let mut col_mean = vec![0.0; d];
    for row in &rows {
        for j in 0..d {
            col_mean[j] += row[j] / n as f64;
        }
    }
    let mut recon: f64 = 0.0;
    for (row, pt) in rows.iter().zip(&p.points) {
        for j in 0..d {
            let x = col_mean[j] + pt[0] * p.axes[0][j] + pt[1] * p.axes[1][j];
            recon = recon.max((x - row[j]).abs());
        }
    }
    ensure(recon <= 1e-8, || format!("rank-2 reconstruction error {recon:e}"))?;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let ortho = [
        (dot(&p.axes[0], &p.axes[0]) - 1.0).abs(),
        (dot(&p.axes[1], &p.axes[1]) - 1.0).abs(),
        dot(&p.axes[0], &p.axes[1]).abs(),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    ensure(ortho <= 1e-9, || format!("axes off orthonormal by {ortho:e}"))?;

    let centres: Vec<Vec<f64>> = (0..3).map(|_| (0..d).map(|_| normal(&mut r) * 3.0).collect()).collect();
    let labels: Vec<usize> = (0..600).map(|i| i % 3).collect();
    let rows: Vec<Vec<f64>> =
        labels.iter().map(|&k| centres[k].iter().map(|c| c + normal(&mut r) * 0.5).collect()).collect();
    let m = EmbeddingMatrix::from_rows(rows, labels.iter().map(|&k| SentimentLabel::from_index(k)).collect())
        .map_err(|e| e.to_string())?;
    let p = pca_2d(&m).map_err(|e| e.to_string())?;
    let mut cent = [[0.0f64; 2]; 3];
    for (pt, &k) in p.points.iter().zip(&labels) {
        cent[k][0] += pt[0] / 200.0;
        cent[k][1] += pt[1] / 200.0;
    }
    let hits = p
        .points
        .iter()
        .zip(&labels)
        .filter(|(pt, &k)| {
            let dist = |c: &[f64; 2]| (pt[0] - c[0]).powi(2) + (pt[1] - c[1]).powi(2);
            (0..3).min_by(|&a, &b| dist(&cent[a]).total_cmp(&dist(&cent[b]))).unwrap() == k
        })
        .count();
    let acc = hits as f64 / labels.len() as f64;
    ensure(acc >= 0.95, || format!("nearest-centroid recovery {acc}"))?;
    budget(start, Duration::from_secs(10))?;
    Ok(format!("reconstruction {recon:.1e}, orthonormality {ortho:.1e}, recovery {:.1}%", acc * 100.0))
}

fn artifacts(out: &Path) -> BTreeMap<String, Vec<u8>> {
    common::files_under(out)
        .into_iter()
        .filter(|p| p.ends_with("metrics.csv") || p.ends_with("series.csv"))
        .map(|p| (p.display().to_string(), std::fs::read(out.join(&p)).unwrap()))
        .collect()
}

fn determinism() -> Result<String, String> {
    let start = Instant::now();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ca, _) = common::run_fixture(a.path(), 7, |_| {});
    let (cb, _) = common::run_fixture(b.path(), 7, |_| {});
    let (fa, fb) = (artifacts(&ca.output_dir), artifacts(&cb.output_dir));
    ensure(fa.keys().eq(fb.keys()), || "runs wrote different file sets".into())?;
    for (k, v) in &fa {
        ensure(fb[k] == *v, || format!("{k} differs between runs"))?;
    }
    ensure(fa.contains_key("metrics.csv"), || "no combined metrics.csv".into())?;
    budget(start, Duration::from_secs(300))?;
    Ok(format!("{} files byte-identical", fa.len()))
}

fn ablation() -> Result<String, String> {
    let start = Instant::now();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (_, with) = common::run_fixture(a.path(), 7, |c: &mut PipelineConfig| c.include_metadata = true);
    let (_, without) = common::run_fixture(b.path(), 7, |c: &mut PipelineConfig| c.include_metadata = false);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (coin, ev) in &with.evaluations {
        for m in &ev.metrics {
            let other = without.evaluations[coin].metrics.iter().find(|o| o.model == m.model).unwrap();
            let ratio = other.mae / m.mae;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            ensure((0.5..=2.0).contains(&ratio), || format!("{coin} {}: MAE ratio {ratio}", m.model))?;
        }
    }
    Ok(format!("MAE ratios within [{lo:.3}, {hi:.3}] ({:.0?})", start.elapsed()))
}

fn main() {
    let checks: [(&str, Check); 12] = [
        ("metric oracles", metric_oracles),
        ("ols oracle", ols_oracle),
        ("huber seam", huber_seam),
        ("lstm gradient check", lstm_gradient_check),
        ("learnability", learnability),
        ("regression vs lstm ordering", ordering),
        ("join oracle", join_oracle),
        ("preprocessing fixtures", preprocessing_fixtures),
        ("sentiment classifier", sentiment_classifier),
        ("pca", pca),
        ("determinism", determinism),
        ("metadata ablation", ablation),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        if filter.as_ref().is_some_and(|f| !name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({took:.2?}) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({took:.2?}) {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
