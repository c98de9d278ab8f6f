//! Exploratory outputs: text embeddings and their PCA, word frequencies,
//! engagement by verification status and label counts.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::files::{csv_err, csv_writer};
use crate::hashing::hashed_tf;
use crate::ingest::TweetRecord;
use crate::preprocess::CleanTweet;
use crate::seed::rng;
use crate::sentiment::{SentimentLabel, SentimentResult};
use crate::{Error, Result};

pub const DEFAULT_EMBEDDING_DIM: usize = 768;
pub const DEFAULT_PER_CLASS: usize = 1000;
const BINARY_MAGIC: &[u8; 8] = b"CTEMBED1";

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub n: usize,
    pub d: usize,
    /// Row-major `n × d`.
    pub data: Vec<f64>,
    pub labels: Vec<SentimentLabel>,
    /// Rows that came from empty texts and are all zero.
    pub empty_rows: Vec<bool>,
}

impl EmbeddingMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<SentimentLabel>) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if labels.len() != n {
            return Err(Error::Data(format!("{n} embedding rows but {} labels", labels.len())));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Data("ragged embedding rows".into()));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::Data("non-finite embedding entry".into()));
        }
        let empty_rows = (0..n).map(|i| data[i * d..(i + 1) * d].iter().all(|v| *v == 0.0)).collect();
        Ok(EmbeddingMatrix { n, d, data, labels, empty_rows })
    }
}

/// L2-normalised signed-hash term frequencies; empty texts give zero rows.
pub fn embed_texts(texts: &[&str], labels: &[SentimentLabel], d: usize) -> Result<EmbeddingMatrix> {
    if d < 2 {
        return Err(Error::Config(vec![format!("embedding dimension must be at least 2, got {d}")]));
    }
    let rows: Vec<Vec<f64>> = texts
        .par_iter()
        .map(|t| {
            let mut row = vec![0.0; d];
            for (k, v) in hashed_tf(t.split_whitespace(), d) {
                row[k] = v;
            }
            row
        })
        .collect();
    EmbeddingMatrix::from_rows(rows, labels.to_vec())
}

/// Reads an external matrix: CSV whose first line is `n,d`, or the binary
/// format `CTEMBED1`, little-endian u64 `n` and `d`, then `n·d` f64 values.
pub fn load_embeddings(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |msg: String| Error::Data(format!("{}: {msg}", path.display()));
    if bytes.starts_with(BINARY_MAGIC) {
        let u64_at = |o: usize| -> Result<u64> {
            bytes
                .get(o..o + 8)
                .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(|| bad("truncated header".into()))
        };
        let (n, d) = (u64_at(8)? as usize, u64_at(16)? as usize);
        let body = &bytes[24..];
        if body.len() != n * d * 8 {
            return Err(bad(format!("expected {} values, found {} bytes", n * d, body.len())));
        }
        let vals: Vec<f64> = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        return Ok(vals.chunks(d.max(1)).take(n).map(<[f64]>::to_vec).collect());
    }
    let text = String::from_utf8(bytes).map_err(|_| bad("neither binary nor UTF-8 CSV".into()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| bad(format!("bad header '{header}', expected n,d"))))
        .collect::<Result<_>>()?;
    let [n, d] = dims[..] else { return Err(bad(format!("bad header '{header}', expected n,d"))) };
    let rows: Vec<Vec<f64>> = lines
        .enumerate()
        .map(|(i, l)| {
            let row: Vec<f64> = l
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| bad(format!("line {}: bad number", i + 2))))
                .collect::<Result<_>>()?;
            if row.len() != d {
                return Err(bad(format!("line {}: {} values, expected {d}", i + 2, row.len())));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    if rows.len() != n {
        return Err(bad(format!("header says {n} rows, found {}", rows.len())));
    }
    Ok(rows)
}

pub fn write_embeddings_binary(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let d = rows.first().map_or(0, Vec::len);
    let mut out = BINARY_MAGIC.to_vec();
    out.extend((rows.len() as u64).to_le_bytes());
    out.extend((d as u64).to_le_bytes());
    for v in rows.iter().flatten() {
        out.extend(v.to_le_bytes());
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// External embeddings must line up with the texts they replace.
pub fn import_embeddings(path: &Path, labels: &[SentimentLabel]) -> Result<EmbeddingMatrix> {
    let rows = load_embeddings(path)?;
    if rows.len() != labels.len() {
        return Err(Error::Data(format!(
            "{}: {} embedding rows for {} texts",
            path.display(),
            rows.len(),
            labels.len()
        )));
    }
    EmbeddingMatrix::from_rows(rows, labels.to_vec())
}

/// Up to `k` ids per class (negative, neutral, positive), uniformly without
/// replacement. Ids within a class are taken in ascending order before
/// sampling so input order does not matter.
pub fn sample_per_class(results: &[SentimentResult], k: usize, seed: u64) -> [Vec<u64>; 3] {
    let mut r = rng(seed);
    SentimentLabel::ALL.map(|label| {
        let mut ids: Vec<u64> = results.iter().filter(|s| s.label == label).map(|s| s.tweet_id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            log::warn!("no {label} tweets to sample");
            return Vec::new();
        }
        let take = k.min(ids.len());
        index::sample(&mut r, ids.len(), take).into_iter().map(|i| ids[i]).collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca2D {
    pub axes: [Vec<f64>; 2],
    /// Sample variance (divisor n − 1) along each axis.
    pub explained_variance: [f64; 2],
    /// Total sample variance of the centred data.
    pub total_variance: f64,
    pub points: Vec<[f64; 2]>,
}

/// Top two right singular vectors of the column-centred matrix, each signed
/// so that its largest-magnitude component is positive.
pub fn pca_2d(m: &EmbeddingMatrix) -> Result<Pca2D> {
    if m.n < 3 {
        return Err(Error::InsufficientData(format!("PCA needs at least 3 rows, got {}", m.n)));
    }
    let mut means = vec![0.0; m.d];
    for i in 0..m.n {
        for (mu, v) in means.iter_mut().zip(m.row(i)) {
            *mu += v;
        }
    }
    means.iter_mut().for_each(|v| *v /= m.n as f64);
    let centred = DMatrix::from_fn(m.n, m.d, |i, j| m.data[i * m.d + j] - means[j]);
    let total_ss: f64 = centred.iter().map(|v| v * v).sum();
    let scale = centred.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::DegenerateData("degenerate data: all rows are equal".into()));
    }
    let svd = centred.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv_max = svd.singular_values[order[0]];
    if sv_max <= 1e-12 * scale * ((m.n * m.d) as f64).sqrt() {
        return Err(Error::DegenerateData("degenerate data: rank 0".into()));
    }
    let denom = (m.n - 1) as f64;
    let mut axes: [Vec<f64>; 2] = [vec![0.0; m.d], vec![0.0; m.d]];
    let mut explained = [0.0; 2];
    for k in 0..2 {
        if let Some(&idx) = order.get(k) {
            let mut axis: Vec<f64> = v_t.row(idx).iter().copied().collect();
            let lead = axis.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            if lead < 0.0 {
                axis.iter_mut().for_each(|v| *v = -*v);
            }
            axes[k] = axis;
            explained[k] = svd.singular_values[idx].powi(2) / denom;
        }
    }
    let points = (0..m.n)
        .map(|i| {
            let row = centred.row(i);
            let p = |a: &[f64]| row.iter().zip(a).map(|(x, y)| x * y).sum::<f64>();
            [p(&axes[0]), p(&axes[1])]
        })
        .collect();
    Ok(Pca2D { axes, explained_variance: explained, total_variance: total_ss / denom, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub coin: String,
    pub frequencies: BTreeMap<String, u64>,
    pub total_tokens: u64,
    pub n_tweets: usize,
    pub average_token_count: f64,
}

impl CorpusStats {
    /// Most frequent tokens, ties broken alphabetically.
    pub fn top_n(&self, n: usize) -> Vec<(String, u64)> {
        let mut v: Vec<(String, u64)> = self.frequencies.iter().map(|(k, c)| (k.clone(), *c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        v.truncate(n);
        v
    }
}

pub fn corpus_stats(coin: &str, tweets: &[CleanTweet]) -> CorpusStats {
    let mut frequencies = BTreeMap::new();
    let mut total_tokens = 0u64;
    let mut count_sum = 0usize;
    for t in tweets {
        for tok in t.clean_text.split_whitespace() {
            *frequencies.entry(tok.to_string()).or_insert(0) += 1;
            total_tokens += 1;
        }
        count_sum += t.token_count;
    }
    let average_token_count = if tweets.is_empty() { 0.0 } else { count_sum as f64 / tweets.len() as f64 };
    CorpusStats { coin: coin.to_string(), frequencies, total_tokens, n_tweets: tweets.len(), average_token_count }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Engagement {
    pub retweets: u64,
    pub favourites: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngagementTotals {
    pub verified: Engagement,
    pub unverified: Engagement,
}

pub fn engagement_by_verified(tweets: &[TweetRecord]) -> EngagementTotals {
    let mut out = EngagementTotals::default();
    for t in tweets {
        let e = if t.user_verified { &mut out.verified } else { &mut out.unverified };
        e.retweets += t.retweet_count;
        e.favourites += t.favourite_count;
    }
    out
}

/// Counts per class in the order negative, neutral, positive.
pub fn label_distribution(results: &[SentimentResult]) -> [usize; 3] {
    let mut c = [0; 3];
    for r in results {
        c[r.label.index()] += 1;
    }
    c
}

pub fn write_pca_points(path: &Path, pca: &Pca2D, labels: &[SentimentLabel]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x", "y", "label"]).map_err(|e| csv_err(path, e))?;
    for (p, l) in pca.points.iter().zip(labels) {
        w.write_record([p[0].to_string(), p[1].to_string(), l.to_string()]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_freqs(path: &Path, stats: &CorpusStats) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["token", "count"]).map_err(|e| csv_err(path, e))?;
    for (tok, c) in stats.top_n(usize::MAX) {
        w.write_record([tok, c.to_string()]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_engagement(path: &Path, coin: &str, totals: &EngagementTotals) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["coin", "verified", "retweets", "favourites"]).map_err(|e| csv_err(path, e))?;
    for (flag, e) in [("true", totals.verified), ("false", totals.unverified)] {
        w.write_record([coin, flag, &e.retweets.to_string(), &e.favourites.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_label_distribution(path: &Path, coin: &str, counts: [usize; 3]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["coin", "label", "count"]).map_err(|e| csv_err(path, e))?;
    for (l, c) in SentimentLabel::ALL.iter().zip(counts) {
        w.write_record([coin, l.as_str(), &c.to_string()]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn clean(id: u64, text: &str) -> CleanTweet {
        CleanTweet {
            tweet_id: id,
            clean_text: text.into(),
            hashtags: vec![],
            is_crypto_relevant: true,
            token_count: text.split_whitespace().count(),
        }
    }

    fn results(sizes: [usize; 3]) -> Vec<SentimentResult> {
        let mut id = 0;
        let mut v = Vec::new();
        for (k, n) in sizes.iter().enumerate() {
            for _ in 0..*n {
                v.push(SentimentResult { tweet_id: id, label: SentimentLabel::from_index(k), score: 0.9 });
                id += 1;
            }
        }
        v
    }

    #[test]
    fn sampling_clamps_and_is_deterministic() {
        let r = results([2000, 1500, 900]);
        let s = sample_per_class(&r, 1000, 5);
        assert_eq!(s.iter().map(Vec::len).collect::<Vec<_>>(), vec![1000, 1000, 900]);
        assert_eq!(s, sample_per_class(&r, 1000, 5));
        for (k, ids) in s.iter().enumerate() {
            let members: std::collections::HashSet<u64> =
                r.iter().filter(|x| x.label.index() == k).map(|x| x.tweet_id).collect();
            assert!(ids.iter().all(|i| members.contains(i)));
            let uniq: std::collections::HashSet<_> = ids.iter().collect();
            assert_eq!(uniq.len(), ids.len());
        }
        let empty = sample_per_class(&results([3, 0, 2]), 10, 1);
        assert!(empty[1].is_empty());
    }

    #[test]
    fn embeddings_normalised() {
        let texts = ["moon gains", "moon gains", "", "scam scam rekt"];
        let labels = [SentimentLabel::Positive; 4];
        let m = embed_texts(&texts, &labels, DEFAULT_EMBEDDING_DIM).unwrap();
        assert_eq!(m.row(0), m.row(1));
        assert_eq!(m.empty_rows, vec![false, false, true, false]);
        for i in [0, 1, 3] {
            let n: f64 = m.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-9);
        }
        assert!(embed_texts(&texts, &labels, 1).is_err());
    }

    #[test]
    fn embedding_import_formats() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("e.csv");
        std::fs::write(&csv, "2,3\n1,2,3\n4,5,6\n").unwrap();
        assert_eq!(load_embeddings(&csv).unwrap(), vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        let bin = dir.path().join("e.bin");
        let rows = vec![vec![0.5, -1.0], vec![2.0, 3.25], vec![1e-3, 7.0]];
        write_embeddings_binary(&bin, &rows).unwrap();
        assert_eq!(load_embeddings(&bin).unwrap(), rows);
        let labels = [SentimentLabel::Neutral; 2];
        assert!(import_embeddings(&bin, &labels).is_err());
        std::fs::write(&csv, "3,3\n1,2,3\n").unwrap();
        assert!(load_embeddings(&csv).is_err());
    }

    fn matrix(rows: Vec<Vec<f64>>) -> EmbeddingMatrix {
        let n = rows.len();
        EmbeddingMatrix::from_rows(rows, vec![SentimentLabel::Neutral; n]).unwrap()
    }

    #[test]
    fn exact_plane_reconstructs() {
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let u: Vec<f64> = (0..10).map(|_| r.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..10).map(|_| r.random_range(-1.0..1.0)).collect();
        let offset: Vec<f64> = (0..10).map(|_| r.random_range(-5.0..5.0)).collect();
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                let (a, b) = (r.random_range(-3.0..3.0), r.random_range(-1.0..1.0));
                (0..10).map(|j| offset[j] + a * u[j] + b * v[j]).collect()
            })
            .collect();
        let m = matrix(rows.clone());
        let p = pca_2d(&m).unwrap();
        let mean: Vec<f64> = (0..10).map(|j| rows.iter().map(|x| x[j]).sum::<f64>() / 200.0).collect();
        for (row, pt) in rows.iter().zip(&p.points) {
            for j in 0..10 {
                let rec = mean[j] + pt[0] * p.axes[0][j] + pt[1] * p.axes[1][j];
                assert!((rec - row[j]).abs() < 1e-8);
            }
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        assert!((dot(&p.axes[0], &p.axes[0]) - 1.0).abs() < 1e-9);
        assert!(dot(&p.axes[0], &p.axes[1]).abs() < 1e-9);
        assert!((p.explained_variance[0] + p.explained_variance[1] - p.total_variance).abs() < 1e-8);
    }

    #[test]
    fn explained_variance_matches_projection() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let rows: Vec<Vec<f64>> = (0..100).map(|_| (0..6).map(|j| r.random_range(-1.0..1.0) * (j + 1) as f64).collect()).collect();
        let p = pca_2d(&matrix(rows)).unwrap();
        for k in 0..2 {
            let mean = p.points.iter().map(|x| x[k]).sum::<f64>() / 100.0;
            assert!(mean.abs() < 1e-9);
            let var = p.points.iter().map(|x| (x[k] - mean).powi(2)).sum::<f64>() / 99.0;
            assert!((var - p.explained_variance[k]).abs() < 1e-9 * var.max(1.0));
        }
        assert!(p.explained_variance[0] >= p.explained_variance[1]);
        for a in &p.axes {
            let lead = a.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn full_spectrum_sums_to_total_variance() {
        let mut r = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..4).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let p = pca_2d(&matrix(rows.clone())).unwrap();
        let c = DMatrix::from_fn(30, 4, |i, j| rows[i][j] - rows.iter().map(|x| x[j]).sum::<f64>() / 30.0);
        let all: f64 = c.svd(false, false).singular_values.iter().map(|s| s * s / 29.0).sum();
        assert!((all - p.total_variance).abs() < 1e-9);
        assert!(p.explained_variance[0] + p.explained_variance[1] <= all + 1e-12);
    }

    #[test]
    fn clusters_separate() {
        let mut r = ChaCha8Rng::seed_from_u64(4);
        let d = 20;
        let centres: Vec<Vec<f64>> = (0..3).map(|_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        // rescale so centres are 10σ apart pairwise at minimum
        let min_gap = (0..3)
            .flat_map(|a| (a + 1..3).map(move |b| (a, b)))
            .map(|(a, b)| centres[a].iter().zip(&centres[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
            .fold(f64::MAX, f64::min);
        let sigma = min_gap / 10.0;
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for (k, c) in centres.iter().enumerate() {
            for _ in 0..100 {
                rows.push(c.iter().map(|v| v + noise.sample(&mut r)).collect());
                truth.push(k);
            }
        }
        let p = pca_2d(&matrix(rows)).unwrap();
        let cent: Vec<[f64; 2]> = (0..3)
            .map(|k| {
                let pts: Vec<&[f64; 2]> = p.points.iter().zip(&truth).filter(|(_, t)| **t == k).map(|(p, _)| p).collect();
                let n = pts.len() as f64;
                [pts.iter().map(|p| p[0]).sum::<f64>() / n, pts.iter().map(|p| p[1]).sum::<f64>() / n]
            })
            .collect();
        let correct = p
            .points
            .iter()
            .zip(&truth)
            .filter(|(pt, t)| {
                let dist = |c: &[f64; 2]| (pt[0] - c[0]).powi(2) + (pt[1] - c[1]).powi(2);
                (0..3).min_by(|a, b| dist(&cent[*a]).total_cmp(&dist(&cent[*b]))).unwrap() == **t
            })
            .count();
        assert!(correct as f64 >= 0.95 * 300.0, "{correct}");
    }

    #[test]
    fn degenerate_rows() {
        let m = matrix(vec![vec![1.0, 2.0]; 5]);
        assert!(matches!(pca_2d(&m), Err(Error::DegenerateData(_))));
        assert!(pca_2d(&matrix(vec![vec![1.0, 2.0], vec![0.0, 1.0]])).is_err());
    }

    #[test]
    fn corpus_counts() {
        let s = corpus_stats("X", &[clean(1, "a b"), clean(2, "a")]);
        assert_eq!(s.frequencies.get("a"), Some(&2));
        assert_eq!(s.frequencies.get("b"), Some(&1));
        assert_eq!(s.average_token_count, 1.5);
        assert_eq!(s.frequencies.values().sum::<u64>(), s.total_tokens);
    }

    #[test]
    fn top_twenty_matches_brute_force() {
        let mut r = ChaCha8Rng::seed_from_u64(6);
        let vocab: Vec<String> = (0..300).map(|i| format!("w{i}")).collect();
        let tweets: Vec<CleanTweet> = (0..10_000)
            .map(|i| {
                let n = r.random_range(1..8);
                let words: Vec<&str> = (0..n).map(|_| vocab[(r.random::<f64>().powi(2) * 300.0) as usize].as_str()).collect();
                clean(i, &words.join(" "))
            })
            .collect();
        let s = corpus_stats("X", &tweets);
        let mut brute: HashMap<&str, u64> = HashMap::new();
        for t in &tweets {
            for w in t.clean_text.split(' ') {
                *brute.entry(w).or_default() += 1;
            }
        }
        let mut b: Vec<(&str, u64)> = brute.into_iter().collect();
        b.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(y.0)));
        let top = s.top_n(20);
        for (got, want) in top.iter().zip(&b) {
            assert_eq!((got.0.as_str(), got.1), *want);
        }
    }

    fn tweet(verified: bool, rt: u64, fav: u64) -> TweetRecord {
        TweetRecord::from_json(&serde_json::json!({
            "id": 1, "text": "", "created_at": 0, "retweet_count": rt, "favourite_count": fav,
            "user": {"verified": verified}
        }))
        .unwrap()
    }

    #[test]
    fn engagement_partitions() {
        assert_eq!(engagement_by_verified(&[tweet(false, 3, 4)]).verified, Engagement::default());
        let one = engagement_by_verified(&[tweet(true, 5, 7)]);
        assert_eq!(one.verified, Engagement { retweets: 5, favourites: 7 });
        let mut r = ChaCha8Rng::seed_from_u64(7);
        let ts: Vec<TweetRecord> = (0..500).map(|_| tweet(r.random_bool(0.3), r.random_range(0..100), r.random_range(0..100))).collect();
        let e = engagement_by_verified(&ts);
        assert_eq!(e.verified.retweets + e.unverified.retweets, ts.iter().map(|t| t.retweet_count).sum::<u64>());
        assert_eq!(e.verified.favourites + e.unverified.favourites, ts.iter().map(|t| t.favourite_count).sum::<u64>());
    }

    #[test]
    fn label_counts() {
        assert_eq!(label_distribution(&results([2, 0, 5])), [2, 0, 5]);
    }
}
