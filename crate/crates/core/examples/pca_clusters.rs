//! Project three separated clusters onto their first two principal axes.

use cryptotrend::analysis::{pca_2d, EmbeddingMatrix};
use cryptotrend::sentiment::SentimentLabel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> cryptotrend::Result<()> {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.4).unwrap();
    let d = 64;
    let centres: Vec<Vec<f64>> = (0..3).map(|k| (0..d).map(|j| if j % 3 == k { 2.0 } else { 0.0 }).collect()).collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (k, c) in centres.iter().enumerate() {
        for _ in 0..100 {
            rows.push(c.iter().map(|v| v + noise.sample(&mut r)).collect());
            labels.push(SentimentLabel::from_index(k));
        }
    }
    let pca = pca_2d(&EmbeddingMatrix::from_rows(rows, labels.clone())?)?;
    let share = (pca.explained_variance[0] + pca.explained_variance[1]) / pca.total_variance;
    println!("first two axes explain {:.1}% of variance", share * 100.0);
    for k in 0..3 {
        let pts: Vec<&[f64; 2]> = pca.points.iter().zip(&labels).filter(|(_, l)| l.index() == k).map(|(p, _)| p).collect();
        let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
        let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
        println!("{}: centroid ({cx:.2}, {cy:.2})", SentimentLabel::from_index(k));
    }
    Ok(())
}
