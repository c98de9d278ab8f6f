//! OLS, Huber SGD and random forest on synthetic linear data.

use cryptotrend::models::{fit_ols, fit_random_forest, fit_sgd_huber, forest_predict, ForestConfig, SgdConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mae(p: &[f64], y: &[f64]) -> f64 {
    p.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64
}

fn main() -> cryptotrend::Result<()> {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<Vec<f64>> = (0..500).map(|_| (0..4).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = x.iter().map(|v| 0.5 + 2.0 * v[0] - v[1] + 0.3 * v[2] * v[3] + r.random_range(-0.05..0.05)).collect();
    let (xt, yt) = (&x[..400], &y[..400]);
    let (xv, yv) = (&x[400..], &y[400..]);

    let ols = fit_ols(xt, yt)?;
    println!("ols coefficients {:?} intercept {:.3}, test MAE {:.4}", ols.coefficients, ols.intercept, mae(&ols.predict(xv), yv));

    let (sgd, curve) = fit_sgd_huber(xt, yt, &SgdConfig { max_iter: 300, ..SgdConfig::default() })?;
    println!("sgd final loss {:.4}, test MAE {:.4}", curve.last().unwrap(), mae(&sgd.predict(xv), yv));

    let forest = fit_random_forest(xt, yt, &ForestConfig::default())?;
    println!("forest test MAE {:.4}", mae(&forest_predict(&forest, xv), yv));
    Ok(())
}
