//! Linear regression fitted by per-sample SGD on the Huber loss.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::check_finite_rows;
use super::linear::LinearModel;
use crate::seed::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdConfig {
    /// L2 penalty strength.
    pub alpha: f64,
    pub eta0: f64,
    /// Exponent of the inverse-scaling schedule `eta0 / t^power_t`.
    pub power_t: f64,
    pub max_iter: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig { alpha: 0.01, eta0: 0.01, power_t: 0.25, max_iter: 100, epsilon: 0.1, seed: 42 }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (name, v) in [("sgd.alpha", self.alpha), ("sgd.eta0", self.eta0), ("sgd.epsilon", self.epsilon)] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name} must be positive, got {v}"));
            }
        }
        if self.max_iter == 0 {
            errs.push("sgd.max_iter must be at least 1".into());
        }
        errs
    }
}

pub fn huber_loss(r: f64, epsilon: f64) -> f64 {
    if r.abs() <= epsilon {
        0.5 * r * r
    } else {
        epsilon * (r.abs() - 0.5 * epsilon)
    }
}

pub fn huber_derivative(r: f64, epsilon: f64) -> f64 {
    if r.abs() <= epsilon {
        r
    } else {
        epsilon * r.signum()
    }
}

/// Returns the model and the mean Huber loss over the training set after
/// each epoch. `t` counts samples across epochs, starting at 1. The penalty
/// gradient is `alpha·W`; the intercept is not penalised.
pub fn fit_sgd_huber(x: &[Vec<f64>], y: &[f64], config: &SgdConfig) -> Result<(LinearModel, Vec<f64>)> {
    let errs = config.validate();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let width = check_finite_rows(x, y)?;
    let mut w = vec![0.0; width];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = rng(config.seed);
    let mut t = 1.0f64;
    let mut curve = Vec::with_capacity(config.max_iter);
    let eps = config.epsilon;
    for epoch in 1..=config.max_iter {
        order.shuffle(&mut rng);
        for &i in &order {
            let eta = config.eta0 / t.powf(config.power_t);
            let r = crate::linalg::dot(&w, &x[i]) + b - y[i];
            let g = huber_derivative(r, eps);
            for (wj, xj) in w.iter_mut().zip(&x[i]) {
                *wj -= eta * (g * xj + config.alpha * *wj);
            }
            b -= eta * g;
            t += 1.0;
        }
        let model = LinearModel { coefficients: w.clone(), intercept: b };
        let loss = x.iter().zip(y).map(|(r, v)| huber_loss(model.predict_one(r) - v, eps)).sum::<f64>() / x.len() as f64;
        if !loss.is_finite() {
            return Err(Error::Numerical(format!("SGD diverged at epoch {epoch}")));
        }
        curve.push(loss);
    }
    Ok((LinearModel { coefficients: w, intercept: b }, curve))
}
