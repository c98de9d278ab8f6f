//! Ordinary least squares.

use serde::{Deserialize, Serialize};

use super::check_finite_rows;
use crate::linalg::{dot, lstsq, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        dot(&self.coefficients, x) + self.intercept
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<f64> {
        x.iter().map(|r| self.predict_one(r)).collect()
    }

    pub fn residual_sum_of_squares(&self, x: &[Vec<f64>], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(r, t)| (self.predict_one(r) - t).powi(2)).sum()
    }
}

/// Minimises `Σ(y − XW − b)²`. The intercept is handled by centring, and the
/// slope problem is solved by pivoted QR, so duplicated or constant columns
/// give the minimum-norm `W`.
pub fn fit_ols(x: &[Vec<f64>], y: &[f64]) -> Result<LinearModel> {
    let width = check_finite_rows(x, y)?;
    let n = x.len() as f64;
    let x_mean: Vec<f64> = (0..width).map(|c| x.iter().map(|r| r[c]).sum::<f64>() / n).collect();
    let y_mean = y.iter().sum::<f64>() / n;
    let mut a = Matrix::zeros(x.len(), width);
    for (i, r) in x.iter().enumerate() {
        for c in 0..width {
            a.set(i, c, r[c] - x_mean[c]);
        }
    }
    let b: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let (w, _rank) = lstsq(&a, &b);
    let intercept = y_mean - dot(&x_mean, &w);
    let model = LinearModel { coefficients: w, intercept };
    if !model.coefficients.iter().all(|v| v.is_finite()) || !intercept.is_finite() {
        return Err(Error::Numerical("least-squares solution is not finite".into()));
    }
    Ok(model)
}
