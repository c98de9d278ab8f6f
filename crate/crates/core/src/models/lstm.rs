//! LSTM regressor with a dense head, trained by backpropagation through time.
//!
//! All parameters live in one flat vector. For each recurrent layer the
//! weights form a `4H × (in + H)` row-major block with gate rows in the order
//! input, forget, output, candidate, followed by `4H` biases. Head layers
//! follow as `out × in` weights plus `out` biases.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::features::{Scaler, SeriesWindow};
use crate::seed::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LstmConfig {
    pub hidden_size: usize,
    /// 1 or 2 stacked recurrent layers.
    pub layers: usize,
    /// Widths of tanh layers between the last hidden state and the output.
    pub head_hidden: Vec<usize>,
    pub lr: f64,
    pub epochs: usize,
    /// Windows per update; `None` is full batch.
    pub batch_size: Option<usize>,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        LstmConfig {
            hidden_size: 16,
            layers: 1,
            head_hidden: Vec::new(),
            lr: 8e-4,
            epochs: 200,
            batch_size: Some(1),
            clip_norm: 5.0,
            seed: 42,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.hidden_size == 0 {
            errs.push("lstm.hidden_size must be at least 1".into());
        }
        if !(1..=2).contains(&self.layers) {
            errs.push(format!("lstm.layers must be 1 or 2, got {}", self.layers));
        }
        if self.head_hidden.contains(&0) {
            errs.push("lstm.head_hidden widths must be at least 1".into());
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            errs.push(format!("lstm.lr must be non-negative, got {}", self.lr));
        }
        if self.batch_size == Some(0) {
            errs.push("lstm.batch_size must be at least 1".into());
        }
        if !(self.clip_norm > 0.0) {
            errs.push(format!("lstm.clip_norm must be positive, got {}", self.clip_norm));
        }
        errs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Block {
    w: usize,
    b: usize,
    rows: usize,
    cols: usize,
}

fn layout(input_size: usize, cfg: &LstmConfig) -> (Vec<Block>, Vec<Block>, usize) {
    let h = cfg.hidden_size;
    let mut off = 0;
    let mut block = |rows: usize, cols: usize| {
        let b = Block { w: off, b: off + rows * cols, rows, cols };
        off += rows * cols + rows;
        b
    };
    let recurrent: Vec<Block> = (0..cfg.layers)
        .map(|l| block(4 * h, if l == 0 { input_size } else { h } + h))
        .collect();
    let widths: Vec<usize> = std::iter::once(h).chain(cfg.head_hidden.iter().copied()).chain([1]).collect();
    let head: Vec<Block> = widths.windows(2).map(|w| block(w[1], w[0])).collect();
    (recurrent, head, off)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Output = 2,
    Candidate = 3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmModel {
    pub input_size: usize,
    pub config: LstmConfig,
    pub params: Vec<f64>,
}

/// Per-step activations of one recurrent layer.
#[derive(Debug, Clone, Default)]
struct LayerCache {
    /// `[x_t; h_{t-1}]` per step.
    xh: Vec<Vec<f64>>,
    /// Post-activation gates `[i, f, o, g]` per step, each `4H`.
    gates: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    tanh_c: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
}

/// Activations kept by [`lstm_forward`] for backpropagation.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    layers: Vec<LayerCache>,
    /// Inputs to each head layer; the last entry is the head's final input.
    head_inputs: Vec<Vec<f64>>,
}

impl ForwardCache {
    /// Hidden state of the top layer at every step.
    pub fn hidden_states(&self) -> &[Vec<f64>] {
        &self.layers.last().expect("at least one layer").h
    }

    pub fn cell_states(&self) -> &[Vec<f64>] {
        &self.layers.last().expect("at least one layer").c
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn matvec(p: &[f64], blk: Block, x: &[f64], out: &mut [f64]) {
    for r in 0..blk.rows {
        let row = &p[blk.w + r * blk.cols..blk.w + (r + 1) * blk.cols];
        out[r] = p[blk.b + r] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

impl LstmModel {
    /// Uniform(±1/√H) recurrent weights and biases with forget bias 1; head
    /// layers use Uniform(±1/√fan_in).
    pub fn new(input_size: usize, config: &LstmConfig) -> Result<Self> {
        let errs = config.validate();
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        if input_size == 0 {
            return Err(Error::Config(vec!["LSTM input size must be at least 1".into()]));
        }
        let (rec, head, n) = layout(input_size, config);
        let mut params = vec![0.0; n];
        let mut r = rng(config.seed);
        let h = config.hidden_size;
        let k = 1.0 / (h as f64).sqrt();
        for blk in &rec {
            for v in &mut params[blk.w..blk.b + blk.rows] {
                *v = r.random_range(-k..k);
            }
            for v in &mut params[blk.b + h..blk.b + 2 * h] {
                *v = 1.0;
            }
        }
        for blk in &head {
            let k = 1.0 / (blk.cols as f64).sqrt();
            for v in &mut params[blk.w..blk.b + blk.rows] {
                *v = r.random_range(-k..k);
            }
        }
        Ok(LstmModel { input_size, config: config.clone(), params })
    }

    pub fn zeros(input_size: usize, config: &LstmConfig) -> Self {
        let (_, _, n) = layout(input_size, config);
        LstmModel { input_size, config: config.clone(), params: vec![0.0; n] }
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn blocks(&self) -> (Vec<Block>, Vec<Block>) {
        let (r, h, _) = layout(self.input_size, &self.config);
        (r, h)
    }

    /// `H × (in + H)` weights of one gate in a recurrent layer.
    pub fn gate_weights(&self, layer: usize, gate: Gate) -> &[f64] {
        let (rec, _) = self.blocks();
        let blk = rec[layer];
        let h = self.config.hidden_size;
        let start = blk.w + gate as usize * h * blk.cols;
        &self.params[start..start + h * blk.cols]
    }

    pub fn gate_bias(&self, layer: usize, gate: Gate) -> &[f64] {
        let (rec, _) = self.blocks();
        let h = self.config.hidden_size;
        let start = rec[layer].b + gate as usize * h;
        &self.params[start..start + h]
    }

    /// Bias of the final output unit.
    pub fn output_bias(&self) -> f64 {
        let (_, head) = self.blocks();
        self.params[head.last().expect("head has an output layer").b]
    }

    pub fn predict_window(&self, window: &SeriesWindow) -> Result<f64> {
        lstm_forward(self, window).map(|(p, _)| p)
    }

    /// Scaled predictions for many windows, evaluated in parallel.
    pub fn predict_scaled(&self, windows: &[SeriesWindow]) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        windows.par_iter().map(|w| self.predict_window(w)).collect()
    }
}

fn check_window(model: &LstmModel, w: &SeriesWindow) -> Result<()> {
    if w.width != model.input_size {
        return Err(Error::Data(format!("window width {} but model input size {}", w.width, model.input_size)));
    }
    if w.lookback == 0 || w.inputs.len() != w.lookback * w.width {
        return Err(Error::Data("malformed window".into()));
    }
    if !w.inputs.iter().all(|v| v.is_finite()) {
        return Err(Error::Data(format!("non-finite input in window for row {}", w.target_index)));
    }
    Ok(())
}

fn forward_unchecked(model: &LstmModel, w: &SeriesWindow) -> (f64, ForwardCache) {
    let p = &model.params;
    let h = model.config.hidden_size;
    let (rec, head) = model.blocks();
    let mut cache = ForwardCache::default();
    let mut seq: Vec<Vec<f64>> = (0..w.lookback).map(|t| w.step(t).to_vec()).collect();
    for blk in &rec {
        let mut lc = LayerCache::default();
        let mut hp = vec![0.0; h];
        let mut cp = vec![0.0; h];
        let mut z = vec![0.0; 4 * h];
        for x in &seq {
            let xh: Vec<f64> = x.iter().chain(&hp).copied().collect();
            matvec(p, *blk, &xh, &mut z);
            let mut gates = vec![0.0; 4 * h];
            for j in 0..3 * h {
                gates[j] = sigmoid(z[j]);
            }
            for j in 3 * h..4 * h {
                gates[j] = z[j].tanh();
            }
            let c: Vec<f64> = (0..h).map(|j| gates[h + j] * cp[j] + gates[j] * gates[3 * h + j]).collect();
            let tc: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
            let hn: Vec<f64> = (0..h).map(|j| gates[2 * h + j] * tc[j]).collect();
            lc.xh.push(xh);
            lc.gates.push(gates);
            lc.c.push(c.clone());
            lc.tanh_c.push(tc);
            lc.h.push(hn.clone());
            hp = hn;
            cp = c;
        }
        seq = lc.h.clone();
        cache.layers.push(lc);
    }
    let mut a = seq.last().expect("lookback ≥ 1").clone();
    for (k, blk) in head.iter().enumerate() {
        cache.head_inputs.push(a.clone());
        let mut out = vec![0.0; blk.rows];
        matvec(p, *blk, &a, &mut out);
        if k + 1 < head.len() {
            for v in out.iter_mut() {
                *v = v.tanh();
            }
        }
        a = out;
    }
    (a[0], cache)
}

/// Runs the recurrence over the window from zero state and applies the head.
pub fn lstm_forward(model: &LstmModel, window: &SeriesWindow) -> Result<(f64, ForwardCache)> {
    check_window(model, window)?;
    Ok(forward_unchecked(model, window))
}

/// Adds `d pred` backpropagated through the cached activations into `grad`.
fn backward(model: &LstmModel, cache: &ForwardCache, dpred: f64, grad: &mut [f64]) {
    let p = &model.params;
    let h = model.config.hidden_size;
    let (rec, head) = model.blocks();

    let mut da = vec![dpred];
    for (k, blk) in head.iter().enumerate().rev() {
        let a_in = &cache.head_inputs[k];
        let mut dprev = vec![0.0; blk.cols];
        for r in 0..blk.rows {
            let d = da[r];
            grad[blk.b + r] += d;
            let row = blk.w + r * blk.cols;
            for c in 0..blk.cols {
                grad[row + c] += d * a_in[c];
                dprev[c] += d * p[row + c];
            }
        }
        if k > 0 {
            // a_in = tanh(z) of the previous head layer
            for (d, a) in dprev.iter_mut().zip(a_in) {
                *d *= 1.0 - a * a;
            }
        }
        da = dprev;
    }

    let steps = cache.layers[0].h.len();
    // gradient w.r.t. each step's output of the layer above
    let mut dh_seq: Vec<Vec<f64>> = vec![vec![0.0; h]; steps];
    dh_seq[steps - 1] = da;
    for (l, blk) in rec.iter().enumerate().rev() {
        let lc = &cache.layers[l];
        let in_size = blk.cols - h;
        let mut dx_seq = vec![vec![0.0; in_size]; steps];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];
        for t in (0..steps).rev() {
            let g = &lc.gates[t];
            let zero = vec![0.0; h];
            let c_prev = if t > 0 { &lc.c[t - 1] } else { &zero };
            for j in 0..h {
                let (i, f, o, gg) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                let dh = dh_seq[t][j] + dh_next[j];
                let tc = lc.tanh_c[t][j];
                let dc = dh * o * (1.0 - tc * tc) + dc_next[j];
                dz[j] = dc * gg * i * (1.0 - i);
                dz[h + j] = dc * c_prev[j] * f * (1.0 - f);
                dz[2 * h + j] = dh * tc * o * (1.0 - o);
                dz[3 * h + j] = dc * i * (1.0 - gg * gg);
                dc_next[j] = dc * f;
            }
            let xh = &lc.xh[t];
            let mut dxh = vec![0.0; blk.cols];
            for r in 0..4 * h {
                let d = dz[r];
                if d == 0.0 {
                    continue;
                }
                grad[blk.b + r] += d;
                let row = blk.w + r * blk.cols;
                for c in 0..blk.cols {
                    grad[row + c] += d * xh[c];
                    dxh[c] += d * p[row + c];
                }
            }
            dx_seq[t].copy_from_slice(&dxh[..in_size]);
            dh_next.copy_from_slice(&dxh[in_size..]);
        }
        dh_seq = dx_seq;
    }
}

/// Mean squared error over `windows` and its gradient.
pub fn loss_and_gradient(model: &LstmModel, windows: &[SeriesWindow]) -> Result<(f64, Vec<f64>)> {
    for w in windows {
        check_window(model, w)?;
    }
    Ok(batch_gradient(model, windows.iter()))
}

fn batch_gradient<'a>(model: &LstmModel, windows: impl ExactSizeIterator<Item = &'a SeriesWindow>) -> (f64, Vec<f64>) {
    let n = windows.len() as f64;
    let mut grad = vec![0.0; model.params.len()];
    let mut loss = 0.0;
    for w in windows {
        let (pred, cache) = forward_unchecked(model, w);
        let r = pred - w.target;
        loss += r * r;
        backward(model, &cache, 2.0 * r / n, &mut grad);
    }
    (loss / n, grad)
}

/// Gradient descent on MSE with global-norm clipping. Each epoch visits the
/// windows in a seeded shuffled order in batches of `batch_size` (one
/// batch of everything when `None`). The returned curve holds, per epoch,
/// the mean of the batch losses seen during that epoch.
pub fn lstm_train(model: &LstmModel, windows: &[SeriesWindow]) -> Result<(LstmModel, Vec<f64>)> {
    let cfg = &model.config;
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    if windows.is_empty() {
        return Err(Error::InsufficientData("LSTM training needs at least one window".into()));
    }
    for w in windows {
        check_window(model, w)?;
    }
    let mut m = model.clone();
    let mut r = rng(cfg.seed ^ 0x005e_ed0f_1057);
    let mut order: Vec<usize> = (0..windows.len()).collect();
    let bs = cfg.batch_size.unwrap_or(windows.len()).min(windows.len());
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        if bs < windows.len() {
            order.shuffle(&mut r);
        }
        let mut total = 0.0;
        for chunk in order.chunks(bs) {
            let (loss, mut grad) = batch_gradient(&m, chunk.iter().map(|&i| &windows[i]));
            if !loss.is_finite() {
                return Err(Error::Numerical(format!("LSTM loss became non-finite at epoch {epoch}")));
            }
            total += loss * chunk.len() as f64;
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > cfg.clip_norm {
                let s = cfg.clip_norm / norm;
                grad.iter_mut().for_each(|g| *g *= s);
            }
            for (p, g) in m.params.iter_mut().zip(&grad) {
                *p -= cfg.lr * g;
            }
        }
        let mean = total / windows.len() as f64;
        if !mean.is_finite() || !m.params.iter().all(|p| p.is_finite()) {
            return Err(Error::Numerical(format!("LSTM loss became non-finite at epoch {epoch}")));
        }
        curve.push(mean);
    }
    Ok((m, curve))
}

/// Predictions in price units through the training-target scaler.
pub fn lstm_predict(model: &LstmModel, windows: &[SeriesWindow], target_scaler: &Scaler) -> Result<Vec<f64>> {
    Ok(model.predict_scaled(windows)?.into_iter().map(|v| target_scaler.inverse_value(0, v)).collect())
}
