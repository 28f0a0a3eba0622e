//! Per-channel batch normalization over (batch, time, frequency).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const BN_EPSILON: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.99;

/// Running averages used in inference mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub initialized: bool,
}

impl RunningStats {
    pub fn new(channels: usize) -> Self {
        Self {
            mean: vec![0.0; channels],
            var: vec![1.0; channels],
            initialized: false,
        }
    }

    /// Exponential moving average with `momentum`. The first update copies the
    /// batch statistics so inference is usable immediately.
    pub fn update(&mut self, batch_mean: &[f64], batch_var: &[f64], momentum: f64) {
        if !self.initialized {
            self.mean.copy_from_slice(batch_mean);
            self.var.copy_from_slice(batch_var);
            self.initialized = true;
            return;
        }
        for (r, b) in self.mean.iter_mut().zip(batch_mean) {
            *r = momentum * *r + (1.0 - momentum) * b;
        }
        for (r, b) in self.var.iter_mut().zip(batch_var) {
            *r = momentum * *r + (1.0 - momentum) * b;
        }
    }
}

pub struct BnCache {
    xhat: Vec<Tensor>,
    inv_std: Vec<f64>,
    /// Batch mean per channel.
    pub mean: Vec<f64>,
    /// Unbiased batch variance per channel, for the running average.
    pub var_unbiased: Vec<f64>,
}

fn check_affine(channels: usize, gamma: &[f64], beta: &[f64]) -> Result<()> {
    if gamma.len() != channels || beta.len() != channels {
        return Err(Error::Shape(format!(
            "batch norm over {channels} channels given {} gammas and {} betas",
            gamma.len(),
            beta.len()
        )));
    }
    Ok(())
}

pub fn batchnorm_train(
    inputs: &[Tensor],
    gamma: &[f64],
    beta: &[f64],
    eps: f64,
) -> Result<(Vec<Tensor>, BnCache)> {
    if inputs.len() < 2 {
        return Err(Error::Shape(format!(
            "batch norm in train mode needs at least 2 samples, got {}",
            inputs.len()
        )));
    }
    let shape = inputs[0].shape();
    if inputs.iter().any(|x| x.shape() != shape) {
        return Err(Error::Shape("batch norm inputs differ in shape".into()));
    }
    let ch = shape[2];
    check_affine(ch, gamma, beta)?;
    let count = (inputs.len() * shape[0] * shape[1]) as f64;

    let mut mean = vec![0.0; ch];
    for x in inputs {
        for row in x.data().chunks_exact(ch) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut var = vec![0.0; ch];
    for x in inputs {
        for row in x.data().chunks_exact(ch) {
            for c in 0..ch {
                var[c] += (row[c] - mean[c]).powi(2);
            }
        }
    }
    let var_unbiased: Vec<f64> = var.iter().map(|s| s / (count - 1.0).max(1.0)).collect();
    var.iter_mut().for_each(|s| *s /= count);
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();

    let mut xhat = Vec::with_capacity(inputs.len());
    let mut outputs = Vec::with_capacity(inputs.len());
    for x in inputs {
        let mut h = x.clone();
        let mut y = x.clone();
        for (hr, yr) in h.data_mut().chunks_exact_mut(ch).zip(y.data_mut().chunks_exact_mut(ch)) {
            for c in 0..ch {
                hr[c] = (hr[c] - mean[c]) * inv_std[c];
                yr[c] = gamma[c] * hr[c] + beta[c];
            }
        }
        xhat.push(h);
        outputs.push(y);
    }
    Ok((
        outputs,
        BnCache {
            xhat,
            inv_std,
            mean,
            var_unbiased,
        },
    ))
}

pub fn batchnorm_infer(
    input: &Tensor,
    gamma: &[f64],
    beta: &[f64],
    stats: &RunningStats,
    eps: f64,
) -> Result<Tensor> {
    if !stats.initialized {
        return Err(Error::UninitializedStats);
    }
    let ch = input.channels();
    check_affine(ch, gamma, beta)?;
    let scale: Vec<f64> = (0..ch)
        .map(|c| gamma[c] / (stats.var[c] + eps).sqrt())
        .collect();
    let mut y = input.clone();
    for row in y.data_mut().chunks_exact_mut(ch) {
        for c in 0..ch {
            row[c] = (row[c] - stats.mean[c]) * scale[c] + beta[c];
        }
    }
    Ok(y)
}

pub struct BnGrads {
    pub inputs: Vec<Tensor>,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

pub fn batchnorm_backward(cache: &BnCache, gamma: &[f64], grads: &[Tensor]) -> BnGrads {
    let ch = gamma.len();
    let shape = cache.xhat[0].shape();
    let count = (cache.xhat.len() * shape[0] * shape[1]) as f64;
    let mut dgamma = vec![0.0; ch];
    let mut dbeta = vec![0.0; ch];
    for (g, h) in grads.iter().zip(&cache.xhat) {
        for (gr, hr) in g.data().chunks_exact(ch).zip(h.data().chunks_exact(ch)) {
            for c in 0..ch {
                dbeta[c] += gr[c];
                dgamma[c] += gr[c] * hr[c];
            }
        }
    }
    // dx = gamma * inv_std / N * (N*g - sum(g) - xhat * sum(g*xhat))
    let inputs = grads
        .iter()
        .zip(&cache.xhat)
        .map(|(g, h)| {
            let mut dx = g.clone();
            for (dr, hr) in dx.data_mut().chunks_exact_mut(ch).zip(h.data().chunks_exact(ch)) {
                for c in 0..ch {
                    dr[c] = gamma[c] * cache.inv_std[c] / count
                        * (count * dr[c] - dbeta[c] - hr[c] * dgamma[c]);
                }
            }
            dx
        })
        .collect();
    BnGrads {
        inputs,
        gamma: dgamma,
        beta: dbeta,
    }
}
