use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::ParamStore;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates shaped like the parameters.
#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    m: ParamStore,
    v: ParamStore,
    t: u64,
}

impl Adam {
    pub fn new(params: &ParamStore, cfg: AdamConfig) -> Self {
        Self {
            cfg,
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam update. A non-finite gradient is rejected
    /// before anything changes.
    pub fn step(&mut self, params: &mut ParamStore, grads: &ParamStore) -> Result<()> {
        if let Some(g) = grads.groups.iter().find(|g| g.values.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFiniteGradient { group: g.name.clone() });
        }
        self.t += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.cfg;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for (((p, g), m), v) in params
            .groups
            .iter_mut()
            .zip(&grads.groups)
            .zip(&mut self.m.groups)
            .zip(&mut self.v.groups)
        {
            for i in 0..p.values.len() {
                let gi = g.values[i];
                m.values[i] = beta1 * m.values[i] + (1.0 - beta1) * gi;
                v.values[i] = beta2 * v.values[i] + (1.0 - beta2) * gi * gi;
                let mhat = m.values[i] / c1;
                let vhat = v.values[i] / c2;
                p.values[i] -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
        Ok(())
    }
}
