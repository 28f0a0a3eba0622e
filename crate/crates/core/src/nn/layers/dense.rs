use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Relu,
    Tanh,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation's output.
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// The same `act(W x + b)` applied at every time step. `w` is `units x inputs`.
pub fn time_distributed_dense(
    xs: &[Vec<f64>],
    w: &[f64],
    b: &[f64],
    act: Activation,
) -> Result<Vec<Vec<f64>>> {
    let units = b.len();
    xs.iter()
        .map(|x| {
            let f = x.len();
            if w.len() != units * f {
                return Err(Error::Shape(format!(
                    "dense weights hold {} values, expected {units}x{f}",
                    w.len()
                )));
            }
            Ok((0..units)
                .map(|u| {
                    let s: f64 = w[u * f..(u + 1) * f].iter().zip(x).map(|(a, b)| a * b).sum();
                    act.apply(s + b[u])
                })
                .collect())
        })
        .collect()
}

pub struct DenseGrads {
    pub input: Vec<Vec<f64>>,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn time_distributed_dense_backward(
    xs: &[Vec<f64>],
    outputs: &[Vec<f64>],
    w: &[f64],
    act: Activation,
    grad_out: &[Vec<f64>],
) -> DenseGrads {
    let units = outputs.first().map_or(0, Vec::len);
    let f = xs.first().map_or(0, Vec::len);
    let mut gw = vec![0.0; w.len()];
    let mut gb = vec![0.0; units];
    let mut gx = vec![vec![0.0; f]; xs.len()];
    for t in 0..xs.len() {
        for u in 0..units {
            let d = grad_out[t][u] * act.derivative_from_output(outputs[t][u]);
            gb[u] += d;
            for j in 0..f {
                gw[u * f + j] += d * xs[t][j];
                gx[t][j] += w[u * f + j] * d;
            }
        }
    }
    DenseGrads {
        input: gx,
        w: gw,
        b: gb,
    }
}
