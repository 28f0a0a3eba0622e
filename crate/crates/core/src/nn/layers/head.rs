//! Output head: temporal mean, maxout over affine pieces, then a sigmoid.

use crate::error::{Error, Result};

use super::sigmoid;

/// Keeps the output strictly inside (0, 1) where the sigmoid saturates.
const OUTPUT_MARGIN: f64 = 1e-15;

pub struct HeadCache {
    pooled: Vec<f64>,
    active: usize,
    pub output: f64,
}

/// `w` is `pieces x features`, `b` has one bias per piece.
pub fn maxout_sigmoid_head(xs: &[Vec<f64>], w: &[f64], b: &[f64]) -> Result<HeadCache> {
    let pieces = b.len();
    if pieces < 2 {
        return Err(Error::Shape(format!("maxout needs at least 2 pieces, got {pieces}")));
    }
    if xs.is_empty() {
        return Err(Error::Shape("maxout head got an empty sequence".into()));
    }
    let f = xs[0].len();
    if w.len() != pieces * f {
        return Err(Error::Shape(format!(
            "maxout weights hold {} values, expected {pieces}x{f}",
            w.len()
        )));
    }
    let steps = xs.len() as f64;
    let mut pooled = vec![0.0; f];
    for x in xs {
        for (p, v) in pooled.iter_mut().zip(x) {
            *p += v / steps;
        }
    }
    let mut active = 0;
    let mut best = f64::NEG_INFINITY;
    for p in 0..pieces {
        let s: f64 = w[p * f..(p + 1) * f].iter().zip(&pooled).map(|(a, c)| a * c).sum::<f64>() + b[p];
        if s > best {
            best = s;
            active = p;
        }
    }
    Ok(HeadCache {
        pooled,
        active,
        output: sigmoid(best).clamp(OUTPUT_MARGIN, 1.0 - OUTPUT_MARGIN),
    })
}

pub struct HeadGrads {
    pub input: Vec<Vec<f64>>,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn maxout_sigmoid_head_backward(
    cache: &HeadCache,
    w: &[f64],
    pieces: usize,
    steps: usize,
    grad_output: f64,
) -> HeadGrads {
    let f = cache.pooled.len();
    let ds = grad_output * cache.output * (1.0 - cache.output);
    let mut gw = vec![0.0; pieces * f];
    let mut gb = vec![0.0; pieces];
    let a = cache.active;
    gb[a] = ds;
    for j in 0..f {
        gw[a * f + j] = ds * cache.pooled[j];
    }
    let per_step: Vec<f64> = (0..f).map(|j| ds * w[a * f + j] / steps as f64).collect();
    HeadGrads {
        input: vec![per_step; steps],
        w: gw,
        b: gb,
    }
}
