//! Gated recurrent units, one direction at a time, with backprop through time.
//!
//! Parameters per direction, gates stacked in (update, reset, candidate) order:
//! `w` is `3U x F` (input weights), `u` is `3U x U` (recurrent), `b` is `3U`.
//!
//! ```text
//! z = sigmoid(Wz x + Uz h + bz)
//! r = sigmoid(Wr x + Ur h + br)
//! c = tanh(Wc x + Uc (r * h) + bc)
//! h' = (1 - z) * h + z * c
//! ```

use crate::error::{Error, Result};

use super::sigmoid;

#[derive(Clone, Copy)]
pub struct GruParams<'a> {
    pub w: &'a [f64],
    pub u: &'a [f64],
    pub b: &'a [f64],
    pub units: usize,
    pub input: usize,
}

impl GruParams<'_> {
    fn check(&self) -> Result<()> {
        let (u, f) = (self.units, self.input);
        if self.w.len() != 3 * u * f || self.u.len() != 3 * u * u || self.b.len() != 3 * u {
            return Err(Error::Shape(format!(
                "GRU parameters do not match {u} units over {f} inputs"
            )));
        }
        Ok(())
    }
}

/// Per-step activations kept for the backward pass.
pub struct GruCache {
    h_prev: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    rh: Vec<Vec<f64>>,
}

pub struct GruGrads {
    pub input: Vec<Vec<f64>>,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

fn matvec_add(m: &[f64], rows: std::ops::Range<usize>, cols: usize, x: &[f64], out: &mut [f64]) {
    for (o, r) in out.iter_mut().zip(rows) {
        let row = &m[r * cols..(r + 1) * cols];
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Runs the sequence from `h0 = 0`, returning hidden states per step.
pub fn gru_forward(xs: &[Vec<f64>], p: GruParams) -> Result<(Vec<Vec<f64>>, GruCache)> {
    p.check()?;
    if xs.is_empty() {
        return Err(Error::Shape("GRU input sequence is empty".into()));
    }
    let (un, f) = (p.units, p.input);
    let mut h = vec![0.0; un];
    let mut outs = Vec::with_capacity(xs.len());
    let mut cache = GruCache {
        h_prev: Vec::new(),
        z: Vec::new(),
        r: Vec::new(),
        c: Vec::new(),
        rh: Vec::new(),
    };
    for x in xs {
        if x.len() != f {
            return Err(Error::Shape(format!("GRU expects {f} inputs per step, got {}", x.len())));
        }
        let mut z = p.b[..un].to_vec();
        let mut r = p.b[un..2 * un].to_vec();
        let mut c = p.b[2 * un..].to_vec();
        matvec_add(p.w, 0..un, f, x, &mut z);
        matvec_add(p.u, 0..un, un, &h, &mut z);
        matvec_add(p.w, un..2 * un, f, x, &mut r);
        matvec_add(p.u, un..2 * un, un, &h, &mut r);
        z.iter_mut().for_each(|v| *v = sigmoid(*v));
        r.iter_mut().for_each(|v| *v = sigmoid(*v));
        let rh: Vec<f64> = r.iter().zip(&h).map(|(a, b)| a * b).collect();
        matvec_add(p.w, 2 * un..3 * un, f, x, &mut c);
        matvec_add(p.u, 2 * un..3 * un, un, &rh, &mut c);
        c.iter_mut().for_each(|v| *v = v.tanh());
        let h_new: Vec<f64> = (0..un).map(|i| (1.0 - z[i]) * h[i] + z[i] * c[i]).collect();
        cache.h_prev.push(std::mem::replace(&mut h, h_new));
        cache.z.push(z);
        cache.r.push(r);
        cache.c.push(c);
        cache.rh.push(rh);
        outs.push(h.clone());
    }
    Ok((outs, cache))
}

/// Backprop through time given the loss gradient w.r.t. every output state.
pub fn gru_backward(xs: &[Vec<f64>], p: GruParams, cache: &GruCache, grad_out: &[Vec<f64>]) -> GruGrads {
    let (un, f) = (p.units, p.input);
    let mut gw = vec![0.0; p.w.len()];
    let mut gu = vec![0.0; p.u.len()];
    let mut gb = vec![0.0; p.b.len()];
    let mut gx = vec![vec![0.0; f]; xs.len()];
    let mut dh_next = vec![0.0; un];
    let mut da = vec![0.0; 3 * un];
    for t in (0..xs.len()).rev() {
        let (z, r, c, hp, rh) = (&cache.z[t], &cache.r[t], &cache.c[t], &cache.h_prev[t], &cache.rh[t]);
        let dh: Vec<f64> = grad_out[t].iter().zip(&dh_next).map(|(a, b)| a + b).collect();
        for i in 0..un {
            da[i] = dh[i] * (c[i] - hp[i]) * z[i] * (1.0 - z[i]);
            da[2 * un + i] = dh[i] * z[i] * (1.0 - c[i] * c[i]);
        }
        // gradient w.r.t. r*h through the candidate's recurrent weights
        let mut drh = vec![0.0; un];
        for i in 0..un {
            let row = &p.u[(2 * un + i) * un..(2 * un + i + 1) * un];
            for j in 0..un {
                drh[j] += row[j] * da[2 * un + i];
            }
        }
        for i in 0..un {
            da[un + i] = drh[i] * hp[i] * r[i] * (1.0 - r[i]);
        }
        let mut dh_prev: Vec<f64> = (0..un).map(|i| dh[i] * (1.0 - z[i]) + drh[i] * r[i]).collect();
        for g in 0..2 {
            for i in 0..un {
                let row = &p.u[(g * un + i) * un..(g * un + i + 1) * un];
                for j in 0..un {
                    dh_prev[j] += row[j] * da[g * un + i];
                }
            }
        }
        let x = &xs[t];
        for (k, &d) in da.iter().enumerate() {
            gb[k] += d;
            let wrow = &p.w[k * f..(k + 1) * f];
            for j in 0..f {
                gw[k * f + j] += d * x[j];
                gx[t][j] += wrow[j] * d;
            }
            let h_src = if k >= 2 * un { rh } else { hp };
            for j in 0..un {
                gu[k * un + j] += d * h_src[j];
            }
        }
        dh_next = dh_prev;
    }
    GruGrads {
        input: gx,
        w: gw,
        u: gu,
        b: gb,
    }
}

pub struct BiGruCache {
    fwd: GruCache,
    bwd: GruCache,
    reversed: Vec<Vec<f64>>,
}

pub struct BiGruGrads {
    pub input: Vec<Vec<f64>>,
    pub fwd: GruGrads,
    pub bwd: GruGrads,
}

/// Forward and time-reversed GRUs, outputs concatenated per step as
/// `[forward state, backward state]`.
pub fn bigru_forward(
    xs: &[Vec<f64>],
    fwd: GruParams,
    bwd: GruParams,
) -> Result<(Vec<Vec<f64>>, BiGruCache)> {
    let (hf, cf) = gru_forward(xs, fwd)?;
    let reversed: Vec<Vec<f64>> = xs.iter().rev().cloned().collect();
    let (mut hb, cb) = gru_forward(&reversed, bwd)?;
    hb.reverse();
    let out = hf
        .into_iter()
        .zip(hb)
        .map(|(mut a, b)| {
            a.extend(b);
            a
        })
        .collect();
    Ok((
        out,
        BiGruCache {
            fwd: cf,
            bwd: cb,
            reversed,
        },
    ))
}

pub fn bigru_backward(
    xs: &[Vec<f64>],
    fwd: GruParams,
    bwd: GruParams,
    cache: &BiGruCache,
    grad_out: &[Vec<f64>],
) -> BiGruGrads {
    let uf = fwd.units;
    let gf: Vec<Vec<f64>> = grad_out.iter().map(|g| g[..uf].to_vec()).collect();
    let gb_rev: Vec<Vec<f64>> = grad_out.iter().rev().map(|g| g[uf..].to_vec()).collect();
    let f = gru_backward(xs, fwd, &cache.fwd, &gf);
    let b = gru_backward(&cache.reversed, bwd, &cache.bwd, &gb_rev);
    let input = f
        .input
        .iter()
        .zip(b.input.iter().rev())
        .map(|(a, c)| a.iter().zip(c).map(|(x, y)| x + y).collect())
        .collect();
    BiGruGrads { input, fwd: f, bwd: b }
}
