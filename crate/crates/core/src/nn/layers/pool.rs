use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Max pooling output plus, per output cell, the flat input index it came from.
pub struct Pooled {
    pub output: Tensor,
    pub argmax: Vec<usize>,
}

/// Non-overlapping max pooling over `pool_t x pool_f` blocks, per channel.
/// Ties go to the first maximal element in (time, frequency) scan order.
pub fn maxpool2d(input: &Tensor, pool_t: usize, pool_f: usize) -> Result<Pooled> {
    let [t_len, f_len, ch] = input.shape();
    if pool_t == 0 || t_len % pool_t != 0 {
        return Err(Error::Shape(format!(
            "time axis of length {t_len} is not divisible by pool factor {pool_t}"
        )));
    }
    if pool_f == 0 || f_len % pool_f != 0 {
        return Err(Error::Shape(format!(
            "frequency axis of length {f_len} is not divisible by pool factor {pool_f}"
        )));
    }
    let (ot, of) = (t_len / pool_t, f_len / pool_f);
    let mut output = Tensor::zeros([ot, of, ch]);
    let mut argmax = vec![0; ot * of * ch];
    for t in 0..ot {
        for f in 0..of {
            for c in 0..ch {
                let mut best = f64::NEG_INFINITY;
                let mut best_i = 0;
                for dt in 0..pool_t {
                    for df in 0..pool_f {
                        let i = input.index(t * pool_t + dt, f * pool_f + df, c);
                        let v = input.data()[i];
                        if v > best {
                            best = v;
                            best_i = i;
                        }
                    }
                }
                let o = output.index(t, f, c);
                output.data_mut()[o] = best;
                argmax[o] = best_i;
            }
        }
    }
    Ok(Pooled { output, argmax })
}

pub fn maxpool2d_backward(input_shape: [usize; 3], argmax: &[usize], grad_out: &Tensor) -> Tensor {
    let mut grad = Tensor::zeros(input_shape);
    let g = grad.data_mut();
    for (&src, &v) in argmax.iter().zip(grad_out.data()) {
        g[src] += v;
    }
    grad
}
