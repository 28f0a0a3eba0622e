//! 2-D convolution over (time, frequency) with "same" zero padding.
//!
//! Kernels are laid out `[ky][kx][cin][cout]`, odd square size.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub struct ConvGrads {
    pub input: Tensor,
    pub kernel: Vec<f64>,
    pub bias: Vec<f64>,
}

fn check(input: &Tensor, kernel: &[f64], bias: &[f64], size: usize) -> Result<usize> {
    let cin = input.channels();
    let cout = bias.len();
    if size % 2 == 0 || size == 0 {
        return Err(Error::Shape(format!("kernel size must be odd, got {size}")));
    }
    if kernel.len() != size * size * cin * cout {
        return Err(Error::Shape(format!(
            "conv kernel has {} values, expected {size}x{size}x{cin}x{cout} for a {cin}-channel input",
            kernel.len()
        )));
    }
    if input.time() == 0 || input.freq() == 0 {
        return Err(Error::Shape("conv input is empty".into()));
    }
    Ok(cout)
}

/// `dst += a * x`, unrolled for the common channel counts.
#[inline(always)]
fn axpy(dst: &mut [f64], a: f64, x: &[f64]) {
    fn fixed<const N: usize>(dst: &mut [f64], a: f64, x: &[f64]) {
        let dst: &mut [f64; N] = dst.try_into().expect("length checked");
        let x: &[f64; N] = x.try_into().expect("length checked");
        for i in 0..N {
            dst[i] += a * x[i];
        }
    }
    match dst.len() {
        4 => fixed::<4>(dst, a, x),
        8 => fixed::<8>(dst, a, x),
        16 => fixed::<16>(dst, a, x),
        _ => dst.iter_mut().zip(x).for_each(|(d, v)| *d += a * v),
    }
}

#[inline(always)]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    fn fixed<const N: usize>(a: &[f64], b: &[f64]) -> f64 {
        let a: &[f64; N] = a.try_into().expect("length checked");
        let b: &[f64; N] = b.try_into().expect("length checked");
        (0..N).map(|i| a[i] * b[i]).sum()
    }
    match a.len() {
        4 => fixed::<4>(a, b),
        8 => fixed::<8>(a, b),
        16 => fixed::<16>(a, b),
        _ => a.iter().zip(b).map(|(x, y)| x * y).sum(),
    }
}

/// Kernel offsets along one axis that land inside `0..len` for output
/// position `pos`.
#[inline(always)]
fn taps(pos: usize, len: usize, size: usize) -> std::ops::Range<usize> {
    let half = size / 2;
    half.saturating_sub(pos)..size.min(len + half - pos)
}

pub fn conv2d(input: &Tensor, kernel: &[f64], bias: &[f64], size: usize) -> Result<Tensor> {
    let cout = check(input, kernel, bias, size)?;
    let [t_len, f_len, cin] = input.shape();
    let half = size / 2;
    let mut out = Tensor::zeros([t_len, f_len, cout]);
    let x = input.data();
    let o = out.data_mut();
    for t in 0..t_len {
        for f in 0..f_len {
            let dst = &mut o[(t * f_len + f) * cout..(t * f_len + f + 1) * cout];
            dst.copy_from_slice(bias);
            for dy in taps(t, t_len, size) {
                let ti = t + dy - half;
                for dx in taps(f, f_len, size) {
                    let src = (ti * f_len + f + dx - half) * cin;
                    let kbase = (dy * size + dx) * cin * cout;
                    for ci in 0..cin {
                        let krow = &kernel[kbase + ci * cout..kbase + (ci + 1) * cout];
                        axpy(dst, x[src + ci], krow);
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn conv2d_backward(
    input: &Tensor,
    kernel: &[f64],
    grad_out: &Tensor,
    size: usize,
) -> Result<ConvGrads> {
    backward(input, kernel, grad_out, size, true)
}

/// Kernel and bias gradients only, for a layer whose input needs no gradient.
/// The returned `input` gradient is all zeros.
pub fn conv2d_backward_weights(
    input: &Tensor,
    kernel: &[f64],
    grad_out: &Tensor,
    size: usize,
) -> Result<ConvGrads> {
    backward(input, kernel, grad_out, size, false)
}

fn backward(
    input: &Tensor,
    kernel: &[f64],
    grad_out: &Tensor,
    size: usize,
    want_input: bool,
) -> Result<ConvGrads> {
    let [t_len, f_len, cin] = input.shape();
    let cout = grad_out.channels();
    if grad_out.shape() != [t_len, f_len, cout] || kernel.len() != size * size * cin * cout {
        return Err(Error::Shape(format!(
            "conv backward: input {:?}, grad {:?}, kernel {}",
            input.shape(),
            grad_out.shape(),
            kernel.len()
        )));
    }
    let half = size / 2;
    let mut grad_in = Tensor::zeros(input.shape());
    let mut grad_k = vec![0.0; kernel.len()];
    let mut grad_b = vec![0.0; cout];
    let x = input.data();
    let g = grad_out.data();
    let gi = grad_in.data_mut();
    for t in 0..t_len {
        for f in 0..f_len {
            let grow = &g[(t * f_len + f) * cout..(t * f_len + f + 1) * cout];
            axpy(&mut grad_b, 1.0, grow);
            for dy in taps(t, t_len, size) {
                let ti = t + dy - half;
                for dx in taps(f, f_len, size) {
                    let src = (ti * f_len + f + dx - half) * cin;
                    let kbase = (dy * size + dx) * cin * cout;
                    for ci in 0..cin {
                        let range = kbase + ci * cout..kbase + (ci + 1) * cout;
                        axpy(&mut grad_k[range.clone()], x[src + ci], grow);
                        if want_input {
                            gi[src + ci] += dot(&kernel[range], grow);
                        }
                    }
                }
            }
        }
    }
    Ok(ConvGrads {
        input: grad_in,
        kernel: grad_k,
        bias: grad_b,
    })
}
