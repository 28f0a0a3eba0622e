//! Differentiable layer kernels. Each forward has a matching backward that
//! returns exact gradients; the unit tests check them against central
//! finite differences.

pub mod batchnorm;
pub mod conv;
pub mod dense;
pub mod dropout;
pub mod gru;
pub mod head;
pub mod merge;
pub mod pool;

pub use batchnorm::{batchnorm_backward, batchnorm_infer, batchnorm_train, BnCache, RunningStats};
pub use conv::{conv2d, conv2d_backward, conv2d_backward_weights};
pub use dense::{time_distributed_dense, time_distributed_dense_backward, Activation};
pub use dropout::{dropout, dropout_mask};
pub use gru::{bigru_backward, bigru_forward, gru_backward, gru_forward, GruParams};
pub use head::{maxout_sigmoid_head, maxout_sigmoid_head_backward};
pub use merge::{merge_multiply, merge_multiply_backward};
pub use pool::{maxpool2d, maxpool2d_backward};

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
