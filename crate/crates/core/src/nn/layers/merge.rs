use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Elementwise product of two equally shaped maps.
pub fn merge_multiply(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "cannot merge maps of shape {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
    Tensor::from_vec(a.shape(), data)
}

/// Returns `(grad_a, grad_b) = (grad * b, grad * a)`.
pub fn merge_multiply_backward(a: &Tensor, b: &Tensor, grad: &Tensor) -> (Tensor, Tensor) {
    let ga = merge_multiply(grad, b).expect("shapes checked in forward");
    let gb = merge_multiply(grad, a).expect("shapes checked in forward");
    (ga, gb)
}
