//! Central finite-difference gradient checking.

use rand::Rng;

use crate::tensor::Tensor;

/// Default perturbation, scaled by `max(1, |x|)` per coordinate.
pub const STEP: f64 = 1e-5;

/// `||a - b|| / max(||a||, ||b||)`, or 0 when both are zero.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = norm(analytic).max(norm(numeric));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Like [`relative_error`] but never divides by less than `floor`, so
/// gradients that are analytically zero compare against rounding noise.
pub fn relative_error_with_floor(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = norm(analytic).max(norm(numeric)).max(floor);
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).powi(2))
        .sum::<f64>()
        .sqrt();
    diff / scale
}

pub fn numeric_gradient(mut f: impl FnMut(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = STEP * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn check_param_grad(f: impl FnMut(&[f64]) -> f64, x: &[f64], analytic: &[f64]) -> f64 {
    relative_error(analytic, &numeric_gradient(f, x))
}

pub fn check_input_grad(mut f: impl FnMut(&Tensor) -> f64, x: &Tensor, analytic: &Tensor) -> f64 {
    let shape = x.shape();
    let numeric = numeric_gradient(
        |v| f(&Tensor::from_vec(shape, v.to_vec()).expect("same shape")),
        x.data(),
    );
    relative_error(analytic.data(), &numeric)
}

pub fn random_vec(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn random_tensor(rng: &mut impl Rng, shape: [usize; 3], scale: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape, random_vec(rng, n, scale)).expect("sized")
}
