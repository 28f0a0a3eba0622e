use rand::Rng;

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
/// `1 / (1 - rate)`.
pub fn dropout_mask(n: usize, rate: f64, rng: &mut impl Rng) -> Vec<f64> {
    if rate == 0.0 {
        return vec![1.0; n];
    }
    let keep = 1.0 / (1.0 - rate);
    (0..n)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect()
}

/// Applies dropout in place and returns the mask (all ones in inference
/// mode or at rate 0).
pub fn dropout(values: &mut [f64], rate: f64, train: bool, rng: &mut impl Rng) -> Vec<f64> {
    if !train || rate == 0.0 {
        return vec![1.0; values.len()];
    }
    let mask = dropout_mask(values.len(), rate, rng);
    for (v, m) in values.iter_mut().zip(&mask) {
        *v *= m;
    }
    mask
}
