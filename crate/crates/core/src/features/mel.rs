use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::stft::Spectrogram;

/// Floor added before the log so silent frames stay finite.
pub const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters with centres evenly spaced in mel, each scaled to unit
/// total weight so a flat power spectrum gives equal energy in every band.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    pub n_mels: usize,
    pub bins: usize,
    /// `n_mels + 2` breakpoints in Hz: lower edge, centres, upper edge.
    pub edges_hz: Vec<f64>,
    /// Row-major `n_mels x bins`.
    pub weights: Vec<f64>,
}

impl MelFilterbank {
    pub fn row(&self, m: usize) -> &[f64] {
        &self.weights[m * self.bins..(m + 1) * self.bins]
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.edges_hz[1..=self.n_mels]
    }
}

pub fn mel_filterbank(
    n_mels: usize,
    fmin: f64,
    fmax: f64,
    fft_size: usize,
    sample_rate: u32,
) -> Result<MelFilterbank> {
    let nyquist = sample_rate as f64 / 2.0;
    if !(0.0 <= fmin && fmin < fmax && fmax <= nyquist) {
        return Err(Error::Config(format!(
            "mel band [{fmin}, {fmax}] Hz must satisfy 0 <= fmin < fmax <= {nyquist}"
        )));
    }
    if n_mels == 0 {
        return Err(Error::Config("n_mels must be positive".into()));
    }
    let bins = fft_size / 2 + 1;
    let (lo, hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
    let step = (hi - lo) / (n_mels + 1) as f64;
    let edges_hz: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(lo + step * i as f64))
        .collect();
    let bin_hz = sample_rate as f64 / fft_size as f64;

    let mut weights = vec![0.0; n_mels * bins];
    for m in 0..n_mels {
        let (left, centre, right) = (edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]);
        let row = &mut weights[m * bins..(m + 1) * bins];
        for (k, w) in row.iter_mut().enumerate() {
            let f = k as f64 * bin_hz;
            let rise = (f - left) / (centre - left);
            let fall = (right - f) / (right - centre);
            *w = rise.min(fall).max(0.0);
        }
        let total: f64 = row.iter().sum();
        if total == 0.0 {
            return Err(Error::Config(format!(
                "mel band {m} ({left:.1}-{right:.1} Hz) covers no FFT bin; \
                 too few FFT bins for {n_mels} bands in [{fmin}, {fmax}] Hz"
            )));
        }
        row.iter_mut().for_each(|w| *w /= total);
    }
    Ok(MelFilterbank {
        n_mels,
        bins,
        edges_hz,
        weights,
    })
}

/// `log(eps + sum_k w[m,k] * |X[t,k]|^2)` for every frame and band, shaped
/// `(frames, n_mels, 1)`.
pub fn log_mel_energies(spec: &Spectrogram, fb: &MelFilterbank) -> Result<Tensor> {
    if spec.bins != fb.bins {
        return Err(Error::Shape(format!(
            "spectrogram has {} bins, filterbank expects {}",
            spec.bins, fb.bins
        )));
    }
    let frames = spec.n_frames();
    let mut out = Vec::with_capacity(frames * fb.n_mels);
    let mut power = vec![0.0; spec.bins];
    for t in 0..frames {
        for (p, &m) in power.iter_mut().zip(spec.row(t)) {
            *p = m * m;
        }
        for m in 0..fb.n_mels {
            let e: f64 = fb.row(m).iter().zip(&power).map(|(w, p)| w * p).sum();
            out.push((LOG_FLOOR + e).ln());
        }
    }
    Tensor::from_vec([frames, fb.n_mels, 1], out)
}
