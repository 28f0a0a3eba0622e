use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::stft::Spectrogram;

/// Settings for the per-frame peak tracker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPicking {
    pub k: usize,
    pub fmin: f64,
    pub fmax: f64,
    pub threshold_ratio: f64,
    pub fft_size: usize,
    pub sample_rate: u32,
}

/// Vertex of the parabola through `(−1, alpha)`, `(0, beta)`, `(1, gamma)`.
///
/// Returns the fractional bin offset in `[-0.5, 0.5]` for a true local
/// maximum and the value at the vertex. A flat triple yields offset 0.
pub fn parabolic_vertex(alpha: f64, beta: f64, gamma: f64) -> (f64, f64) {
    let denom = alpha - 2.0 * beta + gamma;
    let p = if denom == 0.0 {
        0.0
    } else {
        0.5 * (alpha - gamma) / denom
    };
    (p, beta - 0.25 * (alpha - gamma) * p)
}

#[derive(Debug, Clone, Copy)]
struct Peak {
    freq: f64,
    mag: f64,
}

/// Top-`k` interpolated spectral peaks per frame, shaped `(frames, k, 2)`
/// with channel 0 = frequency in Hz and channel 1 = linear magnitude.
///
/// Candidates are bins with `X[k-1] < X[k] >= X[k+1]`, at least
/// `threshold_ratio` of the frame maximum, and whose interpolated frequency
/// falls inside `[fmin, fmax]`. Interpolation is done on natural-log
/// magnitudes. Slots are ordered by descending magnitude; unused slots are
/// `(0, 0)`.
pub fn dominant_frequencies(spec: &Spectrogram, cfg: &PeakPicking) -> Result<Tensor> {
    let nyquist = cfg.sample_rate as f64 / 2.0;
    if !(0.0 <= cfg.fmin && cfg.fmin < cfg.fmax && cfg.fmax <= nyquist) {
        return Err(Error::Config(format!(
            "dominant-frequency band [{}, {}] Hz must lie within [0, {nyquist}]",
            cfg.fmin, cfg.fmax
        )));
    }
    if cfg.k == 0 {
        return Err(Error::Config("dominant-frequency slot count must be >= 1".into()));
    }
    if spec.bins != cfg.fft_size / 2 + 1 {
        return Err(Error::Shape(format!(
            "spectrogram has {} bins but fft size is {}",
            spec.bins, cfg.fft_size
        )));
    }
    let bin_hz = cfg.sample_rate as f64 / cfg.fft_size as f64;
    // Interpolation moves a peak by at most half a bin.
    let first = ((cfg.fmin / bin_hz - 0.5).floor().max(1.0)) as usize;
    let last = ((cfg.fmax / bin_hz + 0.5).ceil() as usize).min(spec.bins - 2);
    let ln = |m: f64| m.max(f64::MIN_POSITIVE).ln();

    let frames = spec.n_frames();
    let mut out = Tensor::zeros([frames, cfg.k, 2]);
    let mut peaks: Vec<Peak> = Vec::new();
    for t in 0..frames {
        let row = spec.row(t);
        let floor = cfg.threshold_ratio * row.iter().cloned().fold(0.0, f64::max);
        peaks.clear();
        for k in first..=last {
            let (a, b, c) = (row[k - 1], row[k], row[k + 1]);
            if !(a < b && b >= c) || b < floor {
                continue;
            }
            let (p, log_mag) = parabolic_vertex(ln(a), ln(b), ln(c));
            let freq = (k as f64 + p) * bin_hz;
            if freq < cfg.fmin || freq > cfg.fmax {
                continue;
            }
            peaks.push(Peak {
                freq,
                mag: log_mag.exp(),
            });
        }
        peaks.sort_by(|x, y| y.mag.total_cmp(&x.mag));
        for (slot, peak) in peaks.iter().take(cfg.k).enumerate() {
            out.set(t, slot, 0, peak.freq);
            out.set(t, slot, 1, peak.mag);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_triple_has_zero_offset() {
        assert_eq!(parabolic_vertex(2.0, 2.0, 2.0), (0.0, 2.0));
    }

    proptest! {
        #[test]
        fn exact_on_parabolas(
            a in -10.0f64..-0.1,
            vertex in -0.5f64..0.5,
            peak in -20.0f64..20.0,
        ) {
            let y = |x: f64| a * (x - vertex).powi(2) + peak;
            let (p, v) = parabolic_vertex(y(-1.0), y(0.0), y(1.0));
            prop_assert!((p - vertex).abs() < 1e-12);
            prop_assert!((v - peak).abs() < 1e-12);
        }
    }

    #[test]
    fn silence_has_no_peaks() {
        let spec = Spectrogram { bins: 1025, data: vec![0.0; 4 * 1025] };
        let cfg = PeakPicking {
            k: 3,
            fmin: 500.0,
            fmax: 8000.0,
            threshold_ratio: 0.1,
            fft_size: 2048,
            sample_rate: 44_100,
        };
        let out = dominant_frequencies(&spec, &cfg).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn band_outside_nyquist_rejected() {
        let spec = Spectrogram { bins: 1025, data: vec![0.0; 1025] };
        let cfg = PeakPicking {
            k: 3,
            fmin: 500.0,
            fmax: 30_000.0,
            threshold_ratio: 0.1,
            fft_size: 2048,
            sample_rate: 44_100,
        };
        assert!(dominant_frequencies(&spec, &cfg).is_err());
    }
}
