//! Log mel-band energy and dominant-frequency features.
//!
//! Both feature classes share one framing (40 ms Hamming frames, 20 ms hop)
//! and one magnitude STFT, so they always agree on the frame count.

mod domfreq;
mod framing;
mod mel;
mod stft;

use serde::{Deserialize, Serialize};

pub use domfreq::{dominant_frequencies, parabolic_vertex, PeakPicking};
pub use framing::{frame_signal, hamming, FrameMatrix};
pub use mel::{hz_to_mel, log_mel_energies, mel_filterbank, mel_to_hz, MelFilterbank, LOG_FLOOR};
pub use stft::{stft_magnitude, Spectrogram, Stft};

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub fmin: f64,
    pub fmax: f64,
}

/// The band used by the band-limited variant for both feature classes.
pub const BAND_LIMITED: Band = Band {
    fmin: 3000.0,
    fmax: 8000.0,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub frame_len_ms: f64,
    pub hop_ms: f64,
    pub fft_size: usize,
    pub n_mels: usize,
    pub mel_fmin: f64,
    pub mel_fmax: f64,
    pub domfreq_k: usize,
    pub domfreq_fmin: f64,
    pub domfreq_fmax: f64,
    pub peak_threshold_ratio: f64,
    /// Overrides both bands when set.
    pub band_limited: Option<Band>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            frame_len_ms: 40.0,
            hop_ms: 20.0,
            fft_size: 2048,
            n_mels: 40,
            mel_fmin: 0.0,
            mel_fmax: 22_050.0,
            domfreq_k: 3,
            domfreq_fmin: 500.0,
            domfreq_fmax: 8000.0,
            peak_threshold_ratio: 0.1,
            band_limited: None,
        }
    }
}

impl FeatureConfig {
    pub fn band_limited() -> Self {
        Self {
            band_limited: Some(BAND_LIMITED),
            ..Self::default()
        }
    }

    pub fn frame_len_samples(&self, sample_rate: u32) -> usize {
        (self.frame_len_ms * sample_rate as f64 / 1000.0).round() as usize
    }

    pub fn hop_samples(&self, sample_rate: u32) -> usize {
        (self.hop_ms * sample_rate as f64 / 1000.0).round() as usize
    }

    pub fn mel_band(&self) -> Band {
        self.band_limited.unwrap_or(Band {
            fmin: self.mel_fmin,
            fmax: self.mel_fmax,
        })
    }

    pub fn domfreq_band(&self) -> Band {
        self.band_limited.unwrap_or(Band {
            fmin: self.domfreq_fmin,
            fmax: self.domfreq_fmax,
        })
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        for (name, band) in [("mel", self.mel_band()), ("dominant-frequency", self.domfreq_band())] {
            if !(0.0 <= band.fmin && band.fmin < band.fmax && band.fmax <= nyquist) {
                return Err(Error::Config(format!(
                    "{name} band [{}, {}] Hz must satisfy 0 <= fmin < fmax <= {nyquist}",
                    band.fmin, band.fmax
                )));
            }
        }
        let frame = self.frame_len_samples(sample_rate);
        if frame < 2 || frame > self.fft_size {
            return Err(Error::Config(format!(
                "frame length {frame} samples must be in [2, fft_size={}]",
                self.fft_size
            )));
        }
        if self.hop_samples(sample_rate) == 0 {
            return Err(Error::Config("hop length is zero samples".into()));
        }
        if self.domfreq_k == 0 {
            return Err(Error::Config("domfreq_k must be >= 1".into()));
        }
        if self.n_mels == 0 {
            return Err(Error::Config("n_mels must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.peak_threshold_ratio) {
            return Err(Error::Config("peak_threshold_ratio must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// The two network inputs for one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePair {
    pub clip_id: String,
    /// `(T, n_mels, 1)` log mel-band energies.
    pub mbe: Tensor,
    /// `(T, K, 2)`: channel 0 frequency in Hz, channel 1 magnitude.
    pub domfreq: Tensor,
}

impl FeaturePair {
    pub fn new(clip_id: impl Into<String>, mbe: Tensor, domfreq: Tensor) -> Result<Self> {
        if mbe.time() != domfreq.time() {
            return Err(Error::Shape(format!(
                "mbe has {} frames, domfreq has {}",
                mbe.time(),
                domfreq.time()
            )));
        }
        if mbe.channels() != 1 {
            return Err(Error::Shape(format!("mbe must have 1 channel, got {}", mbe.channels())));
        }
        if domfreq.channels() != 2 {
            return Err(Error::Shape(format!(
                "domfreq must have 2 channels, got {}",
                domfreq.channels()
            )));
        }
        if !mbe.all_finite() || !domfreq.all_finite() {
            return Err(Error::Shape("features contain non-finite values".into()));
        }
        Ok(Self {
            clip_id: clip_id.into(),
            mbe,
            domfreq,
        })
    }

    pub fn frames(&self) -> usize {
        self.mbe.time()
    }

    pub fn slots(&self) -> usize {
        self.domfreq.freq()
    }
}

/// Reusable extractor holding the window, FFT plan and filterbank.
pub struct FeatureExtractor {
    cfg: FeatureConfig,
    sample_rate: u32,
    stft: Stft,
    filterbank: MelFilterbank,
}

impl FeatureExtractor {
    pub fn new(cfg: FeatureConfig, sample_rate: u32) -> Result<Self> {
        cfg.validate(sample_rate)?;
        let stft = Stft::new(cfg.frame_len_samples(sample_rate), cfg.fft_size)?;
        let band = cfg.mel_band();
        let filterbank = mel_filterbank(cfg.n_mels, band.fmin, band.fmax, cfg.fft_size, sample_rate)?;
        Ok(Self {
            cfg,
            sample_rate,
            stft,
            filterbank,
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.cfg
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    pub fn peak_picking(&self) -> PeakPicking {
        let band = self.cfg.domfreq_band();
        PeakPicking {
            k: self.cfg.domfreq_k,
            fmin: band.fmin,
            fmax: band.fmax,
            threshold_ratio: self.cfg.peak_threshold_ratio,
            fft_size: self.cfg.fft_size,
            sample_rate: self.sample_rate,
        }
    }

    pub fn spectrogram(&self, clip: &AudioClip) -> Result<Spectrogram> {
        if clip.sample_rate != self.sample_rate {
            return Err(Error::SampleRate {
                id: clip.id.clone(),
                expected: self.sample_rate,
                actual: clip.sample_rate,
            });
        }
        let frames = frame_signal(clip, &self.cfg)?;
        self.stft.magnitude(&frames)
    }

    pub fn extract(&self, clip: &AudioClip) -> Result<FeaturePair> {
        let spec = self.spectrogram(clip)?;
        let mbe = log_mel_energies(&spec, &self.filterbank)?;
        let domfreq = dominant_frequencies(&spec, &self.peak_picking())?;
        FeaturePair::new(clip.id.clone(), mbe, domfreq)
    }
}

pub fn extract_features(clip: &AudioClip, cfg: &FeatureConfig) -> Result<FeaturePair> {
    FeatureExtractor::new(cfg.clone(), clip.sample_rate)?.extract(clip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tones(parts: &[(f64, f64)]) -> AudioClip {
        let samples = (0..441_000)
            .map(|n| {
                let t = n as f64 / 44_100.0;
                parts.iter().map(|(f, a)| a * (2.0 * PI * f * t).sin()).sum()
            })
            .collect();
        AudioClip::new("tone", samples, 44_100).unwrap()
    }

    #[test]
    fn silence_features() {
        let clip = AudioClip::new("s", vec![0.0; 441_000], 44_100).unwrap();
        let pair = extract_features(&clip, &FeatureConfig::default()).unwrap();
        assert_eq!(pair.mbe.shape(), [500, 40, 1]);
        assert_eq!(pair.domfreq.shape(), [500, 3, 2]);
        assert!(pair.mbe.data().iter().all(|&v| v == LOG_FLOOR.ln()));
        assert!(pair.domfreq.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pure_tone_recovered() {
        let pair = extract_features(&tones(&[(3000.0, 0.5)]), &FeatureConfig::default()).unwrap();
        for t in 0..499 {
            assert!((pair.domfreq.get(t, 0, 0) - 3000.0).abs() < 5.0);
            for slot in 1..3 {
                assert_eq!(pair.domfreq.get(t, slot, 0), 0.0);
                assert_eq!(pair.domfreq.get(t, slot, 1), 0.0);
            }
        }
    }

    #[test]
    fn two_tones_ordered_by_magnitude() {
        let pair = extract_features(&tones(&[(1000.0, 0.2), (4000.0, 0.4)]), &FeatureConfig::default())
            .unwrap();
        for t in 0..499 {
            assert!((pair.domfreq.get(t, 0, 0) - 4000.0).abs() < 5.0);
            assert!((pair.domfreq.get(t, 1, 0) - 1000.0).abs() < 5.0);
            assert!(pair.domfreq.get(t, 0, 1) > pair.domfreq.get(t, 1, 1));
        }
    }

    #[test]
    fn band_limited_confines_both_features() {
        let cfg = FeatureConfig::band_limited();
        let ex = FeatureExtractor::new(cfg, 44_100).unwrap();
        let fb = ex.filterbank();
        assert!((fb.edges_hz[0] - 3000.0).abs() < 1e-6);
        assert!((fb.edges_hz[41] - 8000.0).abs() < 1e-6);
        let bin_hz = 44_100.0 / 2048.0;
        for m in 0..40 {
            for (k, &w) in fb.row(m).iter().enumerate() {
                if w > 0.0 {
                    let f = k as f64 * bin_hz;
                    assert!((3000.0..=8000.0).contains(&f));
                }
            }
        }
        // A 1 kHz tone is outside the band and yields no peaks.
        let pair = ex.extract(&tones(&[(1000.0, 0.5), (5000.0, 0.1)])).unwrap();
        for t in 0..499 {
            let f = pair.domfreq.get(t, 0, 0);
            assert!((f - 5000.0).abs() < 5.0, "frame {t}: {f}");
            assert_eq!(pair.domfreq.get(t, 1, 0), 0.0);
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = FeatureConfig {
            mel_fmax: 30_000.0,
            ..FeatureConfig::default()
        };
        assert!(bad.validate(44_100).is_err());
        let bad = FeatureConfig {
            fft_size: 1024,
            ..FeatureConfig::default()
        };
        assert!(bad.validate(44_100).is_err());
        let bad = FeatureConfig {
            domfreq_k: 0,
            ..FeatureConfig::default()
        };
        assert!(bad.validate(44_100).is_err());
    }
}
