use crate::audio::AudioClip;
use crate::error::{Error, Result};

use super::FeatureConfig;

/// Fixed-length frames cut from a clip, one row per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    pub frame_len: usize,
    pub data: Vec<f64>,
}

impl FrameMatrix {
    pub fn n_frames(&self) -> usize {
        self.data.len() / self.frame_len
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.frame_len..(t + 1) * self.frame_len]
    }
}

/// Cuts `len / hop` frames starting every `hop` samples. Frames running past
/// the end of the clip are completed with zeros, so a 10 s clip at 44.1 kHz
/// with a 20 ms hop gives exactly 500 frames.
pub fn frame_signal(clip: &AudioClip, cfg: &FeatureConfig) -> Result<FrameMatrix> {
    let frame_len = cfg.frame_len_samples(clip.sample_rate);
    let hop = cfg.hop_samples(clip.sample_rate);
    if hop == 0 {
        return Err(Error::Config("hop length is zero samples".into()));
    }
    if frame_len == 0 {
        return Err(Error::Config("frame length is zero samples".into()));
    }
    let n_frames = clip.samples.len() / hop;
    if n_frames == 0 {
        return Err(Error::InvalidClip {
            id: clip.id.clone(),
            reason: format!("{} samples is shorter than one hop ({hop})", clip.samples.len()),
        });
    }
    let mut data = vec![0.0; n_frames * frame_len];
    for (t, row) in data.chunks_exact_mut(frame_len).enumerate() {
        let start = t * hop;
        let end = (start + frame_len).min(clip.samples.len());
        row[..end - start].copy_from_slice(&clip.samples[start..end]);
    }
    Ok(FrameMatrix { frame_len, data })
}

/// Symmetric Hamming window, `0.54 - 0.46 cos(2 pi i / (n - 1))`.
pub fn hamming(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Config(format!("hamming window needs n >= 2, got {n}")));
    }
    let denom = (n - 1) as f64;
    let mut w: Vec<f64> = (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / denom).cos())
        .collect();
    // Mirror the first half so the window is exactly symmetric in floating point.
    for i in 0..n / 2 {
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        w[n / 2] = 1.0;
    }
    Ok(w)
}
