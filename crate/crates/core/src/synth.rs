//! Synthetic clips for end-to-end checks: white noise, plus short tone
//! bursts in the 2 to 6 kHz range when a "call" is present.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::audio::{write_wav_pcm16, AudioClip};
use crate::error::{Error, Result};
use crate::manifest::{Label, Manifest, ManifestEntry};
use crate::{CLIP_SECONDS, SAMPLE_RATE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub noise_std: f64,
    pub tone_amplitude: f64,
    pub bursts: (usize, usize),
    /// Burst length range in seconds.
    pub burst_secs: (f64, f64),
    pub freq_hz: (f64, f64),
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            noise_std: 0.05,
            tone_amplitude: 0.1,
            bursts: (3, 8),
            burst_secs: (0.08, 0.3),
            freq_hz: (2000.0, 6000.0),
        }
    }
}

/// One 10 s clip at the pipeline sample rate.
pub fn synth_clip(id: &str, present: bool, cfg: &SynthConfig, rng: &mut impl Rng) -> Result<AudioClip> {
    let sr = f64::from(SAMPLE_RATE);
    let n = (CLIP_SECONDS * sr) as usize;
    let noise = Normal::new(0.0, cfg.noise_std)
        .map_err(|e| Error::Config(format!("noise_std {}: {e}", cfg.noise_std)))?;
    let mut samples: Vec<f64> = (0..n).map(|_| noise.sample(rng)).collect();
    if present {
        let count = rng.gen_range(cfg.bursts.0..=cfg.bursts.1);
        for _ in 0..count {
            let len = (rng.gen_range(cfg.burst_secs.0..cfg.burst_secs.1) * sr) as usize;
            let start = rng.gen_range(0..n - len);
            let f0 = rng.gen_range(cfg.freq_hz.0..cfg.freq_hz.1);
            // a gentle sweep of up to ±10 % over the burst
            let f1 = (f0 * rng.gen_range(0.9..1.1)).clamp(cfg.freq_hz.0, cfg.freq_hz.1);
            let mut phase = 0.0;
            for i in 0..len {
                let frac = i as f64 / len as f64;
                let env = (PI * frac).sin().powi(2);
                phase += 2.0 * PI * (f0 + (f1 - f0) * frac) / sr;
                samples[start + i] += cfg.tone_amplitude * env * phase.sin();
            }
        }
    }
    AudioClip::new(id, samples, SAMPLE_RATE)
}

/// `n` clips with ids `clip0000`, ... and alternating labels (even indices
/// present), generated from `seed`.
pub fn synth_corpus(n: usize, seed: u64, cfg: &SynthConfig) -> Result<Vec<(AudioClip, Label)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let present = i % 2 == 0;
            let label = if present { Label::Present } else { Label::Absent };
            Ok((synth_clip(&format!("clip{i:04}"), present, cfg, &mut rng)?, label))
        })
        .collect()
}

/// Writes a synthetic corpus as 16-bit WAV files under `dir` and returns its
/// labeled manifest (also written to `dir/labels.csv`).
pub fn write_synth_corpus(dir: &Path, n: usize, seed: u64, cfg: &SynthConfig) -> Result<Manifest> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = Manifest::default();
    for (clip, label) in synth_corpus(n, seed, cfg)? {
        let path = dir.join(format!("{}.wav", clip.id));
        write_wav_pcm16(&path, &clip.samples, clip.sample_rate)?;
        manifest.entries.push(ManifestEntry {
            clip_id: clip.id,
            label,
            path: Some(path),
        });
    }
    manifest.write_csv(dir.join("labels.csv"))?;
    Ok(manifest)
}
