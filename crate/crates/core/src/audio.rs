//! PCM WAV decoding into normalized mono clips.

use std::path::Path;

use crate::error::{Error, Result};

/// A decoded mono recording.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub id: String,
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioClip {
    pub fn new(id: impl Into<String>, samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let id = id.into();
        if samples.is_empty() {
            return Err(Error::InvalidClip {
                id,
                reason: "no samples".into(),
            });
        }
        if sample_rate == 0 {
            return Err(Error::InvalidClip {
                id,
                reason: "sample rate is zero".into(),
            });
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidClip {
                id,
                reason: format!("non-finite sample at index {i}"),
            });
        }
        Ok(Self {
            id,
            samples,
            sample_rate,
        })
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Zero-pads at the end or truncates so the clip lasts exactly `seconds`.
    pub fn fit_to_duration(mut self, seconds: f64) -> Self {
        let target = (seconds * self.sample_rate as f64).round() as usize;
        self.samples.resize(target, 0.0);
        self
    }
}

/// Checks the sample rate and fits the clip to the fixed network input length.
pub fn prepare_clip(clip: AudioClip) -> Result<AudioClip> {
    if clip.sample_rate != crate::SAMPLE_RATE {
        return Err(Error::SampleRate {
            id: clip.id,
            expected: crate::SAMPLE_RATE,
            actual: clip.sample_rate,
        });
    }
    Ok(clip.fit_to_duration(crate::CLIP_SECONDS))
}

/// Decodes an integer PCM (8 to 32 bit) or 32-bit float WAV file.
///
/// Integer samples are divided by `2^(bits-1)` so the most negative code maps
/// to exactly -1. Multichannel frames are averaged to mono. The clip id is the
/// file stem.
pub fn decode_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::WavDecode {
            path: path.to_path_buf(),
            field: "fmt.channels",
            detail: "zero channels".into(),
        });
    }

    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Int => {
            if spec.bits_per_sample == 0 || spec.bits_per_sample > 32 {
                return Err(Error::UnsupportedFormat {
                    path: path.to_path_buf(),
                    detail: format!("{}-bit integer PCM", spec.bits_per_sample),
                });
            }
            let scale = (1u64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| map_hound(path, e))?
        }
        hound::SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(Error::UnsupportedFormat {
                    path: path.to_path_buf(),
                    detail: format!("{}-bit float PCM", spec.bits_per_sample),
                });
            }
            reader
                .into_samples::<f32>()
                .map(|s| s.map(f64::from))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| map_hound(path, e))?
        }
    };

    let samples: Vec<f64> = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };

    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    AudioClip::new(id, samples, spec.sample_rate)
}

fn map_hound(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::WavDecode {
                path: path.to_path_buf(),
                field: "data",
                detail: "file ends inside a chunk".into(),
            }
        }
        hound::Error::IoError(e) => Error::io(path, e),
        hound::Error::FormatError(msg) => Error::WavDecode {
            path: path.to_path_buf(),
            field: header_field(msg),
            detail: msg.to_string(),
        },
        hound::Error::UnfinishedSample => Error::WavDecode {
            path: path.to_path_buf(),
            field: "data",
            detail: "data chunk ends mid-sample".into(),
        },
        hound::Error::Unsupported => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "encoding not supported (only PCM integer and 32-bit float)".into(),
        },
        hound::Error::InvalidSampleFormat => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "sample format does not match bit depth".into(),
        },
        hound::Error::TooWide => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "sample width exceeds 32 bits".into(),
        },
    }
}

fn header_field(msg: &str) -> &'static str {
    let lower = msg.to_ascii_lowercase();
    if lower.contains("riff") {
        "RIFF"
    } else if lower.contains("wave") {
        "WAVE"
    } else if lower.contains("fmt") || lower.contains("format") {
        "fmt"
    } else if lower.contains("data") {
        "data"
    } else if lower.contains("bits") {
        "fmt.bits_per_sample"
    } else {
        "header"
    }
}

/// Writes 16-bit mono PCM, clipping to [-1, 1]. Used to produce fixtures and
/// synthetic corpora.
pub fn write_wav_pcm16(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for &s in samples {
        let v = (s.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(|e| map_hound(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound(path, e))
}
