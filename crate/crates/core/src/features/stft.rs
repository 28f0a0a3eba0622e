use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

use super::framing::{hamming, FrameMatrix};

/// Magnitude spectrogram, one row of `bins` values per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub bins: usize,
    pub data: Vec<f64>,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.data.len() / self.bins
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.bins..(t + 1) * self.bins]
    }
}

/// Hamming-windowed, zero-padded FFT magnitudes for frames of a fixed length.
pub struct Stft {
    fft_size: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl Stft {
    pub fn new(frame_len: usize, fft_size: usize) -> Result<Self> {
        if frame_len > fft_size {
            return Err(Error::Config(format!(
                "frame length {frame_len} exceeds FFT size {fft_size}"
            )));
        }
        let window = hamming(frame_len)?;
        let fft = FftPlanner::new().plan_fft_forward(fft_size);
        Ok(Self {
            fft_size,
            window,
            fft,
        })
    }

    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Full complex spectrum of one windowed, zero-padded frame.
    pub fn spectrum(&self, frame: &[f64]) -> Vec<Complex<f64>> {
        let mut buf = vec![Complex::new(0.0, 0.0); self.fft_size];
        for ((b, &x), &w) in buf.iter_mut().zip(frame).zip(&self.window) {
            b.re = x * w;
        }
        self.fft.process(&mut buf);
        buf
    }

    pub fn magnitude(&self, frames: &FrameMatrix) -> Result<Spectrogram> {
        if frames.frame_len != self.window.len() {
            return Err(Error::Shape(format!(
                "frames of length {} but window of length {}",
                frames.frame_len,
                self.window.len()
            )));
        }
        let bins = self.bins();
        let mut data = Vec::with_capacity(frames.n_frames() * bins);
        for t in 0..frames.n_frames() {
            let spec = self.spectrum(frames.row(t));
            data.extend(spec[..bins].iter().map(|c| c.norm()));
        }
        Ok(Spectrogram { bins, data })
    }
}

pub fn stft_magnitude(frames: &FrameMatrix, fft_size: usize) -> Result<Spectrogram> {
    Stft::new(frames.frame_len, fft_size)?.magnitude(frames)
}
