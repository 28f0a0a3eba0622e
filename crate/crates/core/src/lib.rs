//! Bird audio detection.
//!
//! The pipeline turns 10 s mono clips into two feature classes (log mel-band
//! energies and interpolated dominant spectral peaks), feeds them through a
//! stacked convolutional + bidirectional GRU network, and scores clips for
//! bird-call presence. Training uses Adam on mean-squared error with early
//! stopping on validation ROC-AUC; blocks mixing and test mixing extend the
//! training set at the feature level.

pub mod audio;
pub mod augment;
pub mod cache;
pub mod error;
pub mod eval;
pub mod features;
pub mod manifest;
pub mod nn;
pub mod synth;
pub mod tensor;
pub mod train;

pub use audio::AudioClip;
pub use augment::{LabeledSample, Provenance};
pub use error::{Error, Result};
pub use features::{FeatureConfig, FeaturePair};
pub use manifest::{Label, Manifest, ManifestEntry};
pub use nn::{CbrnnConfig, CbrnnModel, FeatureSet, Mode};
pub use tensor::Tensor;
pub use train::{TrainConfig, TrainHistory};

/// Sample rate every clip must have before feature extraction.
pub const SAMPLE_RATE: u32 = 44_100;
/// Clip duration in seconds; shorter clips are zero-padded, longer truncated.
pub const CLIP_SECONDS: f64 = 10.0;
