//! Network building blocks, the full model, and checkpointing.

pub mod checkpoint;
pub mod config;
pub mod gradcheck;
pub mod layers;
pub mod model;
pub mod params;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use config::{CbrnnConfig, FeatureSet};
pub use model::{build_model, CbrnnModel, ForwardCache, Mode};
pub use params::{ParamGroup, ParamId, ParamStore};
