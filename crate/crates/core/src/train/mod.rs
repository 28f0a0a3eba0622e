//! Adam on mean-squared error with epoch-level early stopping on validation
//! AUC.

pub mod adam;
pub mod loss;
pub mod trainer;

pub use adam::{Adam, AdamConfig};
pub use loss::mse_loss;
pub use trainer::{train, train_with_monitor, validation_auc, EpochRecord, TrainConfig, TrainHistory};
