//! The epoch loop.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::augment::LabeledSample;
use crate::error::{Error, Result};
use crate::eval::roc_auc;
use crate::features::FeaturePair;
use crate::nn::{CbrnnModel, Mode};

use super::adam::{Adam, AdamConfig};
use super::loss::mse_loss;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_epochs: usize,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 500,
            patience: 50,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be positive".into()));
        }
        if self.patience >= self.max_epochs {
            return Err(Error::Config(format!(
                "patience {} must be below max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if self.batch_size < 2 {
            return Err(Error::Config(format!(
                "batch_size {} is below 2, the batch-norm minimum",
                self.batch_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_auc: f64,
}

impl TrainHistory {
    /// `epoch,loss,val_auc`, one row per epoch.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let err = |e: csv::Error| Error::Training(format!("writing {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(err)?;
        w.write_record(["epoch", "loss", "val_auc"]).map_err(err)?;
        for r in &self.epochs {
            w.write_record([r.epoch.to_string(), format!("{}", r.train_loss), format!("{}", r.val_auc)])
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn labels_of(set: &[LabeledSample], what: &str) -> Result<Vec<bool>> {
    set.iter()
        .map(|s| match s.label.target() {
            Some(t) => Ok(t == 1.0),
            None => Err(Error::Training(format!("{what} clip `{}` has no label", s.id()))),
        })
        .collect()
}

/// Infer-mode ROC-AUC of `model` on a labeled set.
pub fn validation_auc(model: &CbrnnModel, set: &[LabeledSample]) -> Result<f64> {
    let labels = labels_of(set, "validation")?;
    let pairs: Vec<&FeaturePair> = set.iter().map(|s| &s.features).collect();
    let scores = model.predict_refs(&pairs)?;
    Ok(roc_auc(&scores, &labels)?.auc)
}

/// Trains with early stopping on validation AUC and returns the best-scoring
/// snapshot. Fails before any update if the validation set is single-class.
pub fn train(
    model: CbrnnModel,
    train_set: &[LabeledSample],
    val_set: &[LabeledSample],
    cfg: &TrainConfig,
) -> Result<(CbrnnModel, TrainHistory)> {
    let labels = labels_of(val_set, "validation")?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(Error::Training(format!(
            "validation AUC is undefined: {n_pos} of {} validation clips are present",
            labels.len()
        )));
    }
    train_with_monitor(model, train_set, cfg, |m, _| validation_auc(m, val_set))
}

/// The training loop with an arbitrary per-epoch score in place of validation
/// AUC; `monitor` sees the model after each epoch and its 1-based index.
pub fn train_with_monitor(
    mut model: CbrnnModel,
    train_set: &[LabeledSample],
    cfg: &TrainConfig,
    mut monitor: impl FnMut(&CbrnnModel, usize) -> Result<f64>,
) -> Result<(CbrnnModel, TrainHistory)> {
    cfg.validate()?;
    if train_set.len() < 2 {
        return Err(Error::Training(format!(
            "training needs at least 2 clips, got {}",
            train_set.len()
        )));
    }
    let targets: Vec<f64> = labels_of(train_set, "training")?
        .into_iter()
        .map(f64::from)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(model.params(), cfg.adam);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = TrainHistory {
        best_val_auc: f64::NEG_INFINITY,
        ..TrainHistory::default()
    };
    let mut best = model.clone();

    for epoch in 1..=cfg.max_epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size).filter(|c| c.len() >= 2) {
            let batch: Vec<&FeaturePair> = chunk.iter().map(|&i| &train_set[i].features).collect();
            let y: Vec<f64> = chunk.iter().map(|&i| targets[i]).collect();
            let cache = model.forward(&batch, Mode::Train, &mut rng)?;
            let (loss, grad) = mse_loss(&cache.outputs, &y)?;
            let grads = model.backward(&cache, &grad)?;
            adam.step(model.params_mut(), &grads)?;
            model.update_running_stats(&cache);
            loss_sum += loss;
            batches += 1;
        }
        let score = monitor(&model, epoch)?;
        if score.is_nan() {
            return Err(Error::Training(format!("validation score is NaN at epoch {epoch}")));
        }
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / batches as f64,
            val_auc: score,
        });
        if score > history.best_val_auc {
            history.best_val_auc = score;
            history.best_epoch = epoch;
            best = model.clone();
        } else if epoch - history.best_epoch >= cfg.patience {
            break;
        }
    }
    Ok((best, history))
}
