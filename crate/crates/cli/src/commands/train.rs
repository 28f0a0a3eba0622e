//! `birdcall train`: cross-validated training with optional mixing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use birdcall::augment::{augment_blocks, save_provenance, test_mixes, widen_domfreq, LabeledSample};
use birdcall::eval::{stratified_splits, Fold};
use birdcall::nn::build_model;
use birdcall::nn::checkpoint::save_checkpoint;
use birdcall::train::{train, validation_auc};
use birdcall::{CbrnnConfig, CbrnnModel, FeaturePair, Manifest, TrainHistory};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Protocol, ProtocolArgs};
use crate::config::{derive_seed, existing_path, output_path, ConfigArgs, RunConfig};
use crate::store;

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Labeled `itemid,hasbird` CSV.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Feature cache written by `extract`.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Output directory for checkpoints, histories and summaries.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Double the training set by mixing clip pairs.
    #[arg(long)]
    pub blocks_mixing: bool,
    /// Mix each present-labeled training clip with one test clip.
    #[arg(long)]
    pub test_mixing: bool,
    /// Permit blocks mixing and test mixing together.
    #[arg(long)]
    pub allow_combined: bool,
    /// Unlabeled test clips (cached in the same feature store) for test mixing.
    #[arg(long)]
    pub test_manifest: Option<PathBuf>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
}

impl TrainArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.augment.blocks_mixing |= self.blocks_mixing;
        cfg.augment.test_mixing |= self.test_mixing;
        cfg.augment.allow_combined |= self.allow_combined;
        if let Some(v) = self.max_epochs {
            cfg.train.max_epochs = v;
        }
        if let Some(v) = self.patience {
            cfg.train.patience = v;
        }
        if let Some(v) = self.batch_size {
            cfg.train.batch_size = v;
        }
        if self.test_manifest.is_some() {
            cfg.paths.test_manifest = self.test_manifest.clone();
        }
    }
}

/// The network config implied by the run: mixing widens the
/// dominant-frequency input to twice the extracted slot count.
pub fn model_config(cfg: &RunConfig) -> CbrnnConfig {
    let mixing = cfg.augment.blocks_mixing || cfg.augment.test_mixing;
    let slots = cfg.features.domfreq_k * if mixing { 2 } else { 1 };
    cfg.model.clone().with_domfreq_slots(slots)
}

pub struct FoldResult {
    pub model: CbrnnModel,
    pub history: TrainHistory,
    pub test_auc: Option<f64>,
    pub train_set: Vec<LabeledSample>,
}

fn gather(samples: &BTreeMap<String, LabeledSample>, ids: &[String]) -> Vec<LabeledSample> {
    ids.iter().map(|id| samples[id].clone()).collect()
}

fn widen_all(set: Vec<LabeledSample>, slots: usize) -> Result<Vec<LabeledSample>> {
    set.into_iter()
        .map(|s| {
            Ok(LabeledSample {
                features: widen_domfreq(&s.features, slots)?,
                ..s
            })
        })
        .collect()
}

/// Trains one fold. All randomness comes from seeds derived from the root
/// seed and the fold index.
pub fn run_fold(
    cfg: &RunConfig,
    model_cfg: &CbrnnConfig,
    samples: &BTreeMap<String, LabeledSample>,
    fold: &Fold,
    index: usize,
    test_features: &[FeaturePair],
) -> Result<FoldResult> {
    let i = index as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1000 + i));
    let originals = gather(samples, &fold.train);
    let mut train_set = if cfg.augment.blocks_mixing {
        augment_blocks(&originals, &mut rng)?
    } else {
        originals.clone()
    };
    if cfg.augment.test_mixing {
        train_set.extend(test_mixes(&originals, test_features, &mut rng)?);
    }
    let width = model_cfg.domfreq_slots;
    let train_set = widen_all(train_set, width)?;
    let val = widen_all(gather(samples, &fold.val), width)?;
    let test = widen_all(gather(samples, &fold.test), width)?;

    let model = build_model(model_cfg.clone(), derive_seed(cfg.seed, 2000 + i))?;
    let mut tc = cfg.train.clone();
    tc.seed = derive_seed(cfg.seed, 3000 + i);
    let (model, history) = train(model, &train_set, &val, &tc).with_context(|| format!("training fold {index}"))?;
    let test_auc = if test.is_empty() { None } else { Some(validation_auc(&model, &test)?) };
    Ok(FoldResult {
        model,
        history,
        test_auc,
        train_set,
    })
}

pub fn load_test_features(cfg: &RunConfig, cache_dir: &Path) -> Result<Vec<FeaturePair>> {
    if !cfg.augment.test_mixing {
        return Ok(Vec::new());
    }
    let Some(path) = &cfg.paths.test_manifest else {
        bail!("test mixing needs --test-manifest listing the test clips");
    };
    let test = Manifest::read_labels(path)?;
    let ids: Vec<String> = test.ids().map(str::to_owned).collect();
    store::load_features(cache_dir, &ids)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn run(args: TrainArgs) -> Result<()> {
    let mut cfg = RunConfig::load(&args.common)?;
    args.apply(&mut cfg);
    cfg.validate()?;
    let manifest_path = existing_path(&args.manifest, &cfg.paths.manifest, "manifest")?;
    let cache_dir = existing_path(&args.cache_dir, &cfg.paths.cache_dir, "cache directory")?;
    let out = output_path(&args.out, &cfg.paths.output_dir, "output directory")?;
    let protocol = args.protocol.protocol(Protocol::Development);

    let manifest = Manifest::read_labels(&manifest_path)?;
    let samples = store::load_labeled(&cache_dir, &manifest)?;
    let test_features = load_test_features(&cfg, &cache_dir)?;
    let model_cfg = model_config(&cfg);
    let folds = stratified_splits(&manifest, &protocol.spec(cfg.seed))?;
    cfg.echo(&out)?;

    let mut summary = csv::Writer::from_path(out.join("summary.csv"))?;
    summary.write_record(["fold", "checkpoint", "epochs", "best_epoch", "best_val_auc", "test_auc"])?;
    let mut checkpoints = Vec::new();
    let (mut val_aucs, mut test_aucs) = (Vec::new(), Vec::new());
    for (i, fold) in folds.iter().enumerate() {
        let result = run_fold(&cfg, &model_cfg, &samples, fold, i, &test_features)?;
        let ckpt = format!("fold{i}.ckpt");
        save_checkpoint(&result.model, &out.join(&ckpt))?;
        result.history.write_csv(&out.join(format!("fold{i}_history.csv")))?;
        if cfg.augment.blocks_mixing || cfg.augment.test_mixing {
            save_provenance(&result.train_set, &out.join(format!("fold{i}_train_provenance.csv")))?;
        }
        let test_auc = result.test_auc.map(|a| a.to_string()).unwrap_or_default();
        summary.write_record([
            i.to_string(),
            ckpt.clone(),
            result.history.epochs.len().to_string(),
            result.history.best_epoch.to_string(),
            result.history.best_val_auc.to_string(),
            test_auc,
        ])?;
        println!(
            "fold {i}: {} epochs, best val AUC {:.4} at epoch {}{}",
            result.history.epochs.len(),
            result.history.best_val_auc,
            result.history.best_epoch,
            result.test_auc.map(|a| format!(", test AUC {a:.4}")).unwrap_or_default()
        );
        val_aucs.push(result.history.best_val_auc);
        test_aucs.extend(result.test_auc);
        checkpoints.push(ckpt);
    }
    summary.flush()?;
    std::fs::write(out.join("checkpoints.txt"), checkpoints.join("\n") + "\n")?;

    let mut cv = csv::Writer::from_path(out.join("cv_summary.csv"))?;
    cv.write_record(["protocol", "metric", "folds", "mean", "std"])?;
    let (m, s) = mean_std(&val_aucs);
    cv.write_record([protocol.name(), "val_auc", &val_aucs.len().to_string(), &m.to_string(), &s.to_string()])?;
    if !test_aucs.is_empty() {
        let (m, s) = mean_std(&test_aucs);
        cv.write_record([protocol.name(), "test_auc", &test_aucs.len().to_string(), &m.to_string(), &s.to_string()])?;
        println!("mean test AUC {m:.4} (std {s:.4}) over {} folds", test_aucs.len());
    }
    cv.flush()?;
    if protocol == Protocol::Challenge {
        println!(
            "{} checkpoints listed in {}; average their scores with `birdcall predict --model-dir`",
            checkpoints.len(),
            out.join("checkpoints.txt").display()
        );
    }
    Ok(())
}
