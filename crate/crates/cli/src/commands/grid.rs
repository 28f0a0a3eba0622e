//! `birdcall grid`: cross-validated search over dropout, layer width and
//! convolution depth.

use std::path::PathBuf;

use anyhow::{Context, Result};
use birdcall::eval::stratified_splits;
use birdcall::nn::build_model;
use birdcall::Manifest;
use clap::Args;

use super::train::{load_test_features, model_config, run_fold};
use super::{Protocol, ProtocolArgs};
use crate::config::{existing_path, output_path, ConfigArgs, RunConfig};
use crate::store;

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dropout rates to try.
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75])]
    pub dropouts: Vec<f64>,
    /// Widths to try; recurrent and dense layers change together.
    #[arg(long, value_delimiter = ',', default_values_t = [8usize])]
    pub units: Vec<usize>,
    /// Convolution depths to try.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize])]
    pub cnn_layers: Vec<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
}

struct Row {
    hash: String,
    dropout: f64,
    units: usize,
    cnn_layers: usize,
    parameters: usize,
    val_aucs: Vec<f64>,
    mean: f64,
}

pub fn run(args: GridArgs) -> Result<()> {
    let mut base = RunConfig::load(&args.common)?;
    if let Some(v) = args.max_epochs {
        base.train.max_epochs = v;
    }
    if let Some(v) = args.patience {
        base.train.patience = v;
    }
    base.validate()?;
    let manifest_path = existing_path(&args.manifest, &base.paths.manifest, "manifest")?;
    let cache_dir = existing_path(&args.cache_dir, &base.paths.cache_dir, "cache directory")?;
    let out = output_path(&args.out, &base.paths.output_dir, "output directory")?;
    let protocol = args.protocol.protocol(Protocol::Development);

    let manifest = Manifest::read_labels(&manifest_path)?;
    let samples = store::load_labeled(&cache_dir, &manifest)?;
    let test_features = load_test_features(&base, &cache_dir)?;
    let folds = stratified_splits(&manifest, &protocol.spec(base.seed))?;
    base.echo(&out)?;

    let mut rows = Vec::new();
    for &cnn_layers in &args.cnn_layers {
        for &units in &args.units {
            for &dropout in &args.dropouts {
                let mut cfg = base.clone();
                cfg.model = cfg.model.with_cnn_layers(cnn_layers);
                cfg.model.rnn_units = units;
                cfg.model.fc_units = units;
                cfg.model.dropout = dropout;
                let model_cfg = model_config(&cfg);
                model_cfg
                    .validate()
                    .with_context(|| format!("grid point dropout={dropout} units={units} cnn_layers={cnn_layers}"))?;
                let parameters = build_model(model_cfg.clone(), 0)?.parameter_count();
                let text = toml::to_string(&model_cfg)?;
                let hash = store::sha256_hex(text.as_bytes())[..12].to_owned();
                let mut val_aucs = Vec::new();
                for (i, fold) in folds.iter().enumerate() {
                    let result = run_fold(&cfg, &model_cfg, &samples, fold, i, &test_features)?;
                    val_aucs.push(result.history.best_val_auc);
                }
                let mean = val_aucs.iter().sum::<f64>() / val_aucs.len() as f64;
                println!(
                    "{hash} dropout={dropout} units={units} cnn_layers={cnn_layers} params={parameters}: mean val AUC {mean:.4}"
                );
                rows.push(Row {
                    hash,
                    dropout,
                    units,
                    cnn_layers,
                    parameters,
                    val_aucs,
                    mean,
                });
            }
        }
    }
    rows.sort_by(|a, b| b.mean.total_cmp(&a.mean));

    let mut w = csv::Writer::from_path(out.join("grid.csv"))?;
    w.write_record(["config_hash", "dropout", "units", "cnn_layers", "parameters", "fold_val_aucs", "mean_val_auc"])?;
    for r in &rows {
        let folds: Vec<String> = r.val_aucs.iter().map(f64::to_string).collect();
        w.write_record([
            r.hash.clone(),
            r.dropout.to_string(),
            r.units.to_string(),
            r.cnn_layers.to_string(),
            r.parameters.to_string(),
            folds.join(";"),
            r.mean.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
