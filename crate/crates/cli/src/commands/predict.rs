//! `birdcall predict`: score clips with one checkpoint or an ensemble.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use birdcall::augment::widen_domfreq;
use birdcall::eval::ensemble_average;
use birdcall::nn::checkpoint::load_checkpoint;
use birdcall::{CbrnnModel, FeaturePair, Manifest};
use clap::Args;

use crate::config::{existing_path, ConfigArgs, RunConfig};
use crate::store;

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Checkpoint to score with; repeat to average several.
    #[arg(long = "checkpoint")]
    pub checkpoints: Vec<PathBuf>,
    /// A `train` output directory; every checkpoint in its checkpoints.txt is used.
    #[arg(long)]
    pub model_dir: Option<PathBuf>,
    /// Clips to score (`itemid[,hasbird]`; labels are ignored).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Output CSV with columns clip_id,score.
    #[arg(long)]
    pub out: PathBuf,
}

fn checkpoint_paths(args: &PredictArgs) -> Result<Vec<PathBuf>> {
    let mut paths = args.checkpoints.clone();
    if let Some(dir) = &args.model_dir {
        let list = dir.join("checkpoints.txt");
        let text = std::fs::read_to_string(&list).with_context(|| format!("reading {}", list.display()))?;
        paths.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(|l| dir.join(l)));
    }
    if paths.is_empty() {
        bail!("no checkpoints given (use --checkpoint or --model-dir)");
    }
    Ok(paths)
}

/// Scores `pairs` with one model, widening dominant frequencies to the
/// width the model was trained on.
pub fn score(model: &CbrnnModel, pairs: &[FeaturePair]) -> Result<BTreeMap<String, f64>> {
    let slots = model.config().domfreq_slots;
    let widened = pairs
        .iter()
        .map(|p| widen_domfreq(p, slots))
        .collect::<birdcall::Result<Vec<_>>>()?;
    let scores = model.predict(&widened)?;
    Ok(pairs.iter().map(|p| p.clip_id.clone()).zip(scores).collect())
}

pub fn write_scores(scores: &BTreeMap<String, f64>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["clip_id", "score"])?;
    for (id, s) in scores {
        w.write_record([id.as_str(), &s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: PredictArgs) -> Result<()> {
    let cfg = RunConfig::load(&args.common)?;
    let manifest_path = existing_path(&args.manifest, &cfg.paths.manifest, "manifest")?;
    let cache_dir = existing_path(&args.cache_dir, &cfg.paths.cache_dir, "cache directory")?;
    let manifest = Manifest::read_labels(&manifest_path)?;
    let ids: Vec<String> = manifest.ids().map(str::to_owned).collect();
    let pairs = store::load_features(&cache_dir, &ids)?;

    let mut runs = Vec::new();
    let mut features = None;
    for path in checkpoint_paths(&args)? {
        let model = load_checkpoint(&path)?;
        let set = model.config().features;
        match features {
            None => features = Some(set),
            Some(f) if f != set => bail!(
                "checkpoint {} uses {set} features but earlier checkpoints use {f}",
                path.display()
            ),
            _ => {}
        }
        runs.push(score(&model, &pairs).with_context(|| format!("scoring with {}", path.display()))?);
    }
    let averaged = ensemble_average(&runs)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    write_scores(&averaged, &args.out)?;
    println!("scored {} clips with {} checkpoint(s) -> {}", averaged.len(), runs.len(), args.out.display());
    Ok(())
}
