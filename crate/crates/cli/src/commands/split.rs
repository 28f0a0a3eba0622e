//! `birdcall split`: write stratified cross-validation folds.

use std::path::PathBuf;

use anyhow::Result;
use birdcall::eval::stratified_splits;
use birdcall::Manifest;
use clap::Args;

use super::{Protocol, ProtocolArgs};
use crate::config::{existing_path, output_path, ConfigArgs, RunConfig};

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Labeled `itemid,hasbird` CSV.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory; receives `splits.csv` (fold,part,clip_id).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: SplitArgs) -> Result<()> {
    let cfg = RunConfig::load(&args.common)?;
    let manifest = Manifest::read_labels(existing_path(&args.manifest, &cfg.paths.manifest, "manifest")?)?;
    let out = output_path(&args.out, &cfg.paths.output_dir, "output directory")?;
    let protocol = args.protocol.protocol(Protocol::Development);
    let folds = stratified_splits(&manifest, &protocol.spec(cfg.seed))?;
    let mut w = csv::Writer::from_path(out.join("splits.csv"))?;
    w.write_record(["fold", "part", "clip_id"])?;
    for (i, fold) in folds.iter().enumerate() {
        for (part, ids) in ["train", "val", "test"].iter().zip(fold.parts()) {
            for id in ids {
                w.write_record([i.to_string().as_str(), part, id])?;
            }
        }
    }
    w.flush()?;
    cfg.echo(&out)?;
    println!(
        "{} protocol: {} folds of {}/{}/{} clips",
        protocol.name(),
        folds.len(),
        folds[0].train.len(),
        folds[0].val.len(),
        folds[0].test.len()
    );
    Ok(())
}
