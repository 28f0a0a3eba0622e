//! `birdcall evaluate`: AUC, ROC and error lists for a score file.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use birdcall::eval::{EvalReport, DEFAULT_THRESHOLD};
use birdcall::{Label, Manifest};
use clap::Args;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Score CSV written by `predict` (clip_id,score).
    #[arg(long)]
    pub scores: PathBuf,
    /// Labeled `itemid,hasbird` CSV covering exactly the scored clips.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Scores above this count as "bird present".
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

fn read_scores(path: &PathBuf) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut scores = BTreeMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let (Some(id), Some(score)) = (record.get(0), record.get(1)) else {
            bail!("{} row {}: expected clip_id,score", path.display(), line + 2);
        };
        let score: f64 = score
            .trim()
            .parse()
            .with_context(|| format!("{} row {}: bad score `{score}`", path.display(), line + 2))?;
        if scores.insert(id.trim().to_owned(), score).is_some() {
            bail!("{}: clip `{id}` scored twice", path.display());
        }
    }
    Ok(scores)
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    let scores = read_scores(&args.scores)?;
    let labels = Manifest::read_labels(&args.manifest)?.labels();
    let unlabeled: Vec<&str> = labels
        .iter()
        .filter(|(_, l)| **l == Label::Unknown)
        .map(|(id, _)| id.as_str())
        .collect();
    if !unlabeled.is_empty() {
        bail!("manifest has unlabeled clips: {}", unlabeled.join(", "));
    }
    let unscored: Vec<&str> = labels.keys().filter(|id| !scores.contains_key(*id)).map(String::as_str).collect();
    let unknown: Vec<&str> = scores.keys().filter(|id| !labels.contains_key(*id)).map(String::as_str).collect();
    if !unscored.is_empty() || !unknown.is_empty() {
        bail!(
            "scores and manifest disagree: {} labeled clip(s) without a score [{}], {} scored clip(s) not in the manifest [{}]",
            unscored.len(),
            unscored.join(", "),
            unknown.len(),
            unknown.join(", ")
        );
    }
    let ids: Vec<String> = scores.keys().cloned().collect();
    let values: Vec<f64> = scores.values().copied().collect();
    let truth: Vec<bool> = ids.iter().map(|id| labels[id] == Label::Present).collect();
    let report = EvalReport::new(ids, values, truth, args.threshold)?;
    report.write_all(&args.out)?;
    println!(
        "AUC {:.4} over {} clips ({} present, {} absent); {} false positives, {} false negatives at {}",
        report.auc,
        report.ids.len(),
        report.n_pos,
        report.n_neg,
        report.fp_ids.len(),
        report.fn_ids.len(),
        report.threshold
    );
    Ok(())
}
