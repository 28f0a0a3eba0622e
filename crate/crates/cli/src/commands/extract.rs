//! `birdcall extract`: decode every clip of a manifest and cache its features.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use birdcall::audio::{decode_wav, prepare_clip};
use birdcall::cache::encode_feature_cache;
use birdcall::features::FeatureExtractor;
use birdcall::{Manifest, SAMPLE_RATE};
use clap::Args;
use rayon::prelude::*;

use crate::config::{existing_path, output_path, ConfigArgs, RunConfig};
use crate::store::{self, cache_file, sha256_hex};

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// CSV with an `itemid` column (and optionally `hasbird`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Directory holding `<itemid>.wav` files.
    #[arg(long)]
    pub audio_dir: Option<PathBuf>,
    /// Where feature caches are written.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Re-extract clips that are already cached.
    #[arg(long)]
    pub force: bool,
}

enum Outcome {
    Extracted(String),
    Cached(String),
    Failed(String),
}

fn audio_path(dir: &Path, id: &str) -> Option<PathBuf> {
    [dir.join(format!("{id}.wav")), dir.join(id)].into_iter().find(|p| p.is_file())
}

fn extract_one(extractor: &FeatureExtractor, audio_dir: &Path, cache_dir: &Path, id: &str) -> Result<String> {
    let path = audio_path(audio_dir, id).with_context(|| format!("no audio file for `{id}`"))?;
    let mut clip = decode_wav(&path)?;
    clip.id = id.to_owned();
    let clip = prepare_clip(clip)?;
    let pair = extractor.extract(&clip)?;
    let bytes = encode_feature_cache(&pair);
    let out = cache_file(cache_dir, id);
    std::fs::write(&out, &bytes).with_context(|| format!("writing {}", out.display()))?;
    Ok(sha256_hex(&bytes))
}

pub fn run(args: ExtractArgs) -> Result<()> {
    let cfg = RunConfig::load(&args.common)?;
    cfg.validate()?;
    let manifest_path = existing_path(&args.manifest, &cfg.paths.manifest, "manifest")?;
    let audio_dir = existing_path(&args.audio_dir, &cfg.paths.audio_dir, "audio directory")?;
    let cache_dir = output_path(&args.cache_dir, &cfg.paths.cache_dir, "cache directory")?;
    let manifest = Manifest::read_labels(&manifest_path)?;

    // A changed feature configuration invalidates every cached clip.
    let stale = store::stored_config(&cache_dir)?.is_some_and(|old| old != cfg.features);
    let force = args.force || stale;
    let extractor = FeatureExtractor::new(cfg.features.clone(), SAMPLE_RATE)?;

    let outcomes: Vec<(String, Outcome)> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let id = e.clip_id.clone();
            let cached = cache_file(&cache_dir, &id);
            if !force && cached.is_file() {
                return match std::fs::read(&cached) {
                    Ok(bytes) => (id, Outcome::Cached(sha256_hex(&bytes))),
                    Err(err) => (id, Outcome::Failed(err.to_string())),
                };
            }
            match extract_one(&extractor, &audio_dir, &cache_dir, &id) {
                Ok(hash) => (id, Outcome::Extracted(hash)),
                Err(err) => (id, Outcome::Failed(format!("{err:#}"))),
            }
        })
        .collect();

    store::write_config(&cache_dir, &cfg.features)?;
    cfg.echo(&cache_dir)?;
    let mut features = csv::Writer::from_path(cache_dir.join(store::FEATURE_MANIFEST))?;
    features.write_record(["clip_id", "file", "sha256"])?;
    let mut failures = csv::Writer::from_path(cache_dir.join(store::FAILURES))?;
    failures.write_record(["clip_id", "error"])?;
    let (mut extracted, mut skipped, mut failed) = (0, 0, Vec::new());
    for (id, outcome) in &outcomes {
        match outcome {
            Outcome::Extracted(hash) | Outcome::Cached(hash) => {
                if matches!(outcome, Outcome::Extracted(_)) {
                    extracted += 1;
                } else {
                    skipped += 1;
                }
                features.write_record([id.as_str(), &format!("{id}.feat"), hash])?;
            }
            Outcome::Failed(err) => {
                failures.write_record([id.as_str(), err])?;
                failed.push(id.as_str());
            }
        }
    }
    features.flush()?;
    failures.flush()?;
    println!("extracted {extracted}, already cached {skipped}, failed {}", failed.len());
    if !failed.is_empty() {
        bail!(
            "{} clip(s) failed ({}); see {}",
            failed.len(),
            failed.join(", "),
            cache_dir.join(store::FAILURES).display()
        );
    }
    Ok(())
}
