//! The on-disk feature store written by `extract` and read by the other
//! commands.
//!
//! ```text
//! <cache>/<clip_id>.feat      one binary feature cache per clip
//! <cache>/features.csv        clip_id,file,sha256
//! <cache>/feature_config.json the feature configuration used
//! <cache>/failures.csv        clip_id,error
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use birdcall::augment::LabeledSample;
use birdcall::cache::read_feature_cache;
use birdcall::{FeatureConfig, FeaturePair, Label, Manifest};
use sha2::{Digest, Sha256};

pub const FEATURE_MANIFEST: &str = "features.csv";
pub const FEATURE_CONFIG: &str = "feature_config.json";
pub const FAILURES: &str = "failures.csv";

pub fn cache_file(dir: &Path, clip_id: &str) -> PathBuf {
    dir.join(format!("{clip_id}.feat"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// The feature configuration recorded by a previous extraction, if any.
pub fn stored_config(dir: &Path) -> Result<Option<FeatureConfig>> {
    let path = dir.join(FEATURE_CONFIG);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?))
}

pub fn write_config(dir: &Path, cfg: &FeatureConfig) -> Result<()> {
    let path = dir.join(FEATURE_CONFIG);
    std::fs::write(&path, serde_json::to_string_pretty(cfg)?).with_context(|| format!("writing {}", path.display()))
}

/// Loads cached features for `ids`, failing with the full list of ids that
/// have no cache file.
pub fn load_features(dir: &Path, ids: &[String]) -> Result<Vec<FeaturePair>> {
    let missing: Vec<&str> = ids
        .iter()
        .filter(|id| !cache_file(dir, id).is_file())
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        bail!(
            "{} clip(s) have no cached features in {}: {}",
            missing.len(),
            dir.display(),
            missing.join(", ")
        );
    }
    ids.iter()
        .map(|id| {
            let mut pair = read_feature_cache(cache_file(dir, id))?;
            pair.clip_id = id.clone();
            Ok(pair)
        })
        .collect()
}

/// Labeled samples for every clip of a fully labeled manifest, keyed by id.
pub fn load_labeled(dir: &Path, manifest: &Manifest) -> Result<BTreeMap<String, LabeledSample>> {
    if let Some(e) = manifest.entries.iter().find(|e| e.label == Label::Unknown) {
        bail!("clip `{}` has no label; training needs a labeled manifest", e.clip_id);
    }
    let ids: Vec<String> = manifest.ids().map(str::to_owned).collect();
    let pairs = load_features(dir, &ids)?;
    Ok(manifest
        .entries
        .iter()
        .zip(pairs)
        .map(|(e, p)| (e.clip_id.clone(), LabeledSample::original(p, e.label)))
        .collect())
}
