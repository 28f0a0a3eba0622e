//! Averaging per-clip scores across models.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Arithmetic mean per clip. Every run must score exactly the same clip ids.
pub fn ensemble_average(runs: &[BTreeMap<String, f64>]) -> Result<BTreeMap<String, f64>> {
    let first = runs
        .first()
        .ok_or_else(|| Error::Eval("ensemble needs at least one run".into()))?;
    let ids: BTreeSet<&String> = first.keys().collect();
    for (i, run) in runs.iter().enumerate().skip(1) {
        let other: BTreeSet<&String> = run.keys().collect();
        if other != ids {
            let diff: Vec<&str> = ids.symmetric_difference(&other).map(|s| s.as_str()).collect();
            return Err(Error::Eval(format!(
                "run {i} covers different clips than run 0; differing ids: {}",
                diff.join(", ")
            )));
        }
    }
    // Running mean, so identical runs reproduce their scores exactly.
    let mean = |id: &String| {
        runs.iter()
            .enumerate()
            .fold(0.0, |m, (k, r)| m + (r[id] - m) / (k + 1) as f64)
    };
    Ok(first.keys().map(|id| (id.clone(), mean(id))).collect())
}
