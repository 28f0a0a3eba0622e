//! Stratified train/validation/test splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::{Label, Manifest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Train, validation and test fractions; they sum to 1 and test may be 0.
    pub ratios: [f64; 3],
    pub folds: usize,
    pub seed: u64,
}

impl SplitSpec {
    /// Five folds of 60/20/20.
    pub fn development(seed: u64) -> Self {
        Self {
            ratios: [0.6, 0.2, 0.2],
            folds: 5,
            seed,
        }
    }

    /// Three folds of 80/20 with no test part.
    pub fn challenge(seed: u64) -> Self {
        Self {
            ratios: [0.8, 0.2, 0.0],
            folds: 3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Config(format!("split ratios {:?} must be non-negative", self.ratios)));
        }
        if (self.ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios {:?} must sum to 1", self.ratios)));
        }
        if self.folds == 0 {
            return Err(Error::Config("at least one fold is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl Fold {
    pub fn parts(&self) -> [&[String]; 3] {
        [&self.train, &self.val, &self.test]
    }
}

/// Largest-remainder allocation of `n` items over `ratios`; ties in the
/// remainder go to the earlier part.
fn allocate(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let quotas = ratios.map(|r| r * n as f64);
    let mut counts = quotas.map(|q| q.floor() as usize);
    let mut left = n - counts.iter().sum::<usize>();
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| {
        let (fa, fb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if ratios[i] > 0.0 {
            counts[i] += 1;
            left -= 1;
        }
    }
    counts
}

/// One split per fold. Each class is shuffled with a fold-specific stream of
/// the seed and cut by the ratios, so class proportions carry into every part.
pub fn stratified_splits(manifest: &Manifest, spec: &SplitSpec) -> Result<Vec<Fold>> {
    spec.validate()?;
    let mut classes: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    for e in &manifest.entries {
        match e.label {
            Label::Absent => classes[0].push(e.clip_id.clone()),
            Label::Present => classes[1].push(e.clip_id.clone()),
            Label::Unknown => {
                return Err(Error::Eval(format!(
                    "clip `{}` has no label; splits need a labeled manifest",
                    e.clip_id
                )))
            }
        }
    }
    let names = ["absent", "present"];
    let mut allocations = Vec::new();
    for (class, ids) in classes.iter().enumerate() {
        let counts = allocate(ids.len(), &spec.ratios);
        for part in 0..3 {
            if spec.ratios[part] > 0.0 && counts[part] == 0 {
                return Err(Error::Eval(format!(
                    "class {} has {} clips, too few to give every part at least one",
                    names[class],
                    ids.len()
                )));
            }
        }
        allocations.push(counts);
    }

    let mut folds = Vec::with_capacity(spec.folds);
    for fold in 0..spec.folds {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(fold as u64);
        let mut parts: [Vec<String>; 3] = Default::default();
        for (ids, counts) in classes.iter().zip(&allocations) {
            let mut shuffled = ids.clone();
            shuffled.shuffle(&mut rng);
            let mut rest = shuffled.as_slice();
            for (part, &c) in parts.iter_mut().zip(counts) {
                let (head, tail) = rest.split_at(c);
                part.extend_from_slice(head);
                rest = tail;
            }
        }
        for p in &mut parts {
            p.sort();
        }
        let [train, val, test] = parts;
        folds.push(Fold { train, val, test });
    }
    Ok(folds)
}
