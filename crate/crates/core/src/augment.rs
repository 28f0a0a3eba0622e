//! Feature-level mixing: blocks mixing for augmentation and test mixing for
//! domain adaptation.
//!
//! Mixing takes the elementwise maximum of the log mel-band energies and
//! concatenates the dominant-frequency slots, so two width-K parents give a
//! width-2K child. Originals kept next to mixed samples are widened by
//! repeating their slots.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeaturePair;
use crate::manifest::Label;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Original,
    BlocksMixed { a: String, b: String },
    TestMixed { train: String, test: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: FeaturePair,
    pub label: Label,
    pub provenance: Provenance,
}

impl LabeledSample {
    pub fn original(features: FeaturePair, label: Label) -> Self {
        Self {
            features,
            label,
            provenance: Provenance::Original,
        }
    }

    pub fn id(&self) -> &str {
        &self.features.clip_id
    }
}

fn mix_features(a: &FeaturePair, b: &FeaturePair) -> Result<FeaturePair> {
    if a.mbe.shape() != b.mbe.shape() {
        return Err(Error::Augment(format!(
            "cannot mix `{}` {:?} with `{}` {:?}: mel-band shapes differ",
            a.clip_id,
            a.mbe.shape(),
            b.clip_id,
            b.mbe.shape()
        )));
    }
    if a.frames() != b.frames() {
        return Err(Error::Augment(format!(
            "cannot mix `{}` and `{}`: frame counts differ",
            a.clip_id, b.clip_id
        )));
    }
    let mbe_data = a.mbe.data().iter().zip(b.mbe.data()).map(|(x, y)| x.max(*y)).collect();
    let mbe = Tensor::from_vec(a.mbe.shape(), mbe_data)?;

    let (ka, kb) = (a.slots(), b.slots());
    let mut dom = Vec::with_capacity(a.frames() * (ka + kb) * 2);
    for (ra, rb) in a.domfreq.data().chunks_exact(ka * 2).zip(b.domfreq.data().chunks_exact(kb * 2)) {
        dom.extend_from_slice(ra);
        dom.extend_from_slice(rb);
    }
    let domfreq = Tensor::from_vec([a.frames(), ka + kb, 2], dom)?;
    FeaturePair::new(format!("{}+{}", a.clip_id, b.clip_id), mbe, domfreq)
}

fn known(sample: &LabeledSample) -> Result<bool> {
    match sample.label {
        Label::Present => Ok(true),
        Label::Absent => Ok(false),
        Label::Unknown => Err(Error::Augment(format!(
            "clip `{}` has no label; mixing requires labeled clips",
            sample.id()
        ))),
    }
}

/// Mixes two labeled samples. The result is absent only when both parents are.
pub fn blocks_mix(a: &LabeledSample, b: &LabeledSample) -> Result<LabeledSample> {
    let present = known(a)? | known(b)?;
    Ok(LabeledSample {
        features: mix_features(&a.features, &b.features)?,
        label: if present { Label::Present } else { Label::Absent },
        provenance: Provenance::BlocksMixed {
            a: a.id().to_owned(),
            b: b.id().to_owned(),
        },
    })
}

/// Repeats the dominant-frequency slots until the width is `slots`, which
/// must be a multiple of the current width.
pub fn widen_domfreq(pair: &FeaturePair, slots: usize) -> Result<FeaturePair> {
    let k = pair.slots();
    if slots == k {
        return Ok(pair.clone());
    }
    if k == 0 || slots % k != 0 {
        return Err(Error::Augment(format!(
            "cannot widen {k} dominant-frequency slots to {slots}"
        )));
    }
    let mut dom = Vec::with_capacity(pair.frames() * slots * 2);
    for row in pair.domfreq.data().chunks_exact(k * 2) {
        for _ in 0..slots / k {
            dom.extend_from_slice(row);
        }
    }
    let domfreq = Tensor::from_vec([pair.frames(), slots, 2], dom)?;
    FeaturePair::new(pair.clip_id.clone(), pair.mbe.clone(), domfreq)
}

fn widen_sample(s: &LabeledSample, slots: usize) -> Result<LabeledSample> {
    Ok(LabeledSample {
        features: widen_domfreq(&s.features, slots)?,
        ..s.clone()
    })
}

/// Originals followed by one mixed sample per original, each partnered with a
/// uniformly drawn different sample.
pub fn augment_blocks(train: &[LabeledSample], rng: &mut impl Rng) -> Result<Vec<LabeledSample>> {
    if train.len() < 2 {
        return Err(Error::Augment(format!(
            "blocks mixing needs at least 2 samples, got {}",
            train.len()
        )));
    }
    for s in train {
        known(s)?;
    }
    let n = train.len();
    let mut mixed = Vec::with_capacity(n);
    for (i, s) in train.iter().enumerate() {
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        mixed.push(blocks_mix(s, &train[j])?);
    }
    let width = mixed[0].features.slots();
    let mut out = train
        .iter()
        .map(|s| widen_sample(s, width))
        .collect::<Result<Vec<_>>>()?;
    out.extend(mixed);
    Ok(out)
}

/// Test-mixed samples only: every present-labeled training clip mixed with one
/// uniformly drawn test clip, labeled present.
pub fn test_mixes(
    train: &[LabeledSample],
    test_features: &[FeaturePair],
    rng: &mut impl Rng,
) -> Result<Vec<LabeledSample>> {
    if test_features.is_empty() {
        return Err(Error::Augment("test mixing needs at least one test clip".into()));
    }
    let mut out = Vec::new();
    for s in train {
        if !known(s)? {
            continue;
        }
        let t = &test_features[rng.gen_range(0..test_features.len())];
        out.push(LabeledSample {
            features: mix_features(&s.features, t)?,
            label: Label::Present,
            provenance: Provenance::TestMixed {
                train: s.id().to_owned(),
                test: t.clip_id.clone(),
            },
        });
    }
    if out.is_empty() {
        return Err(Error::Augment("test mixing found no present-labeled training clips".into()));
    }
    Ok(out)
}

/// Originals (widened) followed by the test-mixed positives; the positive
/// class doubles and the negative class is unchanged.
pub fn adapt_test_mixing(
    train: &[LabeledSample],
    test_features: &[FeaturePair],
    rng: &mut impl Rng,
) -> Result<Vec<LabeledSample>> {
    let mixed = test_mixes(train, test_features, rng)?;
    let width = mixed[0].features.slots();
    let mut out = train
        .iter()
        .map(|s| widen_sample(s, width))
        .collect::<Result<Vec<_>>>()?;
    out.extend(mixed);
    Ok(out)
}

/// Writes `clip_id,label,provenance,source_a,source_b`, enough to rebuild any
/// mixed sample from its parents.
pub fn write_provenance_csv(samples: &[LabeledSample], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Augment(format!("writing provenance: {e}"));
    w.write_record(["clip_id", "label", "provenance", "source_a", "source_b"])
        .map_err(to_err)?;
    for s in samples {
        let label = match s.label {
            Label::Present => "1",
            Label::Absent => "0",
            Label::Unknown => "",
        };
        let (kind, a, b) = match &s.provenance {
            Provenance::Original => ("original", "", ""),
            Provenance::BlocksMixed { a, b } => ("blocks_mixed", a.as_str(), b.as_str()),
            Provenance::TestMixed { train, test } => ("test_mixed", train.as_str(), test.as_str()),
        };
        w.write_record([s.id(), label, kind, a, b]).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Augment(format!("writing provenance: {e}")))?;
    Ok(())
}

pub fn save_provenance(samples: &[LabeledSample], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_provenance_csv(samples, std::io::BufWriter::new(file))
}
