//! Label manifests in the `itemid,hasbird` CSV layout.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Absent,
    Present,
    Unknown,
}

impl Label {
    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Label::Absent),
            1 => Some(Label::Present),
            _ => None,
        }
    }

    /// 1.0 for present, 0.0 for absent, `None` when unknown.
    pub fn target(self) -> Option<f64> {
        match self {
            Label::Present => Some(1.0),
            Label::Absent => Some(0.0),
            Label::Unknown => None,
        }
    }

    pub fn is_known(self) -> bool {
        self != Label::Unknown
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub clip_id: String,
    pub label: Label,
    /// Resolved audio path; `None` for label-only manifests.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.clip_id.as_str())
    }

    pub fn labels(&self) -> BTreeMap<String, Label> {
        self.entries
            .iter()
            .map(|e| (e.clip_id.clone(), e.label))
            .collect()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.entries.iter().all(|e| e.label.is_known())
    }

    /// Parses a manifest from CSV text. The header must contain `itemid`;
    /// `hasbird` is optional. Paths are left unresolved.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Manifest(format!("cannot read header: {e}")))?
            .clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
        };
        let id_col = col("itemid")
            .ok_or_else(|| Error::Manifest("header lacks an `itemid` column".into()))?;
        let label_col = col("hasbird");

        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            // Row numbers are 1-based data rows (header is row 0).
            let row = i + 1;
            let record = record.map_err(|e| Error::Manifest(format!("row {row}: {e}")))?;
            let clip_id = record
                .get(id_col)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::Manifest(format!("row {row}: empty itemid")))?
                .to_string();
            let label = match label_col.and_then(|c| record.get(c)) {
                None | Some("") => Label::Unknown,
                Some(raw) => raw
                    .parse::<u8>()
                    .ok()
                    .and_then(Label::from_bit)
                    .ok_or_else(|| {
                        Error::Manifest(format!(
                            "row {row} (`{clip_id}`): hasbird must be 0 or 1, got `{raw}`"
                        ))
                    })?,
            };
            if !seen.insert(clip_id.clone()) {
                return Err(Error::Manifest(format!(
                    "row {row}: duplicate itemid `{clip_id}`"
                )));
            }
            entries.push(ManifestEntry {
                clip_id,
                label,
                path: None,
            });
        }
        Ok(Self { entries })
    }

    /// Reads a label-only manifest; no audio paths are resolved.
    pub fn read_labels(csv_path: impl AsRef<Path>) -> Result<Self> {
        let csv_path = csv_path.as_ref();
        let file = std::fs::File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
        Self::from_reader(file)
    }

    /// Resolves every entry to `audio_dir/<itemid>` or `audio_dir/<itemid>.wav`,
    /// failing if neither exists.
    pub fn resolve_paths(&mut self, audio_dir: &Path) -> Result<()> {
        let mut missing = Vec::new();
        for e in &mut self.entries {
            let bare = audio_dir.join(&e.clip_id);
            let with_ext = audio_dir.join(format!("{}.wav", e.clip_id));
            if with_ext.is_file() {
                e.path = Some(with_ext);
            } else if bare.is_file() {
                e.path = Some(bare);
            } else {
                missing.push(e.clip_id.clone());
            }
        }
        if !missing.is_empty() {
            let shown: Vec<_> = missing.iter().take(10).cloned().collect();
            return Err(Error::Manifest(format!(
                "{} clip(s) have no audio file in {}: {}{}",
                missing.len(),
                audio_dir.display(),
                shown.join(", "),
                if missing.len() > shown.len() { ", ..." } else { "" }
            )));
        }
        Ok(())
    }

    /// Writes the manifest in `itemid,hasbird` form. Unknown labels are
    /// written as empty cells.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        let wrap = |e: csv::Error| Error::Manifest(format!("{}: {e}", path.display()));
        w.write_record(["itemid", "hasbird"]).map_err(wrap)?;
        for e in &self.entries {
            let label = match e.label {
                Label::Present => "1",
                Label::Absent => "0",
                Label::Unknown => "",
            };
            w.write_record([e.clip_id.as_str(), label]).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Keeps only the entries whose ids are in `ids`, in `ids` order.
    pub fn subset(&self, ids: &[String]) -> Result<Self> {
        let index: BTreeMap<&str, &ManifestEntry> =
            self.entries.iter().map(|e| (e.clip_id.as_str(), e)).collect();
        let entries = ids
            .iter()
            .map(|id| {
                index
                    .get(id.as_str())
                    .map(|e| (*e).clone())
                    .ok_or_else(|| Error::Manifest(format!("unknown clip id `{id}`")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }
}

/// Parses `csv_path` and resolves each clip's audio file under `audio_dir`.
pub fn load_manifest(csv_path: impl AsRef<Path>, audio_dir: impl AsRef<Path>) -> Result<Manifest> {
    let mut m = Manifest::read_labels(csv_path)?;
    m.resolve_paths(audio_dir.as_ref())?;
    Ok(m)
}
