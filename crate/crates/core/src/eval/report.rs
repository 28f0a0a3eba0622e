//! Thresholded decisions, false-positive / false-negative lists, and the CSV
//! files an evaluation writes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::auc::roc_auc;

/// Scores strictly above this count as "present".
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// False positives are absent clips scored above `threshold`; false negatives
/// are present clips scored at or below it.
pub fn classify_errors(
    ids: &[String],
    scores: &[f64],
    labels: &[bool],
    threshold: f64,
) -> (Vec<String>, Vec<String>) {
    let mut fp = Vec::new();
    let mut fn_ = Vec::new();
    for ((id, &s), &present) in ids.iter().zip(scores).zip(labels) {
        let decided = s > threshold;
        if decided && !present {
            fp.push(id.clone());
        } else if !decided && present {
            fn_.push(id.clone());
        }
    }
    (fp, fn_)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub auc: f64,
    pub roc_points: Vec<(f64, f64)>,
    pub fp_ids: Vec<String>,
    pub fn_ids: Vec<String>,
    pub threshold: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub ids: Vec<String>,
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Eval(format!("writing {}: {e}", path.display()))
}

impl EvalReport {
    pub fn new(ids: Vec<String>, scores: Vec<f64>, labels: Vec<bool>, threshold: f64) -> Result<Self> {
        if ids.len() != scores.len() {
            return Err(Error::Eval(format!("{} ids for {} scores", ids.len(), scores.len())));
        }
        let roc = roc_auc(&scores, &labels)?;
        let (fp_ids, fn_ids) = classify_errors(&ids, &scores, &labels, threshold);
        Ok(Self {
            auc: roc.auc,
            roc_points: roc.points,
            fp_ids,
            fn_ids,
            threshold,
            n_pos: roc.n_pos,
            n_neg: roc.n_neg,
            ids,
            scores,
            labels,
        })
    }

    /// `auc,n_pos,n_neg,threshold` header plus one row.
    pub fn write_summary(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
        w.write_record(["auc", "n_pos", "n_neg", "threshold"]).map_err(csv_err(path))?;
        w.write_record([
            format!("{}", self.auc),
            self.n_pos.to_string(),
            self.n_neg.to_string(),
            format!("{}", self.threshold),
        ])
        .map_err(csv_err(path))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// `clip_id,score,label,decision`, one row per clip.
    pub fn write_clips(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
        w.write_record(["clip_id", "score", "label", "decision"]).map_err(csv_err(path))?;
        for ((id, s), l) in self.ids.iter().zip(&self.scores).zip(&self.labels) {
            w.write_record([
                id.clone(),
                format!("{s}"),
                u8::from(*l).to_string(),
                u8::from(*s > self.threshold).to_string(),
            ])
            .map_err(csv_err(path))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// `fpr,tpr` points of the ROC curve.
    pub fn write_roc(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
        w.write_record(["fpr", "tpr"]).map_err(csv_err(path))?;
        for (x, y) in &self.roc_points {
            w.write_record([format!("{x}"), format!("{y}")]).map_err(csv_err(path))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// One clip id per line.
    pub fn write_id_list(ids: &[String], path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for id in ids {
            writeln!(out, "{id}").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Writes `summary.csv`, `clips.csv`, `roc.csv`, `false_positives.txt` and
    /// `false_negatives.txt` into `dir`.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.write_summary(&dir.join("summary.csv"))?;
        self.write_clips(&dir.join("clips.csv"))?;
        self.write_roc(&dir.join("roc.csv"))?;
        Self::write_id_list(&self.fp_ids, &dir.join("false_positives.txt"))?;
        Self::write_id_list(&self.fn_ids, &dir.join("false_negatives.txt"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn threshold_tie_is_absent() {
        let (fp, fn_) = classify_errors(&ids(2), &[0.5, 0.5], &[true, false], 0.5);
        assert!(fp.is_empty());
        assert_eq!(fn_, vec!["c0".to_string()]);
    }

    #[test]
    fn correct_side_gives_no_errors() {
        let (fp, fn_) = classify_errors(&ids(4), &[0.9, 0.51, 0.1, 0.5], &[true, true, false, false], 0.5);
        assert!(fp.is_empty() && fn_.is_empty());
    }

    #[test]
    fn report_files() {
        let dir = tempfile::tempdir().unwrap();
        let r = EvalReport::new(ids(4), vec![0.9, 0.2, 0.7, 0.6], vec![true, false, false, true], 0.5).unwrap();
        r.write_all(dir.path()).unwrap();
        let clips = std::fs::read_to_string(dir.path().join("clips.csv")).unwrap();
        assert!(clips.starts_with("clip_id,score,label,decision\nc0,0.9,1,1\n"), "{clips}");
        let fps = std::fs::read_to_string(dir.path().join("false_positives.txt")).unwrap();
        assert_eq!(fps, "c2\n");
    }
}
