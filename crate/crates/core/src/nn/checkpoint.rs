//! Binary model checkpoints.
//!
//! ```text
//! magic "CBRNNCKP" | version u32
//! config: u32 length + JSON bytes
//! u32 group count, per group: u32 name length + name, u32 rank, rank x u64 dims, f64 values
//! u32 stats count, per stats: u8 initialized, u32 channels, f64 means, f64 variances
//! ```
//!
//! Integers and floats are little-endian; a reload reproduces inference
//! outputs bit for bit.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::config::CbrnnConfig;
use super::layers::RunningStats;
use super::model::CbrnnModel;
use super::params::{ParamGroup, ParamStore};

const MAGIC: &[u8; 8] = b"CBRNNCKP";
const VERSION: u32 = 1;

pub fn encode_checkpoint(model: &CbrnnModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let cfg = serde_json::to_vec(model.config()).expect("config serializes");
    out.extend_from_slice(&(cfg.len() as u32).to_le_bytes());
    out.extend_from_slice(&cfg);
    let groups = &model.params().groups;
    out.extend_from_slice(&(groups.len() as u32).to_le_bytes());
    for g in groups {
        out.extend_from_slice(&(g.name.len() as u32).to_le_bytes());
        out.extend_from_slice(g.name.as_bytes());
        out.extend_from_slice(&(g.shape.len() as u32).to_le_bytes());
        for &d in &g.shape {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in &g.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let stats = model.bn_stats();
    out.extend_from_slice(&(stats.len() as u32).to_le_bytes());
    for s in stats {
        out.push(u8::from(s.initialized));
        out.extend_from_slice(&(s.mean.len() as u32).to_le_bytes());
        for v in s.mean.iter().chain(&s.var) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(format!(
                "truncated: needed {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            )),
        }
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> std::result::Result<Vec<f64>, String> {
        let raw = self.take(n.checked_mul(8).ok_or("length overflow")?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

fn decode_inner(bytes: &[u8]) -> std::result::Result<(CbrnnConfig, ParamStore, Vec<RunningStats>), String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err("not a model checkpoint (bad magic)".into());
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(format!("unsupported checkpoint version {version}, expected {VERSION}"));
    }
    let len = r.u32()? as usize;
    let cfg: CbrnnConfig =
        serde_json::from_slice(r.take(len)?).map_err(|e| format!("config: {e}"))?;
    let n_groups = r.u32()? as usize;
    let mut params = ParamStore::default();
    for _ in 0..n_groups {
        let len = r.u32()? as usize;
        let name = String::from_utf8(r.take(len)?.to_vec()).map_err(|e| format!("group name: {e}"))?;
        let rank = r.u32()? as usize;
        let shape = (0..rank)
            .map(|_| r.u64().map(|d| d as usize))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let count = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).ok_or("shape overflow")?;
        let values = r.f64s(count)?;
        params.groups.push(ParamGroup { name, shape, values });
    }
    let n_stats = r.u32()? as usize;
    let mut stats = Vec::with_capacity(n_stats.min(1024));
    for _ in 0..n_stats {
        let initialized = r.take(1)?[0] != 0;
        let ch = r.u32()? as usize;
        let mean = r.f64s(ch)?;
        let var = r.f64s(ch)?;
        stats.push(RunningStats { mean, var, initialized });
    }
    if r.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    Ok((cfg, params, stats))
}

pub fn decode_checkpoint(bytes: &[u8], path: &Path) -> Result<CbrnnModel> {
    let (cfg, params, stats) = decode_inner(bytes).map_err(|detail| Error::Checkpoint {
        path: path.to_path_buf(),
        detail,
    })?;
    CbrnnModel::from_parts(cfg, params, stats).map_err(|e| Error::Checkpoint {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

pub fn save_checkpoint(model: &CbrnnModel, path: &Path) -> Result<()> {
    fs::write(path, encode_checkpoint(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<CbrnnModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes, path)
}
