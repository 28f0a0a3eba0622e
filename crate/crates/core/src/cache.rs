//! Binary feature cache.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes   "BADFEAT\n"
//! version    u32       currently 1
//! id_len     u32
//! id         id_len bytes, UTF-8
//! mbe shape  3 x u32   (time, bands, 1)
//! dom shape  3 x u32   (time, slots, 2)
//! payload    f64 LE    mbe values, then dom-freq values, row-major
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeaturePair;
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 8] = b"BADFEAT\n";
pub const VERSION: u32 = 1;

pub fn encode_feature_cache(pair: &FeaturePair) -> Vec<u8> {
    let id = pair.clip_id.as_bytes();
    let payload = pair.mbe.len() + pair.domfreq.len();
    let mut out = Vec::with_capacity(8 + 4 + 4 + id.len() + 24 + payload * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(id.len() as u32).to_le_bytes());
    out.extend_from_slice(id);
    for dim in pair.mbe.shape().iter().chain(pair.domfreq.shape().iter()) {
        out.extend_from_slice(&(*dim as u32).to_le_bytes());
    }
    for v in pair.mbe.data().iter().chain(pair.domfreq.data()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_feature_cache(bytes: &[u8], path: &Path) -> Result<FeaturePair> {
    let bad = |detail: String| Error::Cache {
        path: path.to_path_buf(),
        detail,
    };
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(8).ok_or_else(|| bad("file shorter than magic".into()))?;
    if magic != MAGIC {
        return Err(bad("bad magic bytes".into()));
    }
    let version = cur.u32().ok_or_else(|| bad("missing version".into()))?;
    if version != VERSION {
        return Err(Error::CacheVersion {
            path: path.to_path_buf(),
            expected: VERSION,
            found: version,
        });
    }
    let id_len = cur.u32().ok_or_else(|| bad("missing id length".into()))? as usize;
    let id = cur.take(id_len).ok_or_else(|| bad("truncated id".into()))?;
    let clip_id = String::from_utf8(id.to_vec()).map_err(|_| bad("id is not UTF-8".into()))?;
    let mut dims = [0usize; 6];
    for d in &mut dims {
        *d = cur.u32().ok_or_else(|| bad("truncated shape header".into()))? as usize;
    }
    let mbe_shape = [dims[0], dims[1], dims[2]];
    let dom_shape = [dims[3], dims[4], dims[5]];
    let n_mbe: usize = mbe_shape.iter().product();
    let n_dom: usize = dom_shape.iter().product();
    let expected = (n_mbe + n_dom) * 8;
    let rest = &bytes[cur.pos..];
    if rest.len() != expected {
        return Err(Error::CacheTruncated {
            path: path.to_path_buf(),
            expected,
            actual: rest.len(),
        });
    }
    let mut values = rest
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")));
    let mbe: Vec<f64> = values.by_ref().take(n_mbe).collect();
    let dom: Vec<f64> = values.collect();
    FeaturePair::new(
        clip_id,
        Tensor::from_vec(mbe_shape, mbe)?,
        Tensor::from_vec(dom_shape, dom)?,
    )
}

pub fn write_feature_cache(pair: &FeaturePair, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_feature_cache(pair)).map_err(|e| Error::io(path, e))
}

pub fn read_feature_cache(path: impl AsRef<Path>) -> Result<FeaturePair> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_feature_cache(&bytes, path)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }
}
