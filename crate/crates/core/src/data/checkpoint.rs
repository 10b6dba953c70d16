//! Binary parameter checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "LRNT"  u16 version  u64 graph digest  u32 record count
//! per record: u16 name length, name (UTF-8), u8 rank, u32 dims[rank], f32 values
//! ```
//!
//! Records are written in sorted name order, so equal parameters always
//! produce equal files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{CheckpointError, Error, Result};
use crate::graph::ModelParams;
use crate::tensor::Tensor;

pub const MAGIC: [u8; 4] = *b"LRNT";
pub const VERSION: u16 = 1;

pub fn encode_checkpoint(params: &ModelParams, digest: u64) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&digest.to_le_bytes());
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for (name, t) in params.iter() {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.push(t.rank() as u8);
        for &d in t.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in t.data() {
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
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or(CheckpointError::Truncated(what))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8, CheckpointError> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &'static str) -> Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

/// Parses a checkpoint, checking its digest against `expected_digest`
/// when given. Returns the parameters and the stored digest.
pub fn decode_checkpoint(
    bytes: &[u8],
    expected_digest: Option<u64>,
) -> Result<(ModelParams, u64), CheckpointError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4, "magic")?.try_into().unwrap();
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic(magic));
    }
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let digest = r.u64("digest")?;
    if let Some(expected) = expected_digest {
        if expected != digest {
            return Err(CheckpointError::DigestMismatch {
                expected,
                found: digest,
            });
        }
    }
    let count = r.u32("record count")?;
    let mut tensors = BTreeMap::new();
    for _ in 0..count {
        let len = r.u16("name length")? as usize;
        let name = std::str::from_utf8(r.take(len, "name")?)
            .map_err(|_| CheckpointError::Malformed("record name is not UTF-8".into()))?
            .to_string();
        let rank = r.u8("rank")? as usize;
        if rank == 0 {
            return Err(CheckpointError::Malformed(format!("`{name}` has rank 0")));
        }
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32("dims")? as usize);
        }
        let n = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| CheckpointError::Malformed(format!("`{name}` is too large")))?;
        let payload = r.take(n, "tensor payload")?;
        let values = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let t = Tensor::new(shape, values)
            .map_err(|e| CheckpointError::Malformed(format!("`{name}`: {e}")))?;
        if tensors.insert(name.clone(), t).is_some() {
            return Err(CheckpointError::Malformed(format!(
                "duplicate record `{name}`"
            )));
        }
    }
    if r.pos != bytes.len() {
        return Err(CheckpointError::Malformed(format!(
            "{} trailing bytes after the last record",
            bytes.len() - r.pos
        )));
    }
    Ok((ModelParams::from_map(tensors), digest))
}

pub fn save_checkpoint(params: &ModelParams, digest: u64, path: &Path) -> Result<()> {
    fs::write(path, encode_checkpoint(params, digest)).map_err(|e| Error::io(path, e))
}

/// Loads a checkpoint written for the graph with digest `expected_digest`.
pub fn load_checkpoint(path: &Path, expected_digest: u64) -> Result<ModelParams> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode_checkpoint(&bytes, Some(expected_digest))?.0)
}
