//! Binary checkpoint format.
//!
//! ```text
//! 0..4     b"ECGM"
//! 4..8     u32 LE format version (1)
//! 8..16    u64 LE header length H
//! 16..16+H UTF-8 JSON header
//! ...      payload: little-endian f32 tensors in manifest order
//! ```
//!
//! Manifest offsets are relative to the start of the payload.

use super::arch::{Arch, ModelSpec};
use super::network::Model;
use crate::error::{EcgError, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"ECGM";
pub const VERSION: u32 = 1;
const PREAMBLE: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub byte_offset: u64,
    pub byte_len: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub arch: Arch,
    pub input_length: usize,
    pub label_names: Vec<String>,
    pub tensors: Vec<TensorEntry>,
}

pub fn to_bytes(model: &Model) -> Vec<u8> {
    let mut tensors = Vec::with_capacity(model.params().len());
    let mut offset = 0u64;
    for (name, p) in model.tensors() {
        let byte_len = (p.len() * 4) as u64;
        tensors.push(TensorEntry {
            name: name.to_string(),
            shape: p.shape.clone(),
            byte_offset: offset,
            byte_len,
        });
        offset += byte_len;
    }
    let header = CheckpointHeader {
        arch: model.arch(),
        input_length: model.input_length(),
        label_names: model.label_names().to_vec(),
        tensors,
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(PREAMBLE + json.len() + offset as usize);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for p in model.params() {
        for v in &p.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Parses only the header, without materializing tensors.
pub fn read_header(bytes: &[u8]) -> Result<(CheckpointHeader, usize)> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(EcgError::Checkpoint("bad magic, not an ECGM checkpoint".into()));
    }
    if bytes.len() < PREAMBLE {
        return Err(EcgError::Checkpoint("truncated preamble".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(EcgError::Checkpoint(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let payload_start = usize::try_from(header_len)
        .ok()
        .and_then(|h| h.checked_add(PREAMBLE))
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| EcgError::Checkpoint("truncated header".into()))?;
    let header: CheckpointHeader = serde_json::from_slice(&bytes[PREAMBLE..payload_start])
        .map_err(|e| EcgError::Checkpoint(format!("malformed header: {e}")))?;
    Ok((header, payload_start))
}

pub fn from_bytes(bytes: &[u8]) -> Result<Model> {
    let (header, payload_start) = read_header(bytes)?;
    let payload = &bytes[payload_start..];
    let mut expected_offset = 0u64;
    let mut tensors = Vec::with_capacity(header.tensors.len());
    for entry in header.tensors {
        let count: usize = entry.shape.iter().product();
        if entry.byte_offset != expected_offset || entry.byte_len != (count * 4) as u64 {
            return Err(EcgError::Checkpoint(format!(
                "tensor {} has inconsistent manifest entry",
                entry.name
            )));
        }
        let end = entry.byte_offset + entry.byte_len;
        if end > payload.len() as u64 {
            return Err(EcgError::Checkpoint(format!(
                "truncated payload: tensor {} ends at byte {end}, payload has {}",
                entry.name,
                payload.len()
            )));
        }
        let raw = &payload[entry.byte_offset as usize..end as usize];
        let values: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        expected_offset = end;
        tensors.push((entry.name, entry.shape, values));
    }
    if expected_offset != payload.len() as u64 {
        return Err(EcgError::Checkpoint(format!(
            "{} trailing bytes after payload",
            payload.len() as u64 - expected_offset
        )));
    }
    let spec = ModelSpec::for_arch(header.arch, header.input_length, header.label_names)
        .map_err(|e| EcgError::Checkpoint(format!("invalid architecture in header: {e}")))?;
    Model::with_params(spec, tensors)
}

pub fn save_checkpoint(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_bytes(model)).map_err(|e| EcgError::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| {
        EcgError::Checkpoint(format!("cannot read {}: {e}", path.display()))
    })?;
    from_bytes(&bytes)
}
