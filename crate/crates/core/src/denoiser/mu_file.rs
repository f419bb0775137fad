use std::fs;
use std::path::Path;

use crate::{Error, Result};

pub const MU_MAGIC: &[u8; 8] = b"DGTVMU__";
pub const MU_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;
const KIND: &str = "mu file";

/// Per-patch, per-layer weights, stored patch-major. A single value applies
/// to every patch and layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MuTable {
    values: Vec<f32>,
}

impl MuTable {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("mu table is empty"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(format!(
                "mu values must be positive, got {v}"
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks the table against a run of `patches` patches and `layers` layers.
    pub fn check_layout(&self, patches: usize, layers: usize) -> Result<()> {
        if self.values.len() == 1 || self.values.len() == patches * layers {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "mu table has {} values, expected 1 or {} ({patches} patches x {layers} layers)",
                self.values.len(),
                patches * layers
            )))
        }
    }

    pub fn get(&self, patch: usize, layer: usize, layers: usize) -> f64 {
        if self.values.len() == 1 {
            f64::from(self.values[0])
        } else {
            f64::from(self.values[patch * layers + layer])
        }
    }
}

pub fn encode_mu(table: &MuTable) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * table.values.len());
    out.extend_from_slice(MU_MAGIC);
    out.extend_from_slice(&MU_VERSION.to_le_bytes());
    out.extend_from_slice(&(table.values.len() as u32).to_le_bytes());
    for v in &table.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_mu(bytes: &[u8]) -> Result<MuTable> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(KIND, "truncated header"));
    }
    if &bytes[..8] != MU_MAGIC {
        return Err(Error::format(KIND, "bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != MU_VERSION {
        return Err(Error::format(
            KIND,
            format!("unsupported version {version}"),
        ));
    }
    let count = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 4 * count {
        return Err(Error::format(
            KIND,
            format!(
                "payload holds {} bytes, header implies {}",
                payload.len(),
                4 * count
            ),
        ));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    MuTable::new(values)
}

pub fn load_mu(path: impl AsRef<Path>) -> Result<MuTable> {
    decode_mu(&fs::read(path)?)
}

pub fn write_mu(table: &MuTable, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_mu(table))?;
    Ok(())
}
