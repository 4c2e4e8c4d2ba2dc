//! SpectralField serialization: a JSON form and the compact `SPF1` binary form.

use super::{Mode, SpectralField};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

const MAGIC: &[u8; 4] = b"SPF1";

/// On-disk encoding of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldFormat {
    /// `{dim, cutoff, modes: [[[k…], re, im], …]}`.
    Json,
    /// Little-endian: magic `SPF1`, u32 dim, u32 cutoff, u64 count, then per
    /// mode i32×dim followed by f64 re, f64 im.
    Binary,
}

impl FieldFormat {
    /// `.json` → JSON, anything else → binary.
    pub fn from_path(path: &Path) -> FieldFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => FieldFormat::Json,
            _ => FieldFormat::Binary,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FieldJson {
    dim: usize,
    cutoff: u32,
    modes: Vec<(Vec<i32>, f64, f64)>,
}

impl SpectralField {
    pub fn to_json(&self) -> Result<String> {
        let doc = FieldJson {
            dim: self.dim(),
            cutoff: self.cutoff(),
            modes: self
                .iter()
                .map(|(m, c)| (m.components(self.dim()).to_vec(), c.re, c.im))
                .collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<SpectralField> {
        let doc: FieldJson = serde_json::from_str(s)?;
        let mut u = SpectralField::zeros(doc.dim, doc.cutoff)?;
        for (k, re, im) in doc.modes {
            if k.len() != doc.dim {
                return Err(Error::Format(format!("mode {k:?} does not have {} components", doc.dim)));
            }
            u.set(&Mode::new(&k), Complex64::new(re, im))
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        check_finite(u)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let dim = self.dim();
        let mut out = Vec::with_capacity(20 + self.len() * (4 * dim + 16));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(dim as u32).to_le_bytes());
        out.extend_from_slice(&self.cutoff().to_le_bytes());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for (m, c) in self.iter() {
            for &k in m.components(dim) {
                out.extend_from_slice(&k.to_le_bytes());
            }
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<SpectralField> {
        let short = || Error::Format("truncated SPF1 data".into());
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let s = bytes.get(pos..pos + n).ok_or_else(short)?;
            pos += n;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(Error::Format("missing SPF1 magic".into()));
        }
        let dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let cutoff = u32::from_le_bytes(take(4)?.try_into().unwrap());
        let count = u64::from_le_bytes(take(8)?.try_into().unwrap());
        let mut u = SpectralField::zeros(dim, cutoff).map_err(|e| Error::Format(e.to_string()))?;
        if count > u.len() as u64 {
            return Err(Error::Format(format!("{count} modes exceed the ball of radius {cutoff}")));
        }
        for _ in 0..count {
            let mut k = [0i32; 3];
            for c in k.iter_mut().take(dim) {
                *c = i32::from_le_bytes(take(4)?.try_into().unwrap());
            }
            let re = f64::from_le_bytes(take(8)?.try_into().unwrap());
            let im = f64::from_le_bytes(take(8)?.try_into().unwrap());
            u.set(&Mode(k), Complex64::new(re, im))
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        if pos != bytes.len() {
            return Err(Error::Format("trailing bytes after SPF1 payload".into()));
        }
        check_finite(u)
    }
}

fn check_finite(u: SpectralField) -> Result<SpectralField> {
    if u.is_finite() {
        Ok(u)
    } else {
        Err(Error::Format("non-finite amplitude".into()))
    }
}

/// Writes `u` atomically in the given format.
pub fn write_field(path: &Path, u: &SpectralField, format: FieldFormat) -> Result<()> {
    let bytes = match format {
        FieldFormat::Json => u.to_json()?.into_bytes(),
        FieldFormat::Binary => u.to_bytes(),
    };
    crate::report::write_atomic(path, &bytes)
}

/// Reads a field, choosing the format by extension.
pub fn read_field(path: &Path) -> Result<SpectralField> {
    let bytes = std::fs::read(path)?;
    match FieldFormat::from_path(path) {
        FieldFormat::Json => SpectralField::from_json(
            std::str::from_utf8(&bytes).map_err(|e| Error::Format(e.to_string()))?,
        ),
        FieldFormat::Binary => SpectralField::from_bytes(&bytes),
    }
}
