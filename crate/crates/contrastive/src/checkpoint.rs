//! Checkpoint files: `GCLP`, a little-endian u32 format version, a u32
//! header length, a JSON header listing tensor names and shapes, then every
//! tensor as little-endian f64 in header order.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::Params;
use crate::train::Model;

pub const MAGIC: &[u8; 4] = b"GCLP";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("checkpoint version {found}, this build reads {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub shape: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub temperature: f64,
    pub tensors: Vec<TensorInfo>,
}

fn all_tensors(m: &Model) -> Vec<(&'static str, &crate::nn::Mat)> {
    let mut v = m.vision.tensors();
    v.extend(m.text.tensors());
    v
}

pub fn write_checkpoint<W: Write>(
    m: &Model,
    temperature: f64,
    mut w: W,
) -> Result<(), CheckpointError> {
    let tensors = all_tensors(m);
    let header = Header {
        temperature,
        tensors: tensors
            .iter()
            .map(|(n, t)| TensorInfo {
                name: n.to_string(),
                shape: [t.nrows(), t.ncols()],
            })
            .collect(),
    };
    let json =
        serde_json::to_vec(&header).map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    let mut buf = Vec::with_capacity(8 * tensors.iter().map(|(_, t)| t.len()).sum::<usize>());
    for (_, t) in &tensors {
        for v in t.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Reads a checkpoint into `Model` shapes; returns the model and the
/// stored temperature.
pub fn read_checkpoint<R: Read>(mut r: R) -> Result<(Model, f64), CheckpointError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::VersionMismatch {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let len = read_u32(&mut r)? as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)?;
    let header: Header =
        serde_json::from_slice(&json).map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    let mut model = Model::init(0);
    let expected: Vec<TensorInfo> = all_tensors(&model)
        .iter()
        .map(|(n, t)| TensorInfo {
            name: n.to_string(),
            shape: [t.nrows(), t.ncols()],
        })
        .collect();
    if header.tensors != expected {
        return Err(CheckpointError::Malformed(
            "tensor layout differs from this build".into(),
        ));
    }
    let mut targets = model.vision.tensors_mut();
    targets.extend(model.text.tensors_mut());
    let mut b = [0u8; 8];
    for t in targets {
        for v in t.iter_mut() {
            r.read_exact(&mut b)?;
            *v = f64::from_le_bytes(b);
        }
    }
    Ok((model, header.temperature))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_version_check() {
        let m = Model::init(7);
        let mut bytes = Vec::new();
        write_checkpoint(&m, 0.07, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"GCLP");
        let (back, tau) = read_checkpoint(&bytes[..]).unwrap();
        assert_eq!(back, m);
        assert_eq!(tau, 0.07);
        bytes[4] = 9;
        assert!(matches!(
            read_checkpoint(&bytes[..]),
            Err(CheckpointError::VersionMismatch {
                found: 9,
                expected: 1
            })
        ));
        assert!(matches!(
            read_checkpoint(&b"NOPE...."[..]),
            Err(CheckpointError::BadMagic)
        ));
    }
}
