//! Little-endian checkpoint layout:
//!
//! ```text
//! "MSNS" | version u32 | n u32 | L f64 | t f64 | nu f64 | epsilon f64 |
//! config_hash u64 | 3·n³ f64 samples (component-major) | CRC32 u32
//! ```
//!
//! The CRC covers every byte before it.

use std::path::Path;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::field::RealVectorField;
use crate::grid::Grid;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"MSNS";
pub const CHECKPOINT_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 4 + 8 * 4 + 8;

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub t: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub config_hash: u64,
    pub field: RealVectorField,
}

pub(crate) fn encode(c: &Checkpoint) -> Vec<u8> {
    let grid = c.field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * c.field.data().len() + 4);
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    for v in [grid.length(), c.t, c.nu, c.epsilon] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&c.config_hash.to_le_bytes());
    for v in c.field.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub(crate) fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < 4 {
        return Err(Error::CheckpointLayout(format!("file is only {} bytes", bytes.len())));
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::CheckpointMagic(magic));
    }
    if bytes.len() < 8 {
        return Err(Error::CheckpointLayout(format!("file is only {} bytes", bytes.len())));
    }
    let version = u32_at(bytes, 4);
    if version != CHECKPOINT_VERSION {
        return Err(Error::CheckpointVersion(version));
    }
    if bytes.len() < 12 {
        return Err(Error::CheckpointLayout(format!("file is only {} bytes", bytes.len())));
    }
    let (payload, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32_at(tail, 0);
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(Error::CheckpointCrc { stored, computed });
    }
    if payload.len() < HEADER_LEN {
        return Err(Error::CheckpointLayout("header is incomplete".into()));
    }
    let n = u32_at(payload, 8) as usize;
    let length = f64_at(payload, 12);
    let t = f64_at(payload, 20);
    let nu = f64_at(payload, 28);
    let epsilon = f64_at(payload, 36);
    let config_hash = u64::from_le_bytes(payload[44..52].try_into().expect("8 bytes"));
    let count = 3 * n * n * n;
    if payload.len() != HEADER_LEN + 8 * count {
        return Err(Error::CheckpointLayout(format!(
            "n = {n} needs {} sample bytes, found {}",
            8 * count,
            payload.len() - HEADER_LEN
        )));
    }
    let grid = Grid::new(n, length).map_err(|e| Error::CheckpointLayout(e.to_string()))?;
    let data = payload[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let field = RealVectorField::new(&grid, data).map_err(|e| Error::CheckpointLayout(e.to_string()))?;
    Ok(Checkpoint {
        t,
        nu,
        epsilon,
        config_hash,
        field,
    })
}

/// Atomically writes a checkpoint of `u` at time `t`.
pub fn write_checkpoint(
    u: &RealVectorField,
    t: f64,
    nu: f64,
    epsilon: f64,
    config_hash: u64,
    path: impl AsRef<Path>,
) -> Result<()> {
    let c = Checkpoint {
        t,
        nu,
        epsilon,
        config_hash,
        field: u.clone(),
    };
    write_atomic(path.as_ref(), &encode(&c))
}

/// Reads a checkpoint, checking magic, version and CRC in that order.
pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
