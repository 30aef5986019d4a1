//! Binary checkpoints, little-endian:
//!
//! | field | type |
//! |---|---|
//! | magic `IIRN` | 4 bytes |
//! | version | u32 |
//! | F, D, N | u32 each |
//! | parameter count P | u64 |
//! | seed, step | u64 each |
//! | parameters | P × f32 |
//! | first, second moments | P × f32 each |
//! | CRC-32 of everything above | u32 |

use std::path::Path;

use super::model::{MlpModel, MlpShape};
use super::train::TrainState;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"IIRN";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 * 4 + 8 * 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: MlpModel<f32>,
    pub state: TrainState,
    pub seed: u64,
}

pub fn encode_checkpoint(model: &MlpModel<f32>, state: &TrainState, seed: u64) -> Vec<u8> {
    let s = model.shape();
    let p = model.params();
    let mut out = Vec::with_capacity(HEADER_LEN + 12 * p.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for d in [s.input_dim, s.hidden_dim, s.order] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&(p.len() as u64).to_le_bytes());
    out.extend_from_slice(&seed.to_le_bytes());
    out.extend_from_slice(&state.step.to_le_bytes());
    for arr in [p, &state.m[..], &state.v[..]] {
        for v in arr {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(corrupt(format!("truncated: {} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != FORMAT_VERSION {
        return Err(corrupt(format!("unsupported version {version}, expected {FORMAT_VERSION}")));
    }
    let shape = MlpShape::new(u32_at(8) as usize, u32_at(12) as usize, u32_at(16) as usize)?;
    let count = u64_at(20);
    let seed = u64_at(28);
    let step = u64_at(36);
    if count != shape.param_count() as u64 {
        return Err(corrupt(format!(
            "parameter count {count} does not match the architecture ({})",
            shape.param_count()
        )));
    }
    let n = count as usize;
    let expected = HEADER_LEN + 12 * n + 4;
    if bytes.len() != expected {
        return Err(corrupt(format!("truncated or padded: {} bytes, expected {expected}", bytes.len())));
    }
    let body = &bytes[..expected - 4];
    let stored = u32::from_le_bytes(bytes[expected - 4..].try_into().unwrap());
    let actual = crc32fast::hash(body);
    if stored != actual {
        return Err(corrupt(format!("checksum mismatch: stored {stored:08x}, computed {actual:08x}")));
    }
    let floats = |k: usize| -> Vec<f32> {
        let start = HEADER_LEN + 4 * n * k;
        bytes[start..start + 4 * n]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect()
    };
    let model = MlpModel::from_params(shape, floats(0))?;
    Ok(Checkpoint {
        model,
        state: TrainState {
            step,
            m: floats(1),
            v: floats(2),
        },
        seed,
    })
}

pub fn save_checkpoint(model: &MlpModel<f32>, state: &TrainState, seed: u64, path: &Path) -> Result<()> {
    std::fs::write(path, encode_checkpoint(model, state, seed)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
