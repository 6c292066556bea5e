//! Binary checkpoints: magic `HMHD`, `u32` version, `u64` n, then `f64`
//! length, t, mu and gamma, then the spectral coefficients of u₀, u₁, u₂,
//! b₀, b₁, b₂ as interleaved real/imaginary `f64` pairs. Little-endian.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::dynamics::State;
use crate::fields::{GridSpec, VectorField};

pub const MAGIC: &[u8; 4] = b"HMHD";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 4 * 8;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic bytes)")]
    Header,
    #[error("unsupported checkpoint version {0} (expected {VERSION})")]
    Version(u32),
    #[error("checkpoint holds {got} bytes, header implies {expected}")]
    Size { expected: u64, got: u64 },
    #[error("invalid grid in checkpoint: {0}")]
    Grid(#[from] crate::fields::FieldError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub state: State,
    pub mu: f64,
    pub gamma: f64,
}

pub fn encode(state: &State, mu: f64, gamma: f64) -> Vec<u8> {
    let g = state.u.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 6 * g.len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.n() as u64).to_le_bytes());
    for v in [g.length(), state.t, mu, gamma] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for field in [&state.u, &state.b] {
        for comp in field.components() {
            for c in comp {
                out.extend_from_slice(&c.re.to_le_bytes());
                out.extend_from_slice(&c.im.to_le_bytes());
            }
        }
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

/// Decode a checkpoint; the grid gets the default dealias fraction since the
/// format does not store one.
pub fn decode(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(CheckpointError::Header);
    }
    if bytes.len() < 8 {
        return Err(CheckpointError::Size { expected: HEADER_LEN as u64, got: bytes.len() as u64 });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    if bytes.len() < HEADER_LEN {
        return Err(CheckpointError::Size { expected: HEADER_LEN as u64, got: bytes.len() as u64 });
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let expected = n
        .checked_pow(3)
        .and_then(|c| c.checked_mul(96))
        .and_then(|c| c.checked_add(HEADER_LEN as u64))
        .unwrap_or(u64::MAX);
    if bytes.len() as u64 != expected {
        return Err(CheckpointError::Size { expected, got: bytes.len() as u64 });
    }
    let (length, t, mu, gamma) = (f64_at(bytes, 16), f64_at(bytes, 24), f64_at(bytes, 32), f64_at(bytes, 40));
    let grid = GridSpec::new(n as usize, length, 2.0 / 3.0)?;
    let len = grid.len();
    let mut at = HEADER_LEN;
    let mut read_field = || -> Result<VectorField, CheckpointError> {
        let comps: [Vec<Complex64>; 3] = std::array::from_fn(|_| {
            (0..len)
                .map(|_| {
                    let c = Complex64::new(f64_at(bytes, at), f64_at(bytes, at + 8));
                    at += 16;
                    c
                })
                .collect()
        });
        Ok(VectorField::from_components(&grid, comps)?)
    };
    let u = read_field()?;
    let b = read_field()?;
    Ok(Checkpoint { state: State { u, b, t }, mu, gamma })
}

pub fn write_checkpoint(path: &Path, state: &State, mu: f64, gamma: f64) -> Result<(), CheckpointError> {
    Ok(fs::write(path, encode(state, mu, gamma))?)
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    decode(&fs::read(path)?)
}
