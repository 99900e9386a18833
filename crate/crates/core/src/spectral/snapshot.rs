//! Binary field snapshots.
//!
//! Layout, all integers and floats little endian:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 8     | magic `GMNSEFLD`                          |
//! | 4     | format version (u32, currently 1)         |
//! | 4     | points per direction `n` (u32)            |
//! | 8     | retained mode count (u64)                 |
//! | 48·m  | per mode: `(re, im)` for components 1..3  |
//!
//! Modes follow the grid's storage order: lexicographic in `(k1, k2, k3)`,
//! each component from `-K` to `K` with `K = (n - 1) / 3`.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::field::{Mode, SpectralField};
use super::grid::Grid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"GMNSEFLD";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, u: &SpectralField) -> Result<()> {
    let g = u.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&(g.mode_count() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(48 * g.mode_count());
    for c in u.coeffs() {
        for z in c {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn snapshot_bytes(u: &SpectralField) -> Vec<u8> {
    let mut out = Vec::new();
    write_snapshot(&mut out, u).expect("writing to a Vec cannot fail");
    out
}

/// Reads a snapshot, building (or reusing) the grid. Coefficients are taken
/// verbatim; a file whose coefficients are not conjugate symmetric is
/// rejected.
pub fn read_snapshot<R: Read>(mut r: R, grid: Option<&Arc<Grid>>) -> Result<SpectralField> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;

    let grid = match grid {
        Some(g) if g.n() == n => Arc::clone(g),
        Some(g) => return Err(Error::GridMismatch(g.n(), n)),
        None => Grid::new(n)?,
    };
    if count != grid.mode_count() {
        return Err(Error::Format(format!(
            "mode count {count} does not match n = {n} ({} modes)",
            grid.mode_count()
        )));
    }
    let mut buf = vec![0u8; 48 * count];
    r.read_exact(&mut buf)?;
    let coeffs: Vec<Mode> = buf
        .chunks_exact(48)
        .map(|m| {
            [0, 1, 2].map(|d| {
                let re = f64::from_le_bytes(m[16 * d..16 * d + 8].try_into().unwrap());
                let im = f64::from_le_bytes(m[16 * d + 8..16 * d + 16].try_into().unwrap());
                Complex64::new(re, im)
            })
        })
        .collect();
    let field = SpectralField::from_raw(&grid, coeffs);
    if !field.is_hermitian() {
        return Err(Error::Format("coefficients are not conjugate symmetric".into()));
    }
    Ok(field)
}
