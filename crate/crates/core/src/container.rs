//! Binary trajectory container.
//!
//! Layout (little endian): the magic bytes `PMEF`, a `u32` format version,
//! then `dims`, `n_t`, `n_x` as `u64` and `dt`, `h` as `f64`, followed by
//! `n_t · n_x^dims` samples as `f64` in time-major, row-major order.
//! The grid is assumed centred at the origin; the start time is not stored.

use std::io::{Read, Write};

use crate::error::{PmeError, Result};
use crate::grid::{Grid, SpaceTimeField, TimeSampling};

pub const MAGIC: &[u8; 4] = b"PMEF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 48;

pub fn write_trajectory<W: Write>(mut w: W, field: &SpaceTimeField) -> Result<()> {
    let g = field.grid;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u64).to_le_bytes())?;
    w.write_all(&(field.n_t() as u64).to_le_bytes())?;
    w.write_all(&(g.n() as u64).to_le_bytes())?;
    w.write_all(&field.dt.to_le_bytes())?;
    w.write_all(&g.h().to_le_bytes())?;
    let mut buf = Vec::with_capacity(field.values.len() * 8);
    for v in &field.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn take<const N: usize>(bytes: &[u8], at: &mut usize) -> Result<[u8; N]> {
    let end = *at + N;
    let slice = bytes
        .get(*at..end)
        .ok_or_else(|| PmeError::Format("truncated container".into()))?;
    *at = end;
    Ok(slice.try_into().expect("length checked"))
}

/// Reads a container; the result is labelled with nodal sampling starting at `t_start`.
pub fn read_trajectory<R: Read>(mut r: R, t_start: f64) -> Result<SpaceTimeField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut at = 0;
    if &take::<4>(&bytes, &mut at)? != MAGIC {
        return Err(PmeError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&bytes, &mut at)?);
    if version != VERSION {
        return Err(PmeError::Format(format!("unsupported version {version}")));
    }
    let dims = u64::from_le_bytes(take(&bytes, &mut at)?) as usize;
    let n_t = u64::from_le_bytes(take(&bytes, &mut at)?) as usize;
    let n_x = u64::from_le_bytes(take(&bytes, &mut at)?) as usize;
    let dt = f64::from_le_bytes(take(&bytes, &mut at)?);
    let h = f64::from_le_bytes(take(&bytes, &mut at)?);
    let grid = Grid::new(dims, h * n_x as f64, n_x)?;
    let count = n_t
        .checked_mul(grid.cells())
        .ok_or_else(|| PmeError::Format("header sizes overflow".into()))?;
    if bytes.len() != HEADER_LEN + 8 * count {
        return Err(PmeError::Format(format!(
            "expected {} sample bytes, found {}",
            8 * count,
            bytes.len() - HEADER_LEN
        )));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    SpaceTimeField::new(grid, t_start, dt, TimeSampling::Nodal, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = Grid::line(2.0, 8).unwrap();
        let st = SpaceTimeField::from_fn(g, 0.0, 0.25, 3, TimeSampling::Nodal, |t, x, _| t + x)
            .unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &st).unwrap();
        assert_eq!(&buf[..4], b"PMEF");
        assert_eq!(buf.len(), HEADER_LEN + 8 * 24);
        let back = read_trajectory(&buf[..], 0.0).unwrap();
        assert_eq!(back, st);
    }

    #[test]
    fn rejects_truncation() {
        let g = Grid::line(2.0, 8).unwrap();
        let st = SpaceTimeField::new(g, 0.0, 0.5, TimeSampling::Nodal, vec![0.0; 16]).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &st).unwrap();
        buf.pop();
        assert!(matches!(read_trajectory(&buf[..], 0.0), Err(PmeError::Format(_))));
    }
}
