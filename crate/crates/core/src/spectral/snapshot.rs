//! Binary field snapshots.
//!
//! Layout (all little-endian): magic `b"CGLF"`, version `u32`, `d` as `u32`,
//! `n` as `u32`, Sobolev index `s` as `f64`, then `n^d` physical samples in
//! row-major order, each written as interleaved `(re, im)` `f64` pairs.

use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{CglError, Result};
use crate::scalar::Real;
use crate::spectral::field::SpectralField;
use crate::spectral::grid::TorusGrid;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"CGLF";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn write_snapshot<T: Real, W: Write>(w: &mut W, u: &SpectralField<T>, s: f64) -> Result<()> {
    let grid = u.grid();
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.points_per_dim() as u32).to_le_bytes())?;
    w.write_all(&s.to_le_bytes())?;
    for c in u.physical() {
        w.write_all(&c.re.as_f64().to_le_bytes())?;
        w.write_all(&c.im.as_f64().to_le_bytes())?;
    }
    Ok(())
}

/// Reads a snapshot back, returning the field and its recorded Sobolev index.
pub fn read_snapshot<T: Real, R: Read>(r: &mut R) -> Result<(SpectralField<T>, f64)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(CglError::Snapshot("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != SNAPSHOT_VERSION {
        return Err(CglError::Snapshot(format!("unsupported version {version}")));
    }
    let d = read_u32(r)? as usize;
    let n = read_u32(r)? as usize;
    let s = read_f64(r)?;
    let grid = TorusGrid::<T>::new(d, n)?;
    let mut samples = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        samples.push(Complex::new(T::of(re), T::of(im)));
    }
    Ok((SpectralField::from_physical(&grid, &samples)?, s))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_and_round_trip() {
        let g = TorusGrid::<f64>::new(2, 8).unwrap();
        let u = SpectralField::from_fn(&g, |x| Complex::new(x[0].cos(), (x[1] * 2.0).sin()));
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &u, 2.0).unwrap();
        assert_eq!(&buf[..4], b"CGLF");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 2.0);
        assert_eq!(buf.len(), 24 + 64 * 16);
        let phys = u.physical();
        assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), phys[0].re);
        let (v, s) = read_snapshot::<f64, _>(&mut buf.as_slice()).unwrap();
        assert_eq!(s, 2.0);
        for (a, b) in u.coeffs().iter().zip(v.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn bad_magic_rejected() {
        let buf = b"XXXX\x01\x00\x00\x00".to_vec();
        assert!(matches!(read_snapshot::<f64, _>(&mut buf.as_slice()), Err(CglError::Snapshot(_))));
    }
}
