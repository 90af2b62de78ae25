//! Binary field snapshots.
//!
//! Layout, all little endian:
//! `b"SQGF"`, `u32` version (1), `u32` M, `u32` components (1, 2 or 4), `f64` spacing,
//! then for each component and each `k1` in `-M/2..M/2`, each `k2` in `-M/2..M/2`:
//! `f64` real part, `f64` imaginary part.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::field::{Rank, SpectralField};
use super::lattice::FrequencyLattice;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SQGF";
const VERSION: u32 = 1;

fn natural_order(lat: &FrequencyLattice) -> impl Iterator<Item = usize> + '_ {
    let half = (lat.m() / 2) as i64;
    (-half..half).flat_map(move |k1| (-half..half).map(move |k2| lat.index_of([k1, k2]).unwrap()))
}

pub fn write_snapshot<W: Write>(f: &SpectralField, mut w: W) -> Result<()> {
    let lat = f.lattice();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(lat.m() as u32).to_le_bytes())?;
    w.write_all(&(f.rank().components() as u32).to_le_bytes())?;
    w.write_all(&lat.spacing().to_le_bytes())?;
    let mut buf = Vec::with_capacity(lat.len() * 16);
    for c in 0..f.rank().components() {
        buf.clear();
        let comp = f.component(c);
        for idx in natural_order(lat) {
            buf.extend_from_slice(&comp[idx].re.to_le_bytes());
            buf.extend_from_slice(&comp[idx].im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| Error::Snapshot(format!("truncated snapshot: {e}")))?;
    Ok(b)
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<SpectralField> {
    if &read_array::<4, _>(&mut r)? != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let m = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let ncomp = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let spacing = f64::from_le_bytes(read_array(&mut r)?);
    let rank = Rank::from_components(ncomp)
        .ok_or_else(|| Error::Snapshot(format!("bad component count {ncomp}")))?;
    let lat = FrequencyLattice::new(m, spacing)?;
    let mut data = vec![Complex64::default(); lat.len() * ncomp];
    let order: Vec<usize> = natural_order(&lat).collect();
    let mut raw = vec![0u8; lat.len() * 16];
    for c in 0..ncomp {
        r.read_exact(&mut raw)
            .map_err(|e| Error::Snapshot(format!("truncated coefficients: {e}")))?;
        for (pos, &idx) in order.iter().enumerate() {
            let re = f64::from_le_bytes(raw[pos * 16..pos * 16 + 8].try_into().unwrap());
            let im = f64::from_le_bytes(raw[pos * 16 + 8..pos * 16 + 16].try_into().unwrap());
            data[c * lat.len() + idx] = Complex64::new(re, im);
        }
    }
    SpectralField::from_coefficients(lat, rank, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_layout() {
        let lat = FrequencyLattice::new(8, 0.25).unwrap();
        let f = SpectralField::sine(lat, [1, -2], 3.0).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&f, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 24 + 64 * 16);
        assert_eq!(&bytes[..4], b"SQGF");
        // (k1, k2) = (1, -2) sits at natural position (1 + 4) * 8 + (-2 + 4).
        let pos = 24 + ((5 * 8 + 2) * 16);
        let im = f64::from_le_bytes(bytes[pos + 8..pos + 16].try_into().unwrap());
        assert_eq!(im, -1.5);
        let g = read_snapshot(bytes.as_slice()).unwrap();
        assert_eq!(f, g);
        assert!(read_snapshot(&bytes[..30]).is_err());
    }
}
