//! Binary integral dump.
//!
//! Layout, all little-endian: magic `HFLABINT`, `u32` format version, `u64`
//! n, `u32` l_max, `u8` convention (0 paper, 1 standard), then the overlap,
//! kinetic and nuclear matrices row-major as `f64`, then `u64` count and the
//! unique two-electron integrals in canonical order (`i ≥ j`, `k ≥ l`,
//! `ij ≥ kl`).

use std::io::{self, Read, Write};

use hflab_core::integrals::EriTensor;
use hflab_core::{Convention, IntegralTables};
use nalgebra::DMatrix;

const MAGIC: &[u8; 8] = b"HFLABINT";
const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not an integral dump (bad magic)")]
    BadMagic,
    #[error("unsupported dump version {0}")]
    Version(u32),
    #[error("unknown convention tag {0}")]
    Convention(u8),
    #[error("unique-integral count {found} does not match n = {n}")]
    Count { n: usize, found: u64 },
}

pub fn write_tables<W: Write>(tables: &IntegralTables, mut w: W) -> io::Result<()> {
    let n = tables.n();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&tables.l_max.to_le_bytes())?;
    let tag: u8 = match tables.convention {
        Convention::Paper => 0,
        Convention::Standard => 1,
    };
    w.write_all(&[tag])?;
    for m in [&tables.overlap, &tables.kinetic, &tables.nuclear] {
        for i in 0..n {
            for j in 0..n {
                w.write_all(&m[(i, j)].to_le_bytes())?;
            }
        }
    }
    let unique = tables.eri.unique();
    w.write_all(&(unique.len() as u64).to_le_bytes())?;
    for v in unique {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn to_bytes(tables: &IntegralTables) -> Vec<u8> {
    let mut out = Vec::new();
    write_tables(tables, &mut out).expect("writing to a Vec cannot fail");
    out
}

fn read_array<const K: usize, R: Read>(r: &mut R) -> io::Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

pub fn read_tables<R: Read>(mut r: R) -> Result<IntegralTables, DumpError> {
    if &read_array::<8, _>(&mut r)? != MAGIC {
        return Err(DumpError::BadMagic);
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(DumpError::Version(version));
    }
    let n = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let l_max = u32::from_le_bytes(read_array(&mut r)?);
    let convention = match read_array::<1, _>(&mut r)?[0] {
        0 => Convention::Paper,
        1 => Convention::Standard,
        t => return Err(DumpError::Convention(t)),
    };
    let mut matrix = || -> io::Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = read_f64(&mut r)?;
            }
        }
        Ok(m)
    };
    let overlap = matrix()?;
    let kinetic = matrix()?;
    let nuclear = matrix()?;
    let count = u64::from_le_bytes(read_array(&mut r)?);
    let pairs = n * (n + 1) / 2;
    if count != (pairs * (pairs + 1) / 2) as u64 {
        return Err(DumpError::Count { n, found: count });
    }
    let unique = (0..count).map(|_| read_f64(&mut r)).collect::<io::Result<Vec<f64>>>()?;
    let eri = EriTensor::from_unique(n, &unique).ok_or(DumpError::Count { n, found: count })?;
    Ok(IntegralTables { convention, l_max, overlap, kinetic, nuclear, eri })
}
