use std::fs;
use std::path::{Path, PathBuf};

use super::DataMatrix;
use crate::error::{Error, Result};

/// Sidecar path holding the `n p seed` header for a binary dump.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".header");
    PathBuf::from(name)
}

/// Write the matrix as row-major little-endian `f64` plus an `n p seed` sidecar.
pub fn write_dump(x: &DataMatrix, seed: u64, path: &Path) -> std::io::Result<()> {
    let mut bytes = Vec::with_capacity(8 * x.n() * x.p());
    for i in 0..x.n() {
        for j in 0..x.p() {
            bytes.extend_from_slice(&x.values[(i, j)].to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    fs::write(sidecar_path(path), format!("{} {} {}\n", x.n(), x.p(), seed))
}

/// Read a dump back, returning the matrix and its recorded seed.
pub fn read_dump(path: &Path) -> Result<(DataMatrix, u64)> {
    let io = |e: std::io::Error| Error::Argument(format!("{}: {e}", path.display()));
    let header = fs::read_to_string(sidecar_path(path)).map_err(io)?;
    let fields: Vec<u64> = header
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| Error::Argument(format!("bad dump header field {s:?}"))))
        .collect::<Result<_>>()?;
    let [n, p, seed] = fields[..] else {
        return Err(Error::Argument("dump header must be `n p seed`".into()));
    };
    let bytes = fs::read(path).map_err(io)?;
    let (n, p) = (n as usize, p as usize);
    if bytes.len() != 8 * n * p {
        return Err(Error::Dimension(format!("dump holds {} bytes, header says {n}x{p}", bytes.len())));
    }
    let values: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((DataMatrix::from_rows(n, p, &values)?, seed))
}
