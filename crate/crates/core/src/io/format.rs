//! Dense binary matrix files.
//!
//! Layout: `rows: i32 LE`, `cols: i32 LE`, then `rows * cols` IEEE-754
//! doubles (LE) in row-major order. Zeros are written like any other value,
//! so a file is always exactly `8 + 8 * rows * cols` bytes long.

use std::fs;
use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

const HEADER_BYTES: usize = 8;

/// Serializes `a` into the binary layout.
pub fn write_matrix(a: &DenseMatrix) -> Result<Vec<u8>> {
    let (m, n) = a.shape();
    let (Ok(mi), Ok(ni)) = (i32::try_from(m), i32::try_from(n)) else {
        return Err(Error::invalid(format!(
            "{m}x{n} matrix does not fit the 32-bit header"
        )));
    };
    let mut out = Vec::with_capacity(HEADER_BYTES + 8 * m * n);
    out.extend_from_slice(&mi.to_le_bytes());
    out.extend_from_slice(&ni.to_le_bytes());
    for i in 0..m {
        for j in 0..n {
            out.extend_from_slice(&a[(i, j)].to_le_bytes());
        }
    }
    Ok(out)
}

/// Parses the binary layout. `path` only labels errors.
pub fn read_matrix(bytes: &[u8], path: &Path) -> Result<DenseMatrix> {
    let fail = |offset: usize, msg: String| Error::Format {
        path: path.to_path_buf(),
        offset: offset as u64,
        msg,
    };
    if bytes.len() < HEADER_BYTES {
        return Err(fail(
            bytes.len(),
            format!("truncated header: {} of {HEADER_BYTES} bytes", bytes.len()),
        ));
    }
    let rows = i32::from_le_bytes(bytes[0..4].try_into().unwrap());
    let cols = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if rows <= 0 {
        return Err(fail(0, format!("row count must be positive, found {rows}")));
    }
    if cols <= 0 {
        return Err(fail(4, format!("column count must be positive, found {cols}")));
    }
    let (m, n) = (rows as usize, cols as usize);
    let expected = (m as u64) * (n as u64) * 8 + HEADER_BYTES as u64;
    if (bytes.len() as u64) < expected {
        return Err(fail(
            bytes.len(),
            format!("truncated payload: expected {expected} bytes for {m}x{n}, found {}", bytes.len()),
        ));
    }
    if (bytes.len() as u64) > expected {
        return Err(fail(
            expected as usize,
            format!("length mismatch: {} trailing bytes after a {m}x{n} payload", bytes.len() as u64 - expected),
        ));
    }
    let mut a = DenseMatrix::zeros(m, n);
    for (idx, chunk) in bytes[HEADER_BYTES..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(fail(
                HEADER_BYTES + 8 * idx,
                format!("non-finite value {v} at entry ({}, {})", idx / n, idx % n),
            ));
        }
        a[(idx / n, idx % n)] = v;
    }
    Ok(a)
}

pub fn save_binary(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_matrix(a)?).map_err(|e| with_path(e, path))?;
    Ok(())
}

fn with_path(e: std::io::Error, path: &Path) -> std::io::Error {
    std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| with_path(e, path))?;
    read_matrix(&bytes, path)
}
