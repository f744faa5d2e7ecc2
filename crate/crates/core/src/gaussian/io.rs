//! Covariance-matrix serialization.
//!
//! Two formats:
//!
//! * **CSV** — header row `row,col,re,im`, then one record per matrix entry
//!   in row-major order over the full 2M×2M matrix.
//! * **Binary** — magic bytes `SLPC`, a little-endian `u32` format version
//!   (currently 1), a little-endian `u64` mode count M, then the 2M×2M
//!   entries row-major as interleaved little-endian `f64` (re, im) pairs.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::{C64, CMat};

use super::CovarianceMatrix;

const MAGIC: &[u8; 4] = b"SLPC";
const VERSION: u32 = 1;

/// Writes a covariance matrix as CSV (`row,col,re,im`).
pub fn write_covariance_csv<W: Write>(sigma: &CovarianceMatrix, mut w: W) -> Result<()> {
    writeln!(w, "row,col,re,im")?;
    let n = 2 * sigma.modes();
    let d = sigma.data();
    for r in 0..n {
        for c in 0..n {
            let z = d[(r, c)];
            writeln!(w, "{r},{c},{:.17e},{:.17e}", z.re, z.im)?;
        }
    }
    Ok(())
}

/// Reads a covariance matrix written by [`write_covariance_csv`].
pub fn read_covariance_csv<R: Read>(mut r: R) -> Result<CovarianceMatrix> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "row,col,re,im" => {}
        other => {
            return Err(Error::Parse(format!(
                "bad covariance CSV header: {other:?}"
            )))
        }
    }
    let mut entries: Vec<(usize, usize, C64)> = Vec::new();
    let mut max_idx = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "line {}: expected 4 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse_idx = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
        };
        let parse_f = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
        };
        let (row, col) = (parse_idx(fields[0])?, parse_idx(fields[1])?);
        let z = C64::new(parse_f(fields[2])?, parse_f(fields[3])?);
        max_idx = max_idx.max(row).max(col);
        entries.push((row, col, z));
    }
    let n = max_idx + 1;
    if n % 2 != 0 || entries.len() != n * n {
        return Err(Error::Parse(format!(
            "covariance CSV does not describe a full 2Mx2M matrix ({} entries, max index {max_idx})",
            entries.len()
        )));
    }
    let mut data = CMat::zeros(n, n);
    for (row, col, z) in entries {
        data[(row, col)] = z;
    }
    CovarianceMatrix::new(n / 2, data)
}

/// Writes a covariance matrix in the compact binary layout.
pub fn write_covariance_binary<W: Write>(sigma: &CovarianceMatrix, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(sigma.modes() as u64).to_le_bytes())?;
    let n = 2 * sigma.modes();
    let d = sigma.data();
    for r in 0..n {
        for c in 0..n {
            let z = d[(r, c)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a covariance matrix written by [`write_covariance_binary`].
pub fn read_covariance_binary<R: Read>(mut r: R) -> Result<CovarianceMatrix> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("bad magic bytes in covariance file".into()));
    }
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf4)?;
    let version = u32::from_le_bytes(buf4);
    if version != VERSION {
        return Err(Error::Parse(format!(
            "unsupported covariance format version {version}"
        )));
    }
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)?;
    let modes = u64::from_le_bytes(buf8) as usize;
    if modes == 0 || modes > 1 << 20 {
        return Err(Error::Parse(format!("implausible mode count {modes}")));
    }
    let n = 2 * modes;
    let mut data = CMat::zeros(n, n);
    for row in 0..n {
        for col in 0..n {
            r.read_exact(&mut buf8)?;
            let re = f64::from_le_bytes(buf8);
            r.read_exact(&mut buf8)?;
            let im = f64::from_le_bytes(buf8);
            data[(row, col)] = C64::new(re, im);
        }
    }
    CovarianceMatrix::new(modes, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GreensFunction;
    use approx::assert_abs_diff_eq;

    fn sample_sigma() -> CovarianceMatrix {
        let g = GreensFunction::two_mode_squeezer(0.83, 0.41);
        CovarianceMatrix::from_greens(&g).unwrap()
    }

    #[test]
    fn csv_roundtrip() {
        let s = sample_sigma();
        let mut buf = Vec::new();
        write_covariance_csv(&s, &mut buf).unwrap();
        let back = read_covariance_csv(buf.as_slice()).unwrap();
        assert_eq!(back.modes(), 2);
        assert_abs_diff_eq!((back.data() - s.data()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn binary_roundtrip_is_exact() {
        let s = sample_sigma();
        let mut buf = Vec::new();
        write_covariance_binary(&s, &mut buf).unwrap();
        let back = read_covariance_binary(buf.as_slice()).unwrap();
        assert_eq!(back.data(), s.data());
    }

    #[test]
    fn bad_header_rejected() {
        assert!(read_covariance_csv("a,b,c\n".as_bytes()).is_err());
        assert!(read_covariance_binary(&b"NOPE"[..]).is_err());
    }

    #[test]
    fn truncated_binary_rejected() {
        let s = sample_sigma();
        let mut buf = Vec::new();
        write_covariance_binary(&s, &mut buf).unwrap();
        buf.truncate(buf.len() - 5);
        assert!(read_covariance_binary(buf.as_slice()).is_err());
    }
}
