//! Plain-text matrix dumps for regression fixtures and debugging.
//!
//! Format: a `pwclra-matrix v1` header line, `rows R` / `cols C` lines, then
//! R·C data lines in row-major order, each holding the real and imaginary
//! parts separated by one space. Floats are written with Rust's shortest
//! round-trip formatting, so save → load is bit-exact.
//!
//! # Example
//! ```
//! use pwclra::linalg::{c64, CMat};
//! use pwclra::matio::{load_matrix, save_matrix};
//!
//! let m = CMat::from_row_slice(1, 2, &[c64(1.5, -2.0), c64(0.0, 3.25)]);
//! let path = std::env::temp_dir().join("pwclra_doc_matrix.txt");
//! save_matrix(&path, &m).unwrap();
//! assert_eq!(load_matrix(&path).unwrap(), m);
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{c64, CMat};

const MAGIC: &str = "pwclra-matrix v1";

/// Serialize `m` to the text format.
pub fn matrix_to_string(m: &CMat) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "rows {}", m.nrows());
    let _ = writeln!(s, "cols {}", m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            let _ = writeln!(s, "{} {}", z.re, z.im);
        }
    }
    s
}

/// Parse the text format back into a matrix.
pub fn matrix_from_str(text: &str) -> Result<CMat> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().trim();
    if header != MAGIC {
        return Err(Error::MatIo(format!("bad header {header:?}, expected {MAGIC:?}")));
    }
    let dim = |line: Option<&str>, name: &str| -> Result<usize> {
        let line = line.unwrap_or_default().trim();
        let rest = line
            .strip_prefix(name)
            .ok_or_else(|| Error::MatIo(format!("expected `{name} <count>`, got {line:?}")))?;
        rest.trim()
            .parse::<usize>()
            .map_err(|e| Error::MatIo(format!("bad {name} count in {line:?}: {e}")))
    };
    let rows = dim(lines.next(), "rows")?;
    let cols = dim(lines.next(), "cols")?;
    let mut data = Vec::with_capacity(rows * cols);
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let re = parts
            .next()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| Error::MatIo(format!("bad real part on data line {idx}")))?;
        let im = parts
            .next()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| Error::MatIo(format!("bad imaginary part on data line {idx}")))?;
        if parts.next().is_some() {
            return Err(Error::MatIo(format!("trailing tokens on data line {idx}")));
        }
        data.push(c64(re, im));
    }
    if data.len() != rows * cols {
        return Err(Error::MatIo(format!(
            "expected {} entries for a {rows}×{cols} matrix, got {}",
            rows * cols,
            data.len()
        )));
    }
    Ok(CMat::from_row_slice(rows, cols, &data))
}

/// Write `m` to `path` in the text format.
pub fn save_matrix(path: impl AsRef<Path>, m: &CMat) -> Result<()> {
    std::fs::write(path.as_ref(), matrix_to_string(m))
        .map_err(|e| Error::MatIo(format!("write {}: {e}", path.as_ref().display())))
}

/// Read a matrix previously written by [`save_matrix`].
pub fn load_matrix(path: impl AsRef<Path>) -> Result<CMat> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::MatIo(format!("read {}: {e}", path.as_ref().display())))?;
    matrix_from_str(&text)
}
