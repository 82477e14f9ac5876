//! MatrixMarket coordinate-complex I/O for assembled matrices.
//!
//! Written files use 1-based indices in deterministic row-major entry order;
//! values are printed with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces the matrix exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::sparse::SparseComplexMatrix;

pub const HEADER: &str = "%%MatrixMarket matrix coordinate complex general";

#[derive(Debug, Error)]
pub enum MatrixMarketError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed MatrixMarket file: {0}")]
    Parse(String),
}

pub fn export_matrixmarket(
    matrix: &SparseComplexMatrix,
    path: impl AsRef<Path>,
) -> Result<(), MatrixMarketError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{HEADER}")?;
    writeln!(w, "{} {} {}", matrix.nrows(), matrix.ncols(), matrix.nnz())?;
    for (i, j, v) in matrix.iter() {
        writeln!(w, "{} {} {} {}", i + 1, j + 1, v.re, v.im)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrixmarket(path: impl AsRef<Path>) -> Result<SparseComplexMatrix, MatrixMarketError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| MatrixMarketError::Parse("empty file".into()))??;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 5
        || !tokens[0].eq_ignore_ascii_case("%%MatrixMarket")
        || !tokens[1].eq_ignore_ascii_case("matrix")
        || !tokens[2].eq_ignore_ascii_case("coordinate")
        || !tokens[3].eq_ignore_ascii_case("complex")
        || !tokens[4].eq_ignore_ascii_case("general")
    {
        return Err(MatrixMarketError::Parse(format!("unsupported header: {header}")));
    }
    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(MatrixMarketError::Parse(format!("bad size line: {t}")));
                }
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|e| MatrixMarketError::Parse(format!("bad size `{s}`: {e}")))
                };
                size = Some((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?));
            }
            Some((nrows, ncols, _)) => {
                if fields.len() != 4 {
                    return Err(MatrixMarketError::Parse(format!("bad entry line: {t}")));
                }
                let i: usize = fields[0]
                    .parse()
                    .map_err(|e| MatrixMarketError::Parse(format!("bad row index: {e}")))?;
                let j: usize = fields[1]
                    .parse()
                    .map_err(|e| MatrixMarketError::Parse(format!("bad col index: {e}")))?;
                let re: f64 = fields[2]
                    .parse()
                    .map_err(|e| MatrixMarketError::Parse(format!("bad real part: {e}")))?;
                let im: f64 = fields[3]
                    .parse()
                    .map_err(|e| MatrixMarketError::Parse(format!("bad imag part: {e}")))?;
                if i < 1 || i > nrows || j < 1 || j > ncols {
                    return Err(MatrixMarketError::Parse(format!("index out of range: {t}")));
                }
                triplets.push((i - 1, j - 1, C64::new(re, im)));
            }
        }
    }
    let (nrows, ncols, nnz) =
        size.ok_or_else(|| MatrixMarketError::Parse("missing size line".into()))?;
    if triplets.len() != nnz {
        return Err(MatrixMarketError::Parse(format!(
            "expected {nnz} entries, found {}",
            triplets.len()
        )));
    }
    Ok(SparseComplexMatrix::from_triplets(nrows, ncols, &triplets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, LossProfile};
    use crate::mesh::build_mesh;

    #[test]
    fn scalar_file_format() {
        let m = SparseComplexMatrix::from_triplets(1, 1, &[(0, 0, C64::new(3.875, 0.125))]);
        let dir = std::env::temp_dir().join("helmfov_mm_scalar");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.mtx");
        export_matrixmarket(&m, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HEADER);
        assert_eq!(lines.next().unwrap(), "1 1 1");
        assert_eq!(lines.next().unwrap(), "1 1 3.875 0.125");
    }

    #[test]
    fn stiffness_level1_single_entry() {
        let mesh = build_mesh(2, 1).unwrap();
        let p = assemble(&mesh, 0.0, &LossProfile::constant(0.0).unwrap()).unwrap();
        let dir = std::env::temp_dir().join("helmfov_mm_k1");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("k.mtx");
        export_matrixmarket(&p.k, &path).unwrap();
        let back = read_matrixmarket(&path).unwrap();
        assert_eq!(back.nnz(), 1);
        assert_eq!(back.get(0, 0), C64::new(4.0, 0.0));
    }

    #[test]
    fn round_trip_exact() {
        let mesh = build_mesh(2, 2).unwrap();
        let p = assemble(&mesh, 3.7, &LossProfile::constant(0.9).unwrap()).unwrap();
        let dir = std::env::temp_dir().join("helmfov_mm_rt");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.mtx");
        export_matrixmarket(&p.a, &path).unwrap();
        let back = read_matrixmarket(&path).unwrap();
        assert_eq!(back.nnz(), p.a.nnz());
        assert!(back.max_abs_diff(&p.a) == 0.0, "round trip must be exact");
    }

    #[test]
    fn rejects_wrong_header() {
        let dir = std::env::temp_dir().join("helmfov_mm_bad");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.mtx");
        std::fs::write(&path, "%%MatrixMarket matrix array real general\n1 1\n1.0\n").unwrap();
        assert!(matches!(read_matrixmarket(&path), Err(MatrixMarketError::Parse(_))));
    }
}
