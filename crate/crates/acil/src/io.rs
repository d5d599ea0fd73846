//! Readers and writers for the feature and label file formats.
//!
//! Both formats are little-endian binaries with an eight-byte magic string,
//! and both fall back to a plain-text representation when the magic is
//! absent:
//!
//! * features — magic `ACILFEAT`, `u32` version (1), `u64` row count,
//!   `u32` column count, `u8` dtype code (1 = f32, 2 = f64), then the values
//!   row-major. Fallback: headerless CSV of decimal floats.
//! * labels — magic `ACILLABL`, `u32` version (1), `u64` row count, then one
//!   `u32` class id per row. Fallback: plain text, one id per line.

use ndarray::{Array2, ArrayView2};
use std::fs;
use std::path::Path;

use crate::dataset::SampleSet;
use crate::error::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 8] = b"ACILFEAT";
pub const LABEL_MAGIC: &[u8; 8] = b"ACILLABL";
const FORMAT_VERSION: u32 = 1;

const DTYPE_F32: u8 = 1;
const DTYPE_F64: u8 = 2;

/// Reads a feature matrix, auto-detecting binary versus CSV by the magic.
pub fn read_features(path: &Path) -> Result<Array2<f64>> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(FEATURE_MAGIC) {
        read_features_binary(path, &bytes)
    } else {
        read_features_csv(path, &bytes)
    }
}

fn read_features_binary(path: &Path, bytes: &[u8]) -> Result<Array2<f64>> {
    let mut cur = Cursor::new(path, bytes);
    cur.skip(FEATURE_MAGIC.len())?;
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let n_rows = cur.u64()? as usize;
    let n_cols = cur.u32()? as usize;
    let dtype = cur.u8()?;
    let elem_size = match dtype {
        DTYPE_F32 => 4,
        DTYPE_F64 => 8,
        code => {
            return Err(Error::UnknownDtype {
                path: path.to_path_buf(),
                code,
            })
        }
    };
    let expected = n_rows
        .checked_mul(n_cols)
        .and_then(|n| n.checked_mul(elem_size))
        .ok_or_else(|| cur.malformed("row/column counts overflow"))?;
    if cur.remaining() != expected {
        return Err(cur.malformed(&format!(
            "payload is {} bytes, header implies {expected}",
            cur.remaining()
        )));
    }
    let mut values = Vec::with_capacity(n_rows * n_cols);
    match dtype {
        DTYPE_F32 => {
            for _ in 0..n_rows * n_cols {
                values.push(cur.f32()? as f64);
            }
        }
        _ => {
            for _ in 0..n_rows * n_cols {
                values.push(cur.f64()?);
            }
        }
    }
    let matrix =
        Array2::from_shape_vec((n_rows, n_cols), values).expect("length matches header dimensions");
    check_loaded_finite(path, &matrix)?;
    Ok(matrix)
}

fn read_features_csv(path: &Path, bytes: &[u8]) -> Result<Array2<f64>> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::ParseError {
        path: path.to_path_buf(),
        detail: "file is neither a feature binary nor UTF-8 text".into(),
    })?;
    let mut values = Vec::new();
    let mut n_cols = None;
    let mut n_rows = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = 0usize;
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| Error::ParseError {
                path: path.to_path_buf(),
                detail: format!("line {}: {field:?} is not a number", lineno + 1),
            })?;
            values.push(v);
            cols += 1;
        }
        match n_cols {
            None => n_cols = Some(cols),
            Some(expected) if expected != cols => {
                return Err(Error::ParseError {
                    path: path.to_path_buf(),
                    detail: format!(
                        "line {}: {cols} columns, earlier rows have {expected}",
                        lineno + 1
                    ),
                });
            }
            _ => {}
        }
        n_rows += 1;
    }
    let n_cols = n_cols
        .ok_or_else(|| Error::EmptyInput(format!("feature file {} has no rows", path.display())))?;
    let matrix =
        Array2::from_shape_vec((n_rows, n_cols), values).expect("per-row column check holds");
    check_loaded_finite(path, &matrix)?;
    Ok(matrix)
}

fn check_loaded_finite(path: &Path, matrix: &Array2<f64>) -> Result<()> {
    crate::dataset::check_finite(matrix.view(), &path.display().to_string())
}

/// Writes a feature matrix in the binary format with f64 payload.
pub fn write_features(path: &Path, features: ArrayView2<'_, f64>) -> Result<()> {
    let mut out = Vec::with_capacity(25 + features.len() * 8);
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(features.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(features.ncols() as u32).to_le_bytes());
    out.push(DTYPE_F64);
    for &v in features.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a label vector, auto-detecting binary versus plain text.
pub fn read_labels(path: &Path) -> Result<Vec<u32>> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(LABEL_MAGIC) {
        read_labels_binary(path, &bytes)
    } else {
        read_labels_text(path, &bytes)
    }
}

fn read_labels_binary(path: &Path, bytes: &[u8]) -> Result<Vec<u32>> {
    let mut cur = Cursor::new(path, bytes);
    cur.skip(LABEL_MAGIC.len())?;
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let n_rows = cur.u64()? as usize;
    let expected = n_rows
        .checked_mul(4)
        .ok_or_else(|| cur.malformed("row count overflows"))?;
    if cur.remaining() != expected {
        return Err(cur.malformed(&format!(
            "payload is {} bytes, header implies {expected}",
            cur.remaining()
        )));
    }
    (0..n_rows).map(|_| cur.u32()).collect()
}

fn read_labels_text(path: &Path, bytes: &[u8]) -> Result<Vec<u32>> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::ParseError {
        path: path.to_path_buf(),
        detail: "file is neither a label binary nor UTF-8 text".into(),
    })?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: u32 = line.parse().map_err(|_| Error::ParseError {
            path: path.to_path_buf(),
            detail: format!("line {}: {line:?} is not a class id", lineno + 1),
        })?;
        labels.push(v);
    }
    Ok(labels)
}

/// Writes labels in the binary format.
pub fn write_labels(path: &Path, labels: &[u32]) -> Result<()> {
    let mut out = Vec::with_capacity(20 + labels.len() * 4);
    out.extend_from_slice(LABEL_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(labels.len() as u64).to_le_bytes());
    for &l in labels {
        out.extend_from_slice(&l.to_le_bytes());
    }
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a feature file and a label file into a validated [`SampleSet`].
pub fn load_sample_set(features_path: &Path, labels_path: &Path) -> Result<SampleSet> {
    let features = read_features(features_path)?;
    let labels = read_labels(labels_path)?;
    SampleSet::new(features, labels)
}

/// Byte-slice reader that reports truncation as a malformed header.
struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(path: &'a Path, bytes: &'a [u8]) -> Self {
        Self {
            path,
            bytes,
            pos: 0,
        }
    }

    fn malformed(&self, detail: &str) -> Error {
        Error::MalformedHeader {
            path: self.path.to_path_buf(),
            detail: detail.into(),
        }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(self.malformed(&format!(
                "file truncated: needed {n} more bytes at offset {}",
                self.pos
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn skip(&mut self, n: usize) -> Result<()> {
        self.take(n).map(|_| ())
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Write as _;

    fn temp_path(dir: &tempfile::TempDir, name: &str) -> std::path::PathBuf {
        dir.path().join(name)
    }

    #[test]
    fn feature_binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "f.bin");
        let m = array![[1.0, -2.5, 3.25], [0.0, 1e-9, 7.0]];
        write_features(&path, m.view()).unwrap();
        let back = read_features(&path).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn feature_f32_payload_is_widened() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "f32.bin");
        let mut out = Vec::new();
        out.extend_from_slice(FEATURE_MAGIC);
        out.extend_from_slice(&1u32.to_le_bytes());
        out.extend_from_slice(&2u64.to_le_bytes());
        out.extend_from_slice(&2u32.to_le_bytes());
        out.push(1); // f32
        for v in [1.5f32, -0.25, 4.0, 0.0] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(&path, out).unwrap();
        let m = read_features(&path).unwrap();
        assert_eq!(m, array![[1.5, -0.25], [4.0, 0.0]]);
    }

    #[test]
    fn feature_csv_fallback() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "f.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "1.0, 2.0, 3.0").unwrap();
        writeln!(f, "4.5,5.5,6.5").unwrap();
        drop(f);
        let m = read_features(&path).unwrap();
        assert_eq!(m, array![[1.0, 2.0, 3.0], [4.5, 5.5, 6.5]]);
    }

    #[test]
    fn feature_csv_ragged_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "ragged.csv");
        std::fs::write(&path, "1.0,2.0\n3.0\n").unwrap();
        let err = read_features(&path).unwrap_err();
        assert!(matches!(err, Error::ParseError { .. }), "{err}");
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn feature_binary_truncation_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "t.bin");
        let m = array![[1.0, 2.0], [3.0, 4.0]];
        write_features(&path, m.view()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            read_features(&path),
            Err(Error::MalformedHeader { .. })
        ));
    }

    #[test]
    fn feature_unknown_dtype_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "d.bin");
        let mut out = Vec::new();
        out.extend_from_slice(FEATURE_MAGIC);
        out.extend_from_slice(&1u32.to_le_bytes());
        out.extend_from_slice(&0u64.to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
        out.push(9);
        std::fs::write(&path, out).unwrap();
        assert!(matches!(
            read_features(&path),
            Err(Error::UnknownDtype { code: 9, .. })
        ));
    }

    #[test]
    fn feature_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "v.bin");
        let mut out = Vec::new();
        out.extend_from_slice(FEATURE_MAGIC);
        out.extend_from_slice(&2u32.to_le_bytes());
        std::fs::write(&path, out).unwrap();
        assert!(matches!(
            read_features(&path),
            Err(Error::VersionMismatch {
                found: 2,
                expected: 1
            })
        ));
    }

    #[test]
    fn feature_non_finite_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "nan.csv");
        std::fs::write(&path, "1.0,NaN\n").unwrap();
        assert!(matches!(
            read_features(&path),
            Err(Error::NonFinite { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn label_binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "l.bin");
        let labels = vec![3, 1, 4, 1, 5, 9];
        write_labels(&path, &labels).unwrap();
        assert_eq!(read_labels(&path).unwrap(), labels);
    }

    #[test]
    fn label_text_fallback() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "l.txt");
        std::fs::write(&path, "0\n2\n\n1\n").unwrap();
        assert_eq!(read_labels(&path).unwrap(), vec![0, 2, 1]);
    }

    #[test]
    fn label_text_garbage_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = temp_path(&dir, "l.txt");
        std::fs::write(&path, "0\nseven\n").unwrap();
        let err = read_labels(&path).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn load_sample_set_checks_row_counts() {
        let dir = tempfile::tempdir().unwrap();
        let fpath = temp_path(&dir, "f.bin");
        let lpath = temp_path(&dir, "l.bin");
        write_features(&fpath, array![[1.0], [2.0], [3.0]].view()).unwrap();
        write_labels(&lpath, &[0, 1]).unwrap();
        let err = load_sample_set(&fpath, &lpath).unwrap_err();
        assert!(err.to_string().contains("row-count mismatch"), "{err}");
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_features(Path::new("/nonexistent/f.bin")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/f.bin"));
    }
}
