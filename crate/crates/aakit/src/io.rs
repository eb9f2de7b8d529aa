//! Data ingestion and emission: CSV (one observation per row, transposed to
//! columns-as-points on load) and the binary cache format
//! (magic "AAKIT1", u64 rows, u64 cols, little-endian f64 column-major).

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const BINARY_MAGIC: &[u8; 6] = b"AAKIT1";

/// Parses CSV text into a d×N matrix (rows-as-observations transposed at
/// ingestion). Lines starting with '#' are comments; `has_header` skips the
/// first non-comment line. Any non-numeric or non-finite field is rejected
/// with 1-based file row/column coordinates.
pub fn parse_csv(text: &str, has_header: bool) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut header_pending = has_header;

    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let mut row = Vec::new();
        for (col_no, field) in trimmed.split(',').enumerate() {
            let field = field.trim();
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                row: line_no + 1,
                col: col_no + 1,
                message: format!("non-numeric field {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row: line_no + 1,
                    col: col_no + 1,
                    message: format!("non-finite field {field:?}"),
                });
            }
            row.push(value);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    row: line_no + 1,
                    col: row.len(),
                    message: format!("expected {w} fields, found {}", row.len()),
                });
            }
            _ => {}
        }
        rows.push(row);
    }

    let n = rows.len();
    let d = width.unwrap_or(0);
    if n == 0 || d == 0 {
        return Err(Error::Format("no data rows in CSV input".into()));
    }
    // Observations become columns.
    let mut m = DenseMatrix::zeros(d, n);
    for (j, row) in rows.iter().enumerate() {
        m.col_mut(j).copy_from_slice(row);
    }
    Ok(m)
}

pub fn read_csv(path: &Path, has_header: bool) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text, has_header)
}

/// Writes one observation per row using shortest round-trip formatting, so
/// re-ingestion reproduces every value exactly. An optional '#' comment
/// line (the embedded manifest) leads the file.
pub fn write_csv(path: &Path, x: &DenseMatrix, comment: Option<&str>) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    if let Some(c) = comment {
        writeln!(w, "# {c}")?;
    }
    for j in 0..x.cols() {
        let col = x.col(j);
        let mut line = String::new();
        for (i, v) in col.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v}"));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_binary(path: &Path, x: &DenseMatrix) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&(x.rows() as u64).to_le_bytes())?;
    w.write_all(&(x.cols() as u64).to_le_bytes())?;
    for v in x.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary(path: &Path) -> Result<DenseMatrix> {
    let bytes = fs::read(path)?;
    parse_binary(&bytes)
}

pub fn parse_binary(bytes: &[u8]) -> Result<DenseMatrix> {
    if bytes.len() < 22 || &bytes[..6] != BINARY_MAGIC {
        return Err(Error::Format("missing AAKIT1 magic".into()));
    }
    let rows = u64::from_le_bytes(bytes[6..14].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[14..22].try_into().unwrap()) as usize;
    let expected = 22 + 8 * rows.checked_mul(cols).ok_or_else(|| {
        Error::Format("matrix dimensions overflow".into())
    })?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "binary cache is {} bytes, expected {expected} for {rows}x{cols}",
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for chunk in bytes[22..].chunks_exact(8) {
        data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    DenseMatrix::from_column_major(rows, cols, data)
}

/// Loads a matrix, sniffing the binary magic and falling back to CSV.
pub fn read_matrix(path: &Path, has_header: bool) -> Result<DenseMatrix> {
    let bytes = fs::read(path)?;
    if bytes.len() >= 6 && &bytes[..6] == BINARY_MAGIC {
        return parse_binary(&bytes);
    }
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::Format("input is neither AAKIT1 binary nor UTF-8 text".into()))?;
    parse_csv(&text, has_header)
}

/// FNV-1a 64-bit content hash; the input digest recorded in run manifests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Drops exactly-duplicated columns (bitwise equality), keeping the first
/// occurrence. Returns the deduplicated matrix and the kept column indices;
/// `None` when nothing was dropped.
pub fn dedup_columns(x: &DenseMatrix) -> Option<(DenseMatrix, Vec<usize>)> {
    use std::collections::HashMap;
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut kept = Vec::new();
    for j in 0..x.cols() {
        let key: Vec<u64> = x.col(j).iter().map(|v| v.to_bits()).collect();
        if !seen.contains_key(&key) {
            seen.insert(key, j);
            kept.push(j);
        }
    }
    if kept.len() == x.cols() {
        None
    } else {
        Some((x.column_subset(&kept), kept))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use proptest::prelude::*;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = CounterRng::new(seed);
        let mut m = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, rng.next_gaussian() * 10f64.powi(rng.next_index(7) as i32 - 3));
            }
        }
        m
    }

    #[test]
    fn csv_parses_rows_as_points() {
        let m = parse_csv("1.0,2.0,3.0\n4.0,5.0,6.0\n", false).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(m.col(0), &[1.0, 2.0, 3.0]);
        assert_eq!(m.col(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn csv_header_and_comments() {
        let m = parse_csv("# generated\nf1,f2\n1,2\n3,4\n", true).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
    }

    #[test]
    fn csv_rejects_bad_field_with_coordinates() {
        match parse_csv("1.0,2.0\n3.0,oops\n", false) {
            Err(Error::Parse { row, col, .. }) => {
                assert_eq!((row, col), (2, 2));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_csv("1.0,2.0\n3.0\n", false).is_err());
        assert!(parse_csv("1.0,inf\n", false).is_err());
        assert!(parse_csv("", false).is_err());
    }

    #[test]
    fn dedup_drops_exact_duplicates_only() {
        let m = DenseMatrix::from_columns(&[
            vec![1.0, 2.0],
            vec![1.0, 2.0],
            vec![1.0, 2.0 + 1e-15],
        ])
        .unwrap();
        let (deduped, kept) = dedup_columns(&m).unwrap();
        assert_eq!(kept, vec![0, 2]);
        assert_eq!(deduped.cols(), 2);
        assert!(dedup_columns(&deduped).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn binary_roundtrip_is_bitwise(seed in 0u64..500) {
            let dir = std::env::temp_dir().join(format!("aakit-io-{seed}"));
            std::fs::create_dir_all(&dir).unwrap();
            let path = dir.join("m.bin");
            let m = random_matrix(4, 6, seed);
            write_binary(&path, &m).unwrap();
            let back = read_binary(&path).unwrap();
            for (a, b) in m.data().iter().zip(back.data()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            std::fs::remove_dir_all(&dir).ok();
        }

        #[test]
        fn csv_roundtrip_is_exact(seed in 500u64..1000) {
            let dir = std::env::temp_dir().join(format!("aakit-io-{seed}"));
            std::fs::create_dir_all(&dir).unwrap();
            let path = dir.join("m.csv");
            let m = random_matrix(3, 5, seed);
            write_csv(&path, &m, Some("test")).unwrap();
            let back = read_csv(&path, false).unwrap();
            for (a, b) in m.data().iter().zip(back.data()) {
                // Shortest round-trip formatting reparses exactly, well
                // inside the 1e-15 relative contract.
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            std::fs::remove_dir_all(&dir).ok();
        }
    }
}
