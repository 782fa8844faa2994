//! CSV and JSON helpers shared by the artifact writers.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// 17 significant digits, which round-trips every `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix_csv<W: Write>(out: W, m: &Matrix, header: Option<&[String]>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for row in m.iter_rows() {
        w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_matrix_csv(path: &Path, m: &Matrix, header: Option<&[String]>) -> Result<()> {
    create_parent(path)?;
    let file = BufWriter::new(File::create(path)?);
    write_matrix_csv(file, m, header).map_err(|e| e.context(format!("writing {}", path.display())))
}

/// Reads a numeric CSV. When `has_header` is set the first record is returned separately.
pub fn read_matrix_csv<R: Read>(input: R, has_header: bool) -> Result<(Option<Vec<String>>, Matrix)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut header = None;
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if has_header && line == 0 {
            header = Some(rec.iter().map(str::to_owned).collect());
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| {
                    Error::Range(format!("line {}, column {}: cannot parse {field:?}", line + 1, col + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, Matrix::from_rows(&rows)?))
}

pub fn load_matrix_csv(path: &Path, has_header: bool) -> Result<(Option<Vec<String>>, Matrix)> {
    let file = File::open(path).map_err(|e| Error::Io(e).context(format!("opening {}", path.display())))?;
    read_matrix_csv(file, has_header).map_err(|e| e.context(format!("reading {}", path.display())))
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let mut file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    file.flush()?;
    Ok(())
}

pub fn create_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatted_values_round_trip() {
        for v in [0.0, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_round_trip_with_header() {
        let m = Matrix::from_rows(&[vec![1.0, 0.1], vec![-3.25, 1e-17]]).unwrap();
        let header = vec!["a".to_string(), "b".to_string()];
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m, Some(&header)).unwrap();
        let (h, back) = read_matrix_csv(buf.as_slice(), true).unwrap();
        assert_eq!(h.unwrap(), header);
        assert_eq!(back, m);
    }

    #[test]
    fn unparsable_field_is_reported() {
        let err = read_matrix_csv("1,2\n3,x\n".as_bytes(), false).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
