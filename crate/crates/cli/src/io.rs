//! Matrix and label files.
//!
//! CSV matrices are headerless comma-separated rows. Binary matrices start
//! with the 5-byte magic `NBSE1`, then `M` and `D` as little-endian `u64`,
//! then `M·D` little-endian `f64` values in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nbse::{fmt_f64, DataMatrix, NbseError, Result};

pub const BIN_MAGIC: &[u8; 5] = b"NBSE1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Bin,
}

impl MatrixFormat {
    /// `.bin` means binary; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => Self::Bin,
            _ => Self::Csv,
        }
    }
}

impl std::str::FromStr for MatrixFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "bin" => Ok(Self::Bin),
            other => Err(format!("unknown matrix format '{other}' (csv|bin)")),
        }
    }
}

pub fn parse_csv<R: Read>(input: R) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            let message = match e.kind() {
                csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                    format!("expected {expected_len} fields, found {len}")
                }
                _ => e.to_string(),
            };
            NbseError::Parse { line, message }
        })?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| NbseError::Parse {
                    line,
                    message: format!("'{f}' is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    DataMatrix::from_rows(&rows)
}

pub fn parse_bin<R: Read>(mut input: R) -> Result<DataMatrix> {
    let mut magic = [0u8; 5];
    input.read_exact(&mut magic)?;
    if &magic != BIN_MAGIC {
        return Err(NbseError::Parse {
            line: 0,
            message: "bad magic, expected NBSE1".into(),
        });
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let m = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let d = u64::from_le_bytes(word) as usize;
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    let expected = m.checked_mul(d).and_then(|n| n.checked_mul(8));
    if expected != Some(payload.len()) {
        return Err(NbseError::Parse {
            line: 0,
            message: format!("header says {m}x{d} but payload has {} bytes", payload.len()),
        });
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    DataMatrix::new(m, d, values)
}

pub fn ingest_matrix(path: &Path, format: MatrixFormat) -> Result<DataMatrix> {
    let file = BufReader::new(File::open(path)?);
    match format {
        MatrixFormat::Csv => parse_csv(file),
        MatrixFormat::Bin => parse_bin(file),
    }
}

pub fn write_csv<W: Write>(x: &DataMatrix, mut out: W) -> Result<()> {
    for i in 0..x.rows() {
        let row: Vec<String> = x.row(i).iter().map(|&v| fmt_f64(v)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_bin<W: Write>(x: &DataMatrix, mut out: W) -> Result<()> {
    out.write_all(BIN_MAGIC)?;
    out.write_all(&(x.rows() as u64).to_le_bytes())?;
    out.write_all(&(x.cols() as u64).to_le_bytes())?;
    for v in x.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_matrix(x: &DataMatrix, path: &Path, format: MatrixFormat) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        MatrixFormat::Csv => write_csv(x, &mut out)?,
        MatrixFormat::Bin => write_bin(x, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

/// One non-negative integer label per line; blank lines are skipped.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let file = BufReader::new(File::open(path)?);
    let mut y = Vec::new();
    for (k, line) in file.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        y.push(t.parse().map_err(|_| NbseError::Parse {
            line: k + 1,
            message: format!("'{t}' is not a class label"),
        })?);
    }
    Ok(y)
}

pub fn write_labels(y: &[usize], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for c in y {
        writeln!(out, "{c}")?;
    }
    out.flush()?;
    Ok(())
}
