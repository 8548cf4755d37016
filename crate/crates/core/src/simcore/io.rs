//! Embedding files.
//!
//! Two formats, selected by extension:
//!
//! - `.csv`: header `id,dim0,dim1,...`, one embedding per row.
//! - `.bin` / `.f64`: little-endian `u64` row count, `u64` dim, then
//!   `rows * dim` little-endian `f64` values in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::EmbeddingMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Csv,
    Binary,
}

impl EmbeddingFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Ok(Self::Csv),
            Some(ext) if ext.eq_ignore_ascii_case("bin") || ext.eq_ignore_ascii_case("f64") => {
                Ok(Self::Binary)
            }
            _ => Err(Error::Format(format!(
                "cannot infer embedding format from {}",
                path.display()
            ))),
        }
    }
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    match EmbeddingFormat::from_path(path)? {
        EmbeddingFormat::Csv => read_csv(BufReader::new(File::open(path)?)),
        EmbeddingFormat::Binary => read_binary(BufReader::new(File::open(path)?)),
    }
}

pub fn write_embeddings(path: &Path, m: &EmbeddingMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match EmbeddingFormat::from_path(path)? {
        EmbeddingFormat::Csv => write_csv(&mut w, m.values())?,
        EmbeddingFormat::Binary => write_binary(&mut w, m.values())?,
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<EmbeddingMatrix> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    if headers.get(0) != Some("id") || headers.len() < 2 {
        return Err(Error::Format("CSV header must be `id,dim0,...`".into()));
    }
    for (k, h) in headers.iter().skip(1).enumerate() {
        if h != format!("dim{k}") {
            return Err(Error::Format(format!("unexpected CSV column `{h}`")));
        }
    }
    let dim = headers.len() - 1;
    let mut flat = Vec::new();
    let mut rows = 0;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        if rec.len() != dim + 1 {
            return Err(Error::Format(format!("row {} has {} fields", line + 1, rec.len())));
        }
        for field in rec.iter().skip(1) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("row {}: bad number `{field}`", line + 1)))?;
            flat.push(v);
        }
        rows += 1;
    }
    let values = Array2::from_shape_vec((rows, dim), flat)
        .map_err(|e| Error::Format(e.to_string()))?;
    EmbeddingMatrix::new(values)
}

pub fn write_csv<W: Write>(w: &mut W, values: &Array2<f64>) -> Result<()> {
    let mut header = String::from("id");
    for k in 0..values.ncols() {
        header.push_str(&format!(",dim{k}"));
    }
    writeln!(w, "{header}")?;
    for (i, row) in values.rows().into_iter().enumerate() {
        write!(w, "{i}")?;
        for v in row {
            // `{:?}` prints the shortest repr that round-trips exactly.
            write!(w, ",{v:?}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut reader: R) -> Result<EmbeddingMatrix> {
    let mut word = [0u8; 8];
    reader.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    reader.read_exact(&mut word)?;
    let dim = u64::from_le_bytes(word) as usize;
    let count = rows
        .checked_mul(dim)
        .ok_or_else(|| Error::Format("row count overflow".into()))?;
    let mut flat = Vec::with_capacity(count);
    for _ in 0..count {
        reader
            .read_exact(&mut word)
            .map_err(|_| Error::Format(format!("truncated payload, expected {count} values")))?;
        flat.push(f64::from_le_bytes(word));
    }
    if reader.read(&mut word)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    let values =
        Array2::from_shape_vec((rows, dim), flat).map_err(|e| Error::Format(e.to_string()))?;
    EmbeddingMatrix::new(values)
}

pub fn write_binary<W: Write>(w: &mut W, values: &Array2<f64>) -> Result<()> {
    w.write_all(&(values.nrows() as u64).to_le_bytes())?;
    w.write_all(&(values.ncols() as u64).to_le_bytes())?;
    for v in values.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}
