//! Matrix files, weight files and atomic report output.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use kwidth_core::{NormKind, NormSpec};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Norm declaration inside a matrix document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormDoc {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl NormDoc {
    pub fn from_spec(spec: &NormSpec) -> Self {
        NormDoc { kind: spec.kind().name().to_string(), weights: spec.weights().map(<[f64]>::to_vec) }
    }

    pub fn to_spec(&self) -> Result<NormSpec> {
        let kind: NormKind = self.kind.parse()?;
        Ok(match &self.weights {
            Some(w) => NormSpec::weighted(kind, w.clone())?,
            None => NormSpec::new(kind),
        })
    }
}

/// `{"rows", "cols", "data" (row-major), "domain_norm", "codomain_norm"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_norm: Option<NormDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain_norm: Option<NormDoc>,
}

/// Matrix with the norms declared in its file, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedMatrix {
    pub matrix: DMatrix<f64>,
    pub domain: Option<NormSpec>,
    pub codomain: Option<NormSpec>,
}

impl MatrixDoc {
    pub fn new(matrix: &DMatrix<f64>, domain: Option<&NormSpec>, codomain: Option<&NormSpec>) -> Self {
        let data = (0..matrix.nrows()).flat_map(|i| (0..matrix.ncols()).map(move |j| matrix[(i, j)])).collect();
        MatrixDoc {
            rows: matrix.nrows(),
            cols: matrix.ncols(),
            data,
            domain_norm: domain.map(NormDoc::from_spec),
            codomain_norm: codomain.map(NormDoc::from_spec),
        }
    }

    pub fn into_loaded(self) -> Result<LoadedMatrix> {
        if self.rows == 0 || self.cols == 0 {
            bail!("matrix must have at least one row and one column");
        }
        if self.data.len() != self.rows * self.cols {
            bail!("matrix data has {} entries, expected rows*cols = {}", self.data.len(), self.rows * self.cols);
        }
        Ok(LoadedMatrix {
            matrix: DMatrix::from_row_slice(self.rows, self.cols, &self.data),
            domain: self.domain_norm.as_ref().map(NormDoc::to_spec).transpose()?,
            codomain: self.codomain_norm.as_ref().map(NormDoc::to_spec).transpose()?,
        })
    }
}

/// Parses a comma-separated grid: one matrix row per line, `#` comments.
pub fn parse_csv_grid(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>().with_context(|| format!("line {}: bad number `{}`", lineno + 1, t.trim())))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                bail!("line {}: {} columns, expected {}", lineno + 1, row.len(), first.len());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("grid contains no rows");
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_row_slice(r, c, &rows.concat()))
}

/// Reads a matrix file; `.csv` or `.txt` is a comma-separated grid,
/// anything else a JSON matrix document.
pub fn read_matrix(path: &Path) -> Result<LoadedMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let loaded = if ext == "csv" || ext == "txt" {
        LoadedMatrix { matrix: parse_csv_grid(&text)?, domain: None, codomain: None }
    } else {
        let doc: MatrixDoc = serde_json::from_str(&text).with_context(|| format!("{} is not a matrix document", path.display()))?;
        doc.into_loaded()?
    };
    if loaded.matrix.iter().any(|v| !v.is_finite()) {
        bail!("{} contains non-finite entries", path.display());
    }
    Ok(loaded)
}

pub fn write_matrix_json(path: &Path, matrix: &DMatrix<f64>, domain: Option<&NormSpec>, codomain: Option<&NormSpec>) -> Result<()> {
    let text = serde_json::to_string_pretty(&MatrixDoc::new(matrix, domain, codomain))?;
    write_atomic(path, format!("{text}\n").as_bytes())
}

/// Weights as a JSON array or whitespace/comma separated numbers.
pub fn read_weights(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let trimmed = text.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).with_context(|| format!("{} is not a JSON number array", path.display()));
    }
    trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad weight `{t}`")))
        .collect()
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_grid() {
        let m = parse_csv_grid("# diag\n3, 0\n0, 2\n\n").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 2.0]));
        assert!(parse_csv_grid("1,2\n3").is_err());
        assert!(parse_csv_grid("1,x").is_err());
        assert!(parse_csv_grid("").is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = DMatrix::from_fn(3, 2, |i, j| (i as f64 + 0.1).sqrt() / (j as f64 + 3.0) - 1e-300);
        let w = NormSpec::weighted(NormKind::P1, vec![0.3, 7.0]).unwrap();
        write_matrix_json(&path, &m, Some(&w), Some(&NormSpec::pinf())).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(back.matrix.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(back.domain, Some(w));
        assert_eq!(back.codomain, Some(NormSpec::pinf()));
    }

    #[test]
    fn malformed_documents() {
        let bad = MatrixDoc { rows: 2, cols: 2, data: vec![1.0; 3], domain_norm: None, codomain_norm: None };
        assert!(bad.into_loaded().is_err());
        assert!(serde_json::from_str::<MatrixDoc>(r#"{"rows":1,"cols":1,"data":[1],"extra":0}"#).is_err());
        let doc = NormDoc { kind: "p3".into(), weights: None };
        assert!(doc.to_spec().is_err());
    }

    #[test]
    fn weights_formats() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        fs::write(&a, "[1, 2.5]").unwrap();
        assert_eq!(read_weights(&a).unwrap(), vec![1.0, 2.5]);
        let b = dir.path().join("b.txt");
        fs::write(&b, "1 2,3\n").unwrap();
        assert_eq!(read_weights(&b).unwrap(), vec![1.0, 2.0, 3.0]);
    }
}
