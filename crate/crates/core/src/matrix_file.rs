//! JSON matrix documents: `{"rows": m, "cols": n, "data": [[[re, im], …], …]}`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::matrix::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let data = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| {
                let z = m.get(i, j);
                [z.re, z.im]
            }).collect())
            .collect();
        Self { rows: m.rows(), cols: m.cols(), data }
    }

    /// Validates the declared shape against `data` and rebuilds the matrix.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.data.len() != self.rows {
            return Err(LabError::invalid(format!("declared {} rows, found {}", self.rows, self.data.len())));
        }
        let mut entries = Vec::with_capacity(self.rows * self.cols);
        for (i, row) in self.data.iter().enumerate() {
            if row.len() != self.cols {
                return Err(LabError::invalid(format!("row {i} has {} entries, expected {}", row.len(), self.cols)));
            }
            entries.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
        }
        ComplexMatrix::from_row_major(self.rows, self.cols, entries)
    }

    pub fn parse(text: &str) -> Result<ComplexMatrix> {
        let file: MatrixFile =
            serde_json::from_str(text).map_err(|e| LabError::invalid(format!("malformed matrix file: {e}")))?;
        file.to_matrix()
    }

    pub fn read(path: &Path) -> Result<ComplexMatrix> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(m: &ComplexMatrix) -> String {
        serde_json::to_string(&Self::from_matrix(m)).expect("matrix files always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c;

    #[test]
    fn round_trip_is_bit_exact() {
        let m = ComplexMatrix::from_row_major(2, 2, vec![c(0.1, -1e-300), c(1.0 / 3.0, 0.0), c(-2.5, 7.0), c(0.0, f64::MIN_POSITIVE)])
            .unwrap();
        let back = MatrixFile::parse(&MatrixFile::to_json(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn strict_parsing() {
        assert!(MatrixFile::parse(r#"{"rows":1,"cols":1,"data":[[[1,0]]],"extra":1}"#).is_err());
        assert!(MatrixFile::parse(r#"{"rows":2,"cols":1,"data":[[[1,0]]]}"#).is_err());
        assert!(MatrixFile::parse(r#"{"rows":1,"cols":2,"data":[[[1,0]]]}"#).is_err());
        assert!(MatrixFile::parse(r#"{"rows":1,"cols":1,"data":[[[1,0,3]]]}"#).is_err());
        assert!(MatrixFile::parse(r#"{"rows":1,"cols":1,"data":[[1]]}"#).is_err());
        let m = MatrixFile::parse(r#"{"rows":1,"cols":2,"data":[[[1,0],[0,-2]]]}"#).unwrap();
        assert_eq!(m.get(0, 1), c(0.0, -2.0));
    }
}
