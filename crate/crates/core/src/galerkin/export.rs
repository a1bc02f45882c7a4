use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::Discretization;
use crate::error::{Result, VeldtError};

/// A coefficient vector tagged with the fingerprint of its discretization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDoc {
    pub fingerprint: String,
    pub coeffs: Vec<f64>,
}

impl FieldDoc {
    pub fn new(disc: &Discretization, coeffs: &DVector<f64>) -> Self {
        Self {
            fingerprint: disc.fingerprint().to_string(),
            coeffs: coeffs.iter().copied().collect(),
        }
    }

    /// Coefficients, after checking that the document belongs to `disc`.
    pub fn coefficients(&self, disc: &Discretization) -> Result<DVector<f64>> {
        if self.fingerprint != disc.fingerprint() {
            return Err(VeldtError::Configuration(format!(
                "field fingerprint {} does not match discretization {}",
                self.fingerprint,
                disc.fingerprint()
            )));
        }
        if self.coeffs.len() != disc.dim() || self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(VeldtError::Configuration(
                "field coefficients malformed".into(),
            ));
        }
        Ok(DVector::from_vec(self.coeffs.clone()))
    }
}

/// Writes a dense matrix as CSV, one row per line.
pub fn write_matrix_csv(path: &Path, a: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    for r in 0..a.nrows() {
        w.write_record(a.row(r).iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| VeldtError::Configuration(format!("bad matrix entry: {e}")))?;
        rows.push(row);
    }
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(VeldtError::Configuration("ragged matrix CSV".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}
