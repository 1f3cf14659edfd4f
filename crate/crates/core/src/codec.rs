//! JSON representation of complex matrices: an array of rows, each row an
//! array of `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::superop::{c, CMatrix};

/// Largest Hilbert-space dimension accepted from external input.
pub const MAX_INPUT_DIM: usize = 16;

/// Row-major complex matrix as it appears in JSON.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixJson((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }

    /// Converts to a square matrix of side `expected` (if given), reporting
    /// problems against `field`.
    pub fn to_square(&self, field: &str, expected: Option<usize>) -> Result<CMatrix> {
        let n = self.0.len();
        if n == 0 {
            return Err(Error::invariant(field, "empty matrix"));
        }
        if let Some(e) = expected {
            if n != e {
                return Err(Error::invariant(field, format!("expected {e} rows, found {n}")));
            }
        }
        if n > MAX_INPUT_DIM * MAX_INPUT_DIM {
            return Err(Error::invariant(field, format!("{n} rows exceeds the supported size")));
        }
        for (i, row) in self.0.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invariant(field, format!("row {i} has {} entries, expected {n}", row.len())));
            }
        }
        let m = CMatrix::from_fn(n, n, |i, j| {
            let [re, im] = self.0[i][j];
            c(re, im)
        });
        if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invariant(field, "non-finite entry"));
        }
        Ok(m)
    }
}

/// Parses a bare JSON matrix.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let json: MatrixJson = serde_json::from_str(text)?;
    json.to_square("matrix", None)
}
