//! JSON state and observable files.
//!
//! A matrix is an object `{"dim": d, "re": [...], "im": [...]}` where `re` and
//! `im` hold the real and imaginary parts in row-major order, either as `d`
//! rows of `d` numbers or as one flat list of `d*d` numbers. Writers emit the
//! nested form. Observable files are a JSON array of such objects.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DensityMatrix, StateError};
use crate::linalg::{CMatrix, Hermitian};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Entries {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl Entries {
    fn flatten(&self, dim: usize, field: &str) -> Result<Vec<f64>, StateError> {
        let flat: Vec<f64> = match self {
            Entries::Rows(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(StateError::Format(format!(
                        "\"{field}\" must be {dim} rows of {dim} numbers"
                    )));
                }
                rows.iter().flatten().copied().collect()
            }
            Entries::Flat(v) => v.clone(),
        };
        if flat.len() != dim * dim {
            return Err(StateError::Format(format!(
                "\"{field}\" has {} entries, expected {}",
                flat.len(),
                dim * dim
            )));
        }
        Ok(flat)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateFile {
    pub dim: usize,
    pub re: Entries,
    pub im: Entries,
}

impl StateFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let d = m.rows();
        let rows = |f: fn(&Complex64) -> f64| {
            (0..d)
                .map(|i| (0..d).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            dim: d,
            re: Entries::Rows(rows(|z| z.re)),
            im: Entries::Rows(rows(|z| z.im)),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix, StateError> {
        if self.dim == 0 {
            return Err(StateError::Format("\"dim\" must be positive".into()));
        }
        let re = self.re.flatten(self.dim, "re")?;
        let im = self.im.flatten(self.dim, "im")?;
        let data = re
            .iter()
            .zip(&im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        Ok(CMatrix::from_row_major(self.dim, self.dim, data)?)
    }

    pub fn to_hermitian(&self) -> Result<Hermitian, StateError> {
        Ok(Hermitian::new(self.to_matrix()?)?)
    }
}

/// Parses and validates a density matrix from JSON text.
pub fn read_state_json(text: &str) -> Result<DensityMatrix, StateError> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| StateError::Format(e.to_string()))?;
    DensityMatrix::new(file.to_hermitian()?)
}

pub fn write_state_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&StateFile::from_matrix(rho.matrix())).expect("state serialises")
}

/// Parses a JSON array of Hermitian matrices.
pub fn read_observables_json(text: &str) -> Result<Vec<Hermitian>, StateError> {
    let files: Vec<StateFile> =
        serde_json::from_str(text).map_err(|e| StateError::Format(e.to_string()))?;
    if files.is_empty() {
        return Err(StateError::Format("observable list is empty".into()));
    }
    files.iter().map(StateFile::to_hermitian).collect()
}

pub fn load_state(path: impl AsRef<Path>) -> Result<DensityMatrix, StateError> {
    read_state_json(&std::fs::read_to_string(path)?)
}

pub fn load_observables(path: impl AsRef<Path>) -> Result<Vec<Hermitian>, StateError> {
    read_observables_json(&std::fs::read_to_string(path)?)
}
