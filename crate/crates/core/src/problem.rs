//! JSON problem files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "weights": [0.5, 0.5],
//!   "matrices": [[[1, 2], [2, 5]], [[4, 4], [4, 5]]],
//!   "labels": ["A", "B"]
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::barycenter::{MeanProblem, WeightVector};
use crate::error::{Error, Result};
use crate::spd::SpdMatrix;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    pub weights: Vec<f64>,
    pub matrices: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ProblemFile {
    pub fn from_problem(p: &MeanProblem) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            weights: p.weights().as_slice().to_vec(),
            matrices: p.matrices().iter().map(SpdMatrix::rows).collect(),
            labels: None,
        }
    }

    pub fn into_problem(self) -> Result<MeanProblem> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Input(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.matrices.is_empty() {
            return Err(Error::Input("matrices: n ≥ 1 required".into()));
        }
        if self.weights.len() != self.matrices.len() {
            return Err(Error::Input(format!(
                "weights: {} entries for {} matrices",
                self.weights.len(),
                self.matrices.len()
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.matrices.len() {
                return Err(Error::Input(format!(
                    "labels: {} entries for {} matrices",
                    labels.len(),
                    self.matrices.len()
                )));
            }
        }
        let weights =
            WeightVector::new(self.weights).map_err(|e| Error::Input(format!("weights: {e}")))?;
        let dim = self.matrices[0].len();
        let mut matrices = Vec::with_capacity(self.matrices.len());
        for (k, rows) in self.matrices.iter().enumerate() {
            if rows.len() != dim {
                return Err(Error::Input(format!(
                    "matrix {k}: dimension {} differs from matrix 0 ({dim})",
                    rows.len()
                )));
            }
            let m =
                SpdMatrix::from_rows(rows).map_err(|e| Error::Input(format!("matrix {k}: {e}")))?;
            matrices.push(m);
        }
        MeanProblem::new(matrices, weights).map_err(|e| Error::Input(e.to_string()))
    }
}

pub fn parse_problem_file(text: &str) -> Result<ProblemFile> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("malformed problem file: {e}")))
}

pub fn parse_problem(text: &str) -> Result<MeanProblem> {
    parse_problem_file(text)?.into_problem()
}

/// Pretty JSON; every number is written in shortest round-trip form.
pub fn serialize_problem(p: &MeanProblem) -> String {
    serde_json::to_string_pretty(&ProblemFile::from_problem(p)).expect("problem serializes")
}
