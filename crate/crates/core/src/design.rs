use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Observations × named features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub columns: Vec<String>,
    pub x: Matrix,
}

impl DesignMatrix {
    pub fn new(columns: Vec<String>, x: Matrix) -> Result<Self> {
        if columns.len() != x.cols() {
            return Err(Error::argument(format!(
                "{} column names for {} columns",
                columns.len(),
                x.cols()
            )));
        }
        Ok(Self { columns, x })
    }

    pub fn rows(&self) -> usize {
        self.x.rows()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn select_rows(&self, idx: &[usize]) -> DesignMatrix {
        DesignMatrix {
            columns: self.columns.clone(),
            x: self.x.select_rows(idx),
        }
    }

    /// Error naming missing and extra columns unless `expected` matches exactly.
    pub fn check_columns(&self, expected: &[String]) -> Result<()> {
        if self.columns == expected {
            return Ok(());
        }
        let missing: Vec<&str> = expected
            .iter()
            .filter(|c| !self.columns.contains(c))
            .map(String::as_str)
            .collect();
        let extra: Vec<&str> = self
            .columns
            .iter()
            .filter(|c| !expected.contains(c))
            .map(String::as_str)
            .collect();
        if missing.is_empty() && extra.is_empty() {
            return Err(Error::argument(
                "columns match by name but not by order".to_string(),
            ));
        }
        Err(Error::argument(format!(
            "column mismatch: missing [{}], extra [{}]",
            missing.join(", "),
            extra.join(", ")
        )))
    }
}
