use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{ExperimentError, ARTIFACT_VERSION};

/// Numeric table with a one-line provenance comment.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// File stem, e.g. `fields` for `fields.csv`.
    pub stem: String,
    pub comment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Twelve significant digits in scientific notation; `-0` prints as `0`.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.11e}", 0.0f64);
    }
    format!("{x:.11e}")
}

impl Dataset {
    pub fn new(stem: &str, comment: String, columns: Vec<String>) -> Self {
        Dataset {
            stem: stem.to_string(),
            comment,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# {ARTIFACT_VERSION} {}", self.comment).unwrap();
        writeln!(s, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_value(x)).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.stem)
    }

    /// Writes `<stem>.csv` into `dir`, creating the directory if needed.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, ExperimentError> {
        write_file(dir, &self.file_name(), &self.to_csv())
    }
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, ExperimentError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExperimentError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(io(&path))?;
    Ok(path)
}
