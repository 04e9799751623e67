//! CSV ingestion: one value column, optionally split by a group column.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::sample::Sample;

/// Label used when no group column is given.
pub const ALL_GROUP: &str = "all";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("line {line}: {source}")]
    Csv {
        line: u64,
        #[source]
        source: csv::Error,
    },
    #[error("column `{column}` not found in header")]
    MissingColumn { column: String },
    #[error("line {line}, column `{column}`: missing value")]
    MissingValue { line: u64, column: String },
    #[error("line {line}, column `{column}`: malformed number `{value}`")]
    Malformed {
        line: u64,
        column: String,
        value: String,
    },
    #[error("line {line}, column `{column}`: value {value} must be finite and > 0")]
    NonPositive {
        line: u64,
        column: String,
        value: f64,
    },
    #[error("group `{group}` has {rows} row(s); at least 2 are needed")]
    SmallGroup { group: String, rows: usize },
    #[error("no data rows")]
    Empty,
}

#[derive(Debug, Clone)]
pub struct Group {
    pub label: String,
    pub sample: Sample,
}

#[derive(Debug, Clone)]
pub struct DataFile {
    pub path: PathBuf,
    pub value_column: String,
    pub group_column: Option<String>,
    /// Groups in order of first appearance.
    pub groups: Vec<Group>,
}

impl DataFile {
    pub fn group(&self, label: &str) -> Option<&Sample> {
        self.groups
            .iter()
            .find(|g| g.label == label)
            .map(|g| &g.sample)
    }
}

/// Reads a headed, comma-separated file with `.` as the decimal separator.
pub fn load_csv(
    path: impl AsRef<Path>,
    value_column: &str,
    group_column: Option<&str>,
) -> Result<DataFile, DataError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    let headers = reader
        .headers()
        .map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn {
                column: name.to_string(),
            })
    };
    let value_idx = find(value_column)?;
    let group_idx = group_column.map(find).transpose()?;

    let mut labels: Vec<String> = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| DataError::Csv {
            line: source.position().map_or(0, |p| p.line()),
            source,
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let raw = record.get(value_idx).unwrap_or("");
        if raw.is_empty() {
            return Err(DataError::MissingValue {
                line,
                column: value_column.to_string(),
            });
        }
        let value: f64 = raw.parse().map_err(|_| DataError::Malformed {
            line,
            column: value_column.to_string(),
            value: raw.to_string(),
        })?;
        if !(value.is_finite() && value > 0.0) {
            return Err(DataError::NonPositive {
                line,
                column: value_column.to_string(),
                value,
            });
        }
        let label = match (group_idx, group_column) {
            (Some(idx), Some(name)) => {
                let label = record.get(idx).unwrap_or("");
                if label.is_empty() {
                    return Err(DataError::MissingValue {
                        line,
                        column: name.to_string(),
                    });
                }
                label
            }
            _ => ALL_GROUP,
        };
        match labels.iter().position(|l| l == label) {
            Some(i) => columns[i].push(value),
            None => {
                labels.push(label.to_string());
                columns.push(vec![value]);
            }
        }
    }
    if labels.is_empty() {
        return Err(DataError::Empty);
    }
    let groups = labels
        .into_iter()
        .zip(columns)
        .map(|(label, values)| {
            if values.len() < 2 {
                return Err(DataError::SmallGroup {
                    group: label,
                    rows: values.len(),
                });
            }
            let sample = Sample::new(values).expect("values validated while reading");
            Ok(Group { label, sample })
        })
        .collect::<Result<_, _>>()?;
    Ok(DataFile {
        path: path.to_path_buf(),
        value_column: value_column.to_string(),
        group_column: group_column.map(str::to_string),
        groups,
    })
}
