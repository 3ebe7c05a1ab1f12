//! Tabular data preparation: CSV ingestion, quality profiling, cleaning and
//! denormalizing joins.

mod clean;
pub mod format;
mod join;
mod profile;
mod table;

pub use clean::{clean, CleanOp, OpLog, OpLogEntry};
pub use join::{denormalize, JoinKind, JoinSpec};
pub use profile::{profile, ColumnProfile, CriterionResult, Finding, ManualScore, QualityProfile, Score, CRITERIA};
pub use table::{ingest_csv, ingest_csv_bytes, Cell, Column, ColumnType, CsvOptions, Table};

#[derive(Debug, thiserror::Error)]
pub enum PrepError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{table}: row at line {row} has {found} cells, expected {expected}")]
    RaggedRow {
        table: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{table}: invalid UTF-8 at line {line}")]
    Encoding { table: String, line: usize },
    #[error("{table}: CSV error at line {line}: {message}")]
    Csv { table: String, line: usize, message: String },
    #[error("table '{table}' has no column '{column}'")]
    MissingColumn { table: String, column: String },
    #[error("no table named '{0}'")]
    MissingTable(String),
    #[error("column '{column}' exists in both '{left}' and '{right}'; enable column prefixing")]
    ColumnCollision { column: String, left: String, right: String },
    #[error("{0}")]
    InvalidOption(String),
}
