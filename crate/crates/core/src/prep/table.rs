use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PrepError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Integer,
    Decimal,
    Date,
    Datetime,
    Boolean,
    String,
}

impl ColumnType {
    /// Inference preference order.
    pub const ALL: [ColumnType; 6] = [
        ColumnType::Integer,
        ColumnType::Decimal,
        ColumnType::Date,
        ColumnType::Datetime,
        ColumnType::Boolean,
        ColumnType::String,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::Integer => "integer",
            ColumnType::Decimal => "decimal",
            ColumnType::Date => "date",
            ColumnType::Datetime => "datetime",
            ColumnType::Boolean => "boolean",
            ColumnType::String => "string",
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ColumnType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ColumnType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown column type '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_type: Option<ColumnType>,
    /// Set when the header repeated a name and this column was renamed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub original_name: Option<String>,
}

impl Column {
    pub fn new(name: impl Into<String>) -> Column {
        Column {
            name: name.into(),
            declared_type: None,
            original_name: None,
        }
    }
}

pub type Cell = Option<String>;

/// Every row has exactly `columns.len()` cells and column names are unique.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Builds a table, renaming repeated column names to `name_2`, `name_3`...
    pub fn new(name: impl Into<String>, column_names: Vec<String>, rows: Vec<Vec<Cell>>) -> Result<Table, PrepError> {
        let name = name.into();
        let width = column_names.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(PrepError::RaggedRow {
                table: name,
                row: i + 1,
                expected: width,
                found: row.len(),
            });
        }
        Ok(Table {
            name,
            columns: dedupe_names(column_names),
            rows,
        })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub(crate) fn require_column(&self, name: &str) -> Result<usize, PrepError> {
        self.column_index(name).ok_or_else(|| PrepError::MissingColumn {
            table: self.name.clone(),
            column: name.to_string(),
        })
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn cell(&self, row: usize, column: &str) -> Option<&str> {
        self.rows.get(row)?.get(self.column_index(column)?)?.as_deref()
    }

    /// Declares column types, e.g. from a manifest.
    pub fn declare_types(&mut self, types: &HashMap<String, ColumnType>) -> Result<(), PrepError> {
        for (column, ty) in types {
            let i = self.require_column(column)?;
            self.columns[i].declared_type = Some(*ty);
        }
        Ok(())
    }

    /// Writes the table as CSV; nulls become empty fields.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.column_names()).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.as_deref().unwrap_or("")))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }
}

fn dedupe_names(names: Vec<String>) -> Vec<Column> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let taken: std::collections::HashSet<String> = names.iter().cloned().collect();
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let count = seen.entry(name.clone()).or_insert(0);
        *count += 1;
        if *count == 1 {
            out.push(Column::new(name));
            continue;
        }
        let mut n = *count;
        let mut candidate = format!("{name}_{n}");
        while taken.contains(&candidate) || out.iter().any(|c: &Column| c.name == candidate) {
            n += 1;
            candidate = format!("{name}_{n}");
        }
        out.push(Column {
            name: candidate,
            declared_type: None,
            original_name: Some(name),
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvOptions {
    pub delimiter: char,
    pub has_header: bool,
    pub null_markers: Vec<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: ',',
            has_header: true,
            null_markers: vec![String::new()],
        }
    }
}

/// Reads a CSV file; the table is named after the file stem.
pub fn ingest_csv(path: &Path, options: &CsvOptions) -> Result<Table, PrepError> {
    let bytes = std::fs::read(path).map_err(|source| PrepError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path.file_stem().map_or_else(|| "table".to_string(), |s| s.to_string_lossy().into_owned());
    ingest_csv_bytes(&name, &bytes, options)
}

pub fn ingest_csv_bytes(name: &str, bytes: &[u8], options: &CsvOptions) -> Result<Table, PrepError> {
    if !options.delimiter.is_ascii() {
        return Err(PrepError::InvalidOption(format!(
            "delimiter '{}' must be a single ASCII character",
            options.delimiter
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter as u8)
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            match e.kind() {
                csv::ErrorKind::Utf8 { .. } => PrepError::Encoding {
                    table: name.to_string(),
                    line,
                },
                _ => PrepError::Csv {
                    table: name.to_string(),
                    line,
                    message: e.to_string(),
                },
            }
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(PrepError::RaggedRow {
                table: name.to_string(),
                row: line,
                expected,
                found: record.len(),
            });
        }
        if options.has_header && header.is_none() {
            header = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        rows.push(
            record
                .iter()
                .map(|c| {
                    if options.null_markers.iter().any(|m| m == c) {
                        None
                    } else {
                        Some(c.to_string())
                    }
                })
                .collect(),
        );
    }
    let names = header.unwrap_or_else(|| (1..=width.unwrap_or(0)).map(|i| format!("col{i}")).collect());
    Table::new(name, names, rows)
}
