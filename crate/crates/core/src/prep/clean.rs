use serde::{Deserialize, Serialize};

use super::format::normalize;
use super::table::{ColumnType, Table};
use super::PrepError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum CleanOp {
    /// Trims whitespace in the given columns, or in every column.
    Trim {
        #[serde(default)]
        columns: Option<Vec<String>>,
    },
    Lowercase { column: String },
    Replace { column: String, from: String, to: String },
    /// Normalizes the cells to `to`; cells that do not parse become null.
    Cast { column: String, to: ColumnType },
    DropRowsWhereNull { columns: Vec<String> },
}

impl CleanOp {
    pub fn name(&self) -> &'static str {
        match self {
            CleanOp::Trim { .. } => "trim",
            CleanOp::Lowercase { .. } => "lowercase",
            CleanOp::Replace { .. } => "replace",
            CleanOp::Cast { .. } => "cast",
            CleanOp::DropRowsWhereNull { .. } => "drop_rows_where_null",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpLogEntry {
    pub op: String,
    pub cells_changed: usize,
    pub cast_failures: usize,
    pub rows_dropped: usize,
    /// Row indices (before the op) of failed casts.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OpLog {
    pub entries: Vec<OpLogEntry>,
}

impl OpLog {
    pub fn cast_failures(&self) -> usize {
        self.entries.iter().map(|e| e.cast_failures).sum()
    }

    pub fn rows_dropped(&self) -> usize {
        self.entries.iter().map(|e| e.rows_dropped).sum()
    }
}

fn map_cells(table: &mut Table, columns: &[usize], f: impl Fn(&str) -> String) -> usize {
    let mut changed = 0;
    for row in &mut table.rows {
        for &i in columns {
            if let Some(cell) = &mut row[i] {
                let new = f(cell);
                if new != *cell {
                    *cell = new;
                    changed += 1;
                }
            }
        }
    }
    changed
}

/// Applies `ops` in order to a copy of `table`.
pub fn clean(table: &Table, ops: &[CleanOp]) -> Result<(Table, OpLog), PrepError> {
    let mut t = table.clone();
    let mut log = OpLog::default();
    for op in ops {
        let mut entry = OpLogEntry {
            op: op.name().to_string(),
            cells_changed: 0,
            cast_failures: 0,
            rows_dropped: 0,
            failed_rows: vec![],
        };
        match op {
            CleanOp::Trim { columns } => {
                let idx = match columns {
                    Some(cols) => cols.iter().map(|c| t.require_column(c)).collect::<Result<Vec<_>, _>>()?,
                    None => (0..t.width()).collect(),
                };
                entry.cells_changed = map_cells(&mut t, &idx, |c| c.trim().to_string());
            }
            CleanOp::Lowercase { column } => {
                let i = t.require_column(column)?;
                entry.cells_changed = map_cells(&mut t, &[i], str::to_lowercase);
            }
            CleanOp::Replace { column, from, to } => {
                if from.is_empty() {
                    return Err(PrepError::InvalidOption("replace needs a non-empty 'from'".into()));
                }
                let i = t.require_column(column)?;
                entry.cells_changed = map_cells(&mut t, &[i], |c| c.replace(from.as_str(), to));
            }
            CleanOp::Cast { column, to } => {
                let i = t.require_column(column)?;
                for (r, row) in t.rows.iter_mut().enumerate() {
                    let Some(cell) = &row[i] else { continue };
                    match normalize(cell, *to) {
                        Some(n) if n == *cell => {}
                        Some(n) => {
                            row[i] = Some(n);
                            entry.cells_changed += 1;
                        }
                        None => {
                            row[i] = None;
                            entry.cells_changed += 1;
                            entry.cast_failures += 1;
                            entry.failed_rows.push(r);
                        }
                    }
                }
                t.columns[i].declared_type = Some(*to);
            }
            CleanOp::DropRowsWhereNull { columns } => {
                let idx = columns.iter().map(|c| t.require_column(c)).collect::<Result<Vec<_>, _>>()?;
                let before = t.rows.len();
                t.rows.retain(|row| idx.iter().all(|&i| row[i].is_some()));
                entry.rows_dropped = before - t.rows.len();
            }
        }
        log.entries.push(entry);
    }
    Ok((t, log))
}
