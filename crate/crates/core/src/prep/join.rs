use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::table::{Column, Table};
use super::PrepError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JoinKind {
    Inner,
    #[default]
    Left,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinSpec {
    pub left_table: String,
    pub right_table: String,
    pub left_key: String,
    pub right_key: String,
    #[serde(default)]
    pub kind: JoinKind,
    #[serde(default)]
    pub column_prefixing: bool,
}

fn find<'a>(tables: &'a [Table], name: &str) -> Result<&'a Table, PrepError> {
    tables
        .iter()
        .find(|t| t.name == name)
        .ok_or_else(|| PrepError::MissingTable(name.to_string()))
}

/// Joins two of `tables` into one flat table named after the left table.
///
/// The right key column is dropped from the output since it repeats the left
/// key on every matched row. Null keys never match. Rows come out in left
/// order, and matches for one left row in right order.
pub fn denormalize(tables: &[Table], spec: &JoinSpec) -> Result<Table, PrepError> {
    let left = find(tables, &spec.left_table)?;
    let right = find(tables, &spec.right_table)?;
    let lk = left.require_column(&spec.left_key)?;
    let rk = right.require_column(&spec.right_key)?;

    let right_cols: Vec<usize> = (0..right.width()).filter(|&i| i != rk).collect();
    let mut columns = left.columns.clone();
    for &i in &right_cols {
        let c = &right.columns[i];
        let name = if spec.column_prefixing {
            format!("{}.{}", right.name, c.name)
        } else {
            c.name.clone()
        };
        if columns.iter().any(|existing| existing.name == name) {
            return Err(PrepError::ColumnCollision {
                column: name,
                left: left.name.clone(),
                right: right.name.clone(),
            });
        }
        columns.push(Column {
            name,
            declared_type: c.declared_type,
            original_name: None,
        });
    }

    let mut index: HashMap<&str, Vec<usize>> = HashMap::new();
    for (r, row) in right.rows.iter().enumerate() {
        if let Some(key) = row[rk].as_deref() {
            index.entry(key).or_default().push(r);
        }
    }

    let mut rows = Vec::new();
    for lrow in &left.rows {
        let matches = lrow[lk].as_deref().and_then(|k| index.get(k));
        match matches {
            Some(ms) => {
                for &r in ms {
                    let mut row = lrow.clone();
                    row.extend(right_cols.iter().map(|&i| right.rows[r][i].clone()));
                    rows.push(row);
                }
            }
            None if spec.kind == JoinKind::Left => {
                let mut row = lrow.clone();
                row.extend(std::iter::repeat_n(None, right_cols.len()));
                rows.push(row);
            }
            None => {}
        }
    }

    Ok(Table {
        name: left.name.clone(),
        columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prep::table::{ingest_csv_bytes, CsvOptions};

    fn tables() -> Vec<Table> {
        let t = |name: &str, text: &str| ingest_csv_bytes(name, text.as_bytes(), &CsvOptions::default()).unwrap();
        vec![
            t("orders", "id,machine\no1,m1\no2,m2\no3,m9\no4,\n"),
            t("machines", "mid,name\nm1,Lathe\nm2,Mill\nm2,Mill B\n"),
        ]
    }

    fn spec(kind: JoinKind) -> JoinSpec {
        JoinSpec {
            left_table: "orders".into(),
            right_table: "machines".into(),
            left_key: "machine".into(),
            right_key: "mid".into(),
            kind,
            column_prefixing: false,
        }
    }

    #[test]
    fn left_join_keeps_unmatched_with_nulls() {
        let t = denormalize(&tables(), &spec(JoinKind::Left)).unwrap();
        assert_eq!(t.column_names().collect::<Vec<_>>(), vec!["id", "machine", "name"]);
        assert_eq!(t.len(), 5);
        assert_eq!(t.rows[3], vec![Some("o3".into()), Some("m9".into()), None]);
        assert_eq!(t.rows[4][2], None);
    }

    #[test]
    fn duplicate_match_gives_one_row_each() {
        let t = denormalize(&tables(), &spec(JoinKind::Inner)).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.cell(1, "name"), Some("Mill"));
        assert_eq!(t.cell(2, "name"), Some("Mill B"));
    }

    #[test]
    fn one_to_one_left_join_keeps_row_count() {
        let mut ts = tables();
        ts[1].rows.pop();
        let t = denormalize(&ts, &spec(JoinKind::Left)).unwrap();
        assert_eq!(t.len(), ts[0].len());
    }

    #[test]
    fn prefixing() {
        let mut s = spec(JoinKind::Inner);
        s.column_prefixing = true;
        let t = denormalize(&tables(), &s).unwrap();
        assert_eq!(t.columns[2].name, "machines.name");
    }

    #[test]
    fn missing_key_names_table_and_column() {
        let mut s = spec(JoinKind::Inner);
        s.right_key = "nope".into();
        let err = denormalize(&tables(), &s).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("machines") && msg.contains("nope"), "{msg}");
    }

    #[test]
    fn collision_without_prefixing() {
        let mut ts = tables();
        ts[1].columns[1].name = "id".into();
        assert!(matches!(
            denormalize(&ts, &spec(JoinKind::Inner)),
            Err(PrepError::ColumnCollision { .. })
        ));
    }
}
