//! Reference computations for tabular data preparation.

use kgf_core::prep::{JoinKind, JoinSpec, Table};
use rand::Rng;

use super::gen::{random_keys, random_table, TestRng};

/// Share of non-null cells, counted cell by cell.
pub fn direct_completeness(table: &Table) -> f64 {
    let total = table.rows.len() * table.columns.len();
    if total == 0 {
        return 1.0;
    }
    let mut nulls = 0;
    for row in &table.rows {
        for cell in row {
            if cell.is_none() {
                nulls += 1;
            }
        }
    }
    1.0 - nulls as f64 / total as f64
}

pub fn random_shape(rng: &mut TestRng) -> Table {
    let cols = ["a", "b", "c", "d", "e", "f"];
    let width = rng.gen_range(1..=cols.len());
    let rows = rng.gen_range(0..60);
    let null_rate = rng.gen_range(0.0..0.6);
    random_table(rng, "t", &cols[..width], rows, null_rate)
}

/// Nested-loop join over the same inputs; the right key column is dropped.
pub fn nested_loop(left: &Table, right: &Table, spec: &JoinSpec) -> Vec<Vec<Option<String>>> {
    let lk = left.column_index(&spec.left_key).unwrap();
    let rk = right.column_index(&spec.right_key).unwrap();
    let mut out = Vec::new();
    for l in &left.rows {
        let mut matched = false;
        for r in &right.rows {
            if l[lk].is_some() && l[lk] == r[rk] {
                matched = true;
                let mut row = l.clone();
                for (i, cell) in r.iter().enumerate() {
                    if i != rk {
                        row.push(cell.clone());
                    }
                }
                out.push(row);
            }
        }
        if !matched && spec.kind == JoinKind::Left {
            let mut row = l.clone();
            row.resize(l.len() + right.columns.len() - 1, None);
            out.push(row);
        }
    }
    out
}

pub fn random_pair(r: &mut TestRng) -> (Vec<Table>, JoinSpec) {
    let keys = r.gen_range(1..40);
    let ln = r.gen_range(0..=500);
    let rn = r.gen_range(0..=500);
    let mut left = random_table(r, "left", &["id", "x"], ln, 0.1);
    let mut right = random_table(r, "right", &["x", "key", "y"], rn, 0.1);
    for (row, k) in left.rows.iter_mut().zip(random_keys(r, ln, keys)) {
        row[0] = k;
    }
    for (row, k) in right.rows.iter_mut().zip(random_keys(r, rn, keys)) {
        row[1] = k;
    }
    let spec = JoinSpec {
        left_table: "left".into(),
        right_table: "right".into(),
        left_key: "id".into(),
        right_key: "key".into(),
        kind: if r.gen_bool(0.5) { JoinKind::Inner } else { JoinKind::Left },
        column_prefixing: true,
    };
    (vec![left, right], spec)
}
