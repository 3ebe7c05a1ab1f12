use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::format::{classify, infer_type, parses_as, year_of, FormatClass};
use super::table::{ColumnType, Table};

pub const CRITERIA: [&str; 5] = [
    "unambiguous_interpretability",
    "uniform_representation",
    "credibility",
    "faultlessness",
    "completeness",
];

/// Plausible range for date values; anything outside is flagged.
pub const DATE_YEARS: std::ops::RangeInclusive<i32> = 1900..=2100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Score {
    Value(f64),
    Manual(ManualScore),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManualScore {
    Manual,
}

impl Score {
    pub fn value(&self) -> Option<f64> {
        match self {
            Score::Value(v) => Some(*v),
            Score::Manual(_) => None,
        }
    }
}

impl std::fmt::Display for Score {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Score::Value(v) => write!(f, "{v:.4}"),
            Score::Manual(_) => f.write_str("manual"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub column: String,
    pub message: String,
    pub row_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub criterion: String,
    pub score: Score,
    pub findings: Vec<Finding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnProfile {
    pub name: String,
    pub effective_type: ColumnType,
    pub declared: bool,
    pub nulls: usize,
    pub non_null: usize,
    pub format_clusters: BTreeMap<FormatClass, usize>,
    pub distinct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityProfile {
    pub table: String,
    pub rows: usize,
    pub columns: Vec<ColumnProfile>,
    pub criteria: Vec<CriterionResult>,
}

impl QualityProfile {
    pub fn criterion(&self, name: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.criterion == name)
    }

    pub fn completeness(&self) -> f64 {
        self.criterion("completeness").and_then(|c| c.score.value()).unwrap_or(1.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("# Quality profile: {}\n\n{} rows, {} columns\n\n", self.table, self.rows, self.columns.len());
        out.push_str("| criterion | score | findings |\n|---|---|---|\n");
        for c in &self.criteria {
            let _ = writeln!(out, "| {} | {} | {} |", c.criterion, c.score, c.findings.len());
        }
        out.push_str("\n| column | type | nulls | formats |\n|---|---|---|---|\n");
        for col in &self.columns {
            let formats: Vec<String> = col.format_clusters.iter().map(|(k, v)| format!("{}: {v}", k.as_str())).collect();
            let ty = if col.declared { format!("{} (declared)", col.effective_type) } else { col.effective_type.to_string() };
            let _ = writeln!(out, "| {} | {} | {} | {} |", col.name, ty, col.nulls, formats.join(", "));
        }
        for c in self.criteria.iter().filter(|c| !c.findings.is_empty()) {
            let _ = write!(out, "\n## {}\n\n", c.criterion);
            for f in &c.findings {
                let _ = write!(out, "- `{}`: {}", f.column, f.message);
                if !f.row_indices.is_empty() {
                    let shown: Vec<String> = f.row_indices.iter().take(10).map(usize::to_string).collect();
                    let more = if f.row_indices.len() > 10 { ", ..." } else { "" };
                    let _ = write!(out, " (rows {}{more})", shown.join(", "));
                }
                out.push('\n');
            }
        }
        out
    }
}

fn column_cells(table: &Table, i: usize) -> impl Iterator<Item = (usize, &str)> + Clone {
    table.rows.iter().enumerate().filter_map(move |(r, row)| row[i].as_deref().map(|c| (r, c)))
}

pub fn profile(table: &Table) -> QualityProfile {
    let mut columns = Vec::with_capacity(table.width());
    let mut unambiguous = Vec::new();
    let mut uniform = Vec::new();
    let mut credibility = Vec::new();
    let mut faultless = Vec::new();
    let mut incomplete = Vec::new();

    let mut uniform_ratios = Vec::new();
    let (mut parseable, mut non_null_total, mut null_total) = (0usize, 0usize, 0usize);

    for (i, column) in table.columns.iter().enumerate() {
        let cells = column_cells(table, i);
        let non_null = cells.clone().count();
        let nulls = table.len() - non_null;
        null_total += nulls;
        non_null_total += non_null;

        if let Some(original) = &column.original_name {
            unambiguous.push(Finding {
                column: column.name.clone(),
                message: format!("duplicate column name '{original}' renamed to '{}'", column.name),
                row_indices: vec![],
            });
        }
        if nulls > 0 {
            incomplete.push(Finding {
                column: column.name.clone(),
                message: format!("{nulls} null cells"),
                row_indices: table.rows.iter().enumerate().filter(|(_, r)| r[i].is_none()).map(|(r, _)| r).collect(),
            });
        }

        let mut clusters: BTreeMap<FormatClass, Vec<usize>> = BTreeMap::new();
        for (r, c) in cells.clone() {
            clusters.entry(classify(c)).or_default().push(r);
        }
        if non_null > 0 {
            let (top_class, top) = clusters
                .iter()
                .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(a.0)))
                .map(|(k, v)| (*k, v.len()))
                .unwrap();
            uniform_ratios.push(top as f64 / non_null as f64);
            if clusters.len() > 1 {
                let summary: Vec<String> = clusters.iter().map(|(k, v)| format!("{} {}", v.len(), k.as_str())).collect();
                uniform.push(Finding {
                    column: column.name.clone(),
                    message: format!("mixed formats ({}), dominant {}", summary.join(", "), top_class.as_str()),
                    row_indices: clusters
                        .iter()
                        .filter(|(k, _)| **k != top_class)
                        .flat_map(|(_, v)| v.iter().copied())
                        .collect::<std::collections::BTreeSet<_>>()
                        .into_iter()
                        .collect(),
                });
            }
        }
        if let Some(rows) = clusters.get(&FormatClass::SlashedDate) {
            unambiguous.push(Finding {
                column: column.name.clone(),
                message: "slashed dates have no fixed day/month order".into(),
                row_indices: rows.clone(),
            });
        }

        let effective_type = column.declared_type.unwrap_or_else(|| infer_type(cells.clone().map(|(_, c)| c)));
        let bad: Vec<usize> = cells.clone().filter(|(_, c)| !parses_as(c, effective_type)).map(|(r, _)| r).collect();
        parseable += non_null - bad.len();
        if !bad.is_empty() {
            faultless.push(Finding {
                column: column.name.clone(),
                message: format!("{} cells do not parse as {effective_type}", bad.len()),
                row_indices: bad,
            });
        }

        let distinct: std::collections::BTreeSet<&str> = cells.clone().map(|(_, c)| c).collect();
        if table.len() > 1 && nulls == 0 && distinct.len() == 1 {
            credibility.push(Finding {
                column: column.name.clone(),
                message: format!("constant column (every value is '{}')", distinct.iter().next().unwrap()),
                row_indices: vec![],
            });
        }
        if matches!(effective_type, ColumnType::Date | ColumnType::Datetime) {
            let out: Vec<usize> = cells
                .clone()
                .filter(|(_, c)| year_of(c).is_some_and(|y| !DATE_YEARS.contains(&y)))
                .map(|(r, _)| r)
                .collect();
            if !out.is_empty() {
                credibility.push(Finding {
                    column: column.name.clone(),
                    message: format!("{} dates outside {}-{}", out.len(), DATE_YEARS.start(), DATE_YEARS.end()),
                    row_indices: out,
                });
            }
        }

        columns.push(ColumnProfile {
            name: column.name.clone(),
            effective_type,
            declared: column.declared_type.is_some(),
            nulls,
            non_null,
            format_clusters: clusters.into_iter().map(|(k, v)| (k, v.len())).collect(),
            distinct: distinct.len(),
        });
    }

    let total = null_total + non_null_total;
    let completeness = if total == 0 { 1.0 } else { 1.0 - null_total as f64 / total as f64 };
    let uniform_score = if uniform_ratios.is_empty() {
        1.0
    } else {
        uniform_ratios.iter().sum::<f64>() / uniform_ratios.len() as f64
    };
    let faultless_score = if non_null_total == 0 { 1.0 } else { parseable as f64 / non_null_total as f64 };

    let entry = |criterion: &str, score: Score, findings: Vec<Finding>| CriterionResult {
        criterion: criterion.to_string(),
        score,
        findings,
    };
    let manual = Score::Manual(ManualScore::Manual);
    QualityProfile {
        table: table.name.clone(),
        rows: table.len(),
        columns,
        criteria: vec![
            entry(CRITERIA[0], manual.clone(), unambiguous),
            entry(CRITERIA[1], Score::Value(uniform_score), uniform),
            entry(CRITERIA[2], manual, credibility),
            entry(CRITERIA[3], Score::Value(faultless_score), faultless),
            entry(CRITERIA[4], Score::Value(completeness), incomplete),
        ],
    }
}
