use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{Backlog, CqKind, Rating, SubExpectation};
use crate::query::{evaluate, parse_query};
use crate::store::Store;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvaluationRow {
    pub cq_id: String,
    pub sub_question_id: String,
    pub query_present: bool,
    pub result_summary: String,
    pub rating: Rating,
    pub required_work: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationTable {
    pub iteration_label: String,
    pub timestamp: String,
    pub rows: Vec<EvaluationRow>,
    /// Sub-questions of `cq` kind rated pass.
    pub passed: usize,
    /// Sub-questions of `cq` kind without a manual expectation.
    pub evaluable: usize,
    pub fulfillment_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub const COLUMNS: [&str; 6] = ["cq_id", "sub_question_id", "query_present", "result_summary", "rating", "required_work"];

fn join_notes(work: String, notes: &str) -> String {
    match (work.is_empty(), notes.trim().is_empty()) {
        (_, true) => work,
        (true, false) => notes.trim().to_string(),
        (false, false) => format!("{work}; {}", notes.trim()),
    }
}

/// Runs every sub-question query against `store` and rates it. Rows keep
/// backlog order. Partial ratings count as not passed; business questions
/// stay out of the rate.
pub fn evaluate_backlog(backlog: &Backlog, store: &Store, iteration_label: &str) -> EvaluationTable {
    let mut rows = Vec::new();
    let (mut passed, mut evaluable) = (0, 0);
    for cq in &backlog.cqs {
        for sq in &cq.sub_questions {
            let expectation = sq.expectation();
            // queries were checked at load time; one that no longer parses
            // rates as fail rather than aborting the run
            let result = sq.query.as_deref().map(|q| parse_query(q).map(|q| evaluate(&q, store)));
            let (summary, rating, work) = match (expectation.executable(), &result) {
                (None, _) => (
                    result.as_ref().and_then(|r| r.as_ref().ok()).map(|r| r.summary()).unwrap_or_default(),
                    sq.rating.unwrap_or(Rating::NotFeasible),
                    "manual assessment".to_string(),
                ),
                (Some(_), None) => (String::new(), sq.rating.unwrap_or(Rating::NotFeasible), "write a SPARQL query".to_string()),
                (Some(_), Some(Err(e))) => (String::new(), Rating::Fail, format!("query error: {e}")),
                (Some(e), Some(Ok(r))) if e.check(r) => (r.summary(), Rating::Pass, String::new()),
                (Some(e), Some(Ok(r))) => (r.summary(), Rating::Fail, format!("expected {e}, got {}", r.summary())),
            };
            if cq.kind == CqKind::Cq && expectation != SubExpectation::Manual {
                evaluable += 1;
                passed += usize::from(rating == Rating::Pass);
            }
            rows.push(EvaluationRow {
                cq_id: cq.id.clone(),
                sub_question_id: sq.id.clone(),
                query_present: sq.query.is_some(),
                result_summary: summary,
                rating,
                required_work: join_notes(work, &sq.notes),
            });
        }
    }
    EvaluationTable {
        iteration_label: iteration_label.to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        rows,
        passed,
        evaluable,
        fulfillment_rate: if evaluable == 0 { 0.0 } else { passed as f64 / evaluable as f64 },
        note: (evaluable == 0).then(|| "no evaluable CQs".to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
    Json,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "json" => Ok(TableFormat::Json),
            other => Err(format!("unknown table format '{other}'")),
        }
    }
}

impl fmt::Display for TableFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableFormat::Csv => "csv",
            TableFormat::Markdown => "markdown",
            TableFormat::Json => "json",
        })
    }
}

impl EvaluationRow {
    fn cells(&self) -> [String; 6] {
        [
            self.cq_id.clone(),
            self.sub_question_id.clone(),
            self.query_present.to_string(),
            self.result_summary.clone(),
            self.rating.to_string(),
            self.required_work.clone(),
        ]
    }
}

impl EvaluationTable {
    fn footer(&self) -> [String; 6] {
        [
            "fulfillment_rate".into(),
            format!("{:.4}", self.fulfillment_rate),
            format!("{}/{}", self.passed, self.evaluable),
            String::new(),
            String::new(),
            String::new(),
        ]
    }
}

fn md_cell(s: &str) -> String {
    s.replace('\\', "\\\\").replace('|', "\\|").replace(['\n', '\r'], " ")
}

/// CSV carries no timestamp; Markdown and JSON do.
pub fn render_table(table: &EvaluationTable, format: TableFormat) -> String {
    match format {
        TableFormat::Json => serde_json::to_string_pretty(table).expect("table serializes") + "\n",
        TableFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .quote_style(csv::QuoteStyle::Always)
                .from_writer(Vec::new());
            w.write_record(COLUMNS).expect("in-memory write");
            for row in &table.rows {
                w.write_record(row.cells()).expect("in-memory write");
            }
            w.write_record(table.footer()).expect("in-memory write");
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
        }
        TableFormat::Markdown => {
            let mut out = String::from("# CQ evaluation");
            if !table.iteration_label.is_empty() {
                out.push_str(&format!(": {}", table.iteration_label));
            }
            out.push_str(&format!("\n\ntimestamp: {}\n\n", table.timestamp));
            let line = |cells: &[String]| format!("| {} |\n", cells.iter().map(|c| md_cell(c)).collect::<Vec<_>>().join(" | "));
            out.push_str(&line(&COLUMNS.map(String::from)));
            out.push_str("|---|---|---|---|---|---|\n");
            for row in &table.rows {
                out.push_str(&line(&row.cells()));
            }
            out.push_str(&line(&table.footer()));
            if let Some(note) = &table.note {
                out.push_str(&format!("\nnote: {note}\n"));
            }
            out
        }
    }
}
