//! Comparison of two iteration reports.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use kgf_core::backlog::Rating;
use serde::{Deserialize, Serialize};

use crate::report::ReportSummary;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationDiff {
    pub from: String,
    pub to: String,
    pub fulfillment_rate_before: Option<f64>,
    pub fulfillment_rate_after: Option<f64>,
    /// Missing rates count as 0.
    pub fulfillment_rate_delta: f64,
    pub newly_passing: Vec<String>,
    pub newly_failing: Vec<String>,
    pub triple_count_delta: i64,
    pub new_violations: Vec<String>,
    pub resolved_violations: Vec<String>,
}

impl IterationDiff {
    pub fn is_empty(&self) -> bool {
        self.fulfillment_rate_delta == 0.0
            && self.newly_passing.is_empty()
            && self.newly_failing.is_empty()
            && self.triple_count_delta == 0
            && self.new_violations.is_empty()
            && self.resolved_violations.is_empty()
    }

    pub fn to_markdown(&self) -> String {
        let rate = |r: Option<f64>| r.map_or("-".to_string(), |r| format!("{r:.4}"));
        let mut out = format!("# Changes from {} to {}\n\n", self.from, self.to);
        let _ = writeln!(
            out,
            "fulfillment rate: {} -> {} ({:+.4})",
            rate(self.fulfillment_rate_before),
            rate(self.fulfillment_rate_after),
            self.fulfillment_rate_delta
        );
        let _ = writeln!(out, "triples: {:+}", self.triple_count_delta);
        for (title, items) in [
            ("newly passing", &self.newly_passing),
            ("newly failing", &self.newly_failing),
            ("new violations", &self.new_violations),
            ("resolved violations", &self.resolved_violations),
        ] {
            if !items.is_empty() {
                let _ = write!(out, "\n## {title}\n\n");
                for i in items {
                    let _ = writeln!(out, "- {i}");
                }
            }
        }
        out
    }
}

pub fn diff_iterations(from: (&str, &ReportSummary), to: (&str, &ReportSummary)) -> IterationDiff {
    let (a, b) = (from.1, to.1);
    let passes = |s: &ReportSummary, id: &str| s.ratings.get(id) == Some(&Rating::Pass);
    let newly_passing = b.ratings.keys().filter(|id| passes(b, id) && !passes(a, id)).cloned().collect();
    let newly_failing = b
        .ratings
        .keys()
        .filter(|id| passes(a, id) && !passes(b, id))
        .cloned()
        .collect();
    let va: BTreeSet<&String> = a.violations.iter().collect();
    let vb: BTreeSet<&String> = b.violations.iter().collect();
    IterationDiff {
        from: from.0.to_string(),
        to: to.0.to_string(),
        fulfillment_rate_before: a.fulfillment_rate,
        fulfillment_rate_after: b.fulfillment_rate,
        fulfillment_rate_delta: b.fulfillment_rate.unwrap_or(0.0) - a.fulfillment_rate.unwrap_or(0.0),
        newly_passing,
        newly_failing,
        triple_count_delta: b.triple_count as i64 - a.triple_count as i64,
        new_violations: vb.difference(&va).map(|s| s.to_string()).collect(),
        resolved_violations: va.difference(&vb).map(|s| s.to_string()).collect(),
    }
}

#[derive(Deserialize)]
struct StoredReport {
    iteration_label: String,
    summary: ReportSummary,
}

/// Reads the label and summary of a `report.json`.
pub fn read_summary(path: &Path) -> Result<(String, ReportSummary), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let r: StoredReport = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((r.iteration_label, r.summary))
}
