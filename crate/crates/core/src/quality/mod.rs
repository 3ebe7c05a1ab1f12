//! Three-level quality check: syntax of the RDF inputs, logical
//! consistency after materialization, and shape plus query constraints on
//! the materialized store. Results are also summarized along six quality
//! dimensions.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::inference::{check_consistency, ConsistencyReport, Rule};
use crate::rdf::{validate_syntax, RdfFormat, SyntaxError, SyntaxReport};
use crate::shapes::{focus_nodes, run_query_constraints, validate, Component, QueryConstraint, Shape, ValidationReport};
use crate::store::Store;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileSyntax {
    pub path: String,
    pub ok: bool,
    pub triple_count: usize,
    pub errors: Vec<SyntaxError>,
}

impl FileSyntax {
    pub fn from_report(path: impl Into<String>, report: SyntaxReport) -> FileSyntax {
        FileSyntax {
            path: path.into(),
            ok: report.ok,
            triple_count: report.triple_count,
            errors: report.errors,
        }
    }

    /// Reads and checks one file; unreadable files and unknown extensions
    /// are reported as errors at line 1.
    pub fn check(path: &Path) -> FileSyntax {
        let name = path.display().to_string();
        let failed = |message: String| FileSyntax {
            path: name.clone(),
            ok: false,
            triple_count: 0,
            errors: vec![SyntaxError::new(1, 1, message)],
        };
        let Some(format) = RdfFormat::from_path(path) else {
            return failed("unknown RDF file extension".to_string());
        };
        match validate_syntax(path, format) {
            Ok(report) => FileSyntax::from_report(name, report),
            Err(e) => failed(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Level1 {
    pub passed: bool,
    pub files: Vec<FileSyntax>,
}

impl Level1 {
    pub fn from_files(files: Vec<FileSyntax>) -> Level1 {
        Level1 {
            passed: files.iter().all(|f| f.ok),
            files,
        }
    }

    pub fn error_count(&self) -> usize {
        self.files.iter().map(|f| f.errors.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level2 {
    pub passed: bool,
    pub report: ConsistencyReport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level3 {
    pub passed: bool,
    pub shapes: ValidationReport,
    pub queries: ValidationReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Accuracy,
    Completeness,
    Consistency,
    Timeliness,
    Trustworthiness,
    Availability,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::Accuracy,
        Dimension::Completeness,
        Dimension::Consistency,
        Dimension::Timeliness,
        Dimension::Trustworthiness,
        Dimension::Availability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Accuracy => "accuracy",
            Dimension::Completeness => "completeness",
            Dimension::Consistency => "consistency",
            Dimension::Timeliness => "timeliness",
            Dimension::Trustworthiness => "trustworthiness",
            Dimension::Availability => "availability",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DimensionStatus {
    #[serde(rename = "measured")]
    Measured,
    #[serde(rename = "manual")]
    Manual,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl DimensionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DimensionStatus::Measured => "measured",
            DimensionStatus::Manual => "manual",
            DimensionStatus::NotApplicable => "n/a",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionRow {
    pub dimension: Dimension,
    pub status: DimensionStatus,
    pub evidence: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OverallStatus {
    Pass,
    Fail,
}

impl fmt::Display for OverallStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverallStatus::Pass => "pass",
            OverallStatus::Fail => "fail",
        })
    }
}

/// Measurements from outside the store that feed the dimension rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evidence {
    /// Mean faultlessness score of the profiled source tables.
    pub faultlessness: Option<f64>,
    /// CQ fulfillment rate of the current iteration.
    pub fulfillment_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub level1: Level1,
    pub level2: Level2,
    pub level3: Level3,
    /// Always the six dimensions, in [`Dimension::ALL`] order.
    pub dimensions: Vec<DimensionRow>,
    /// (satisfied, total) minCount checks over all focus nodes.
    pub min_count_coverage: (usize, usize),
    pub evidence: Evidence,
}

fn min_count_coverage(store: &Store, shapes: &[Shape], report: &ValidationReport) -> (usize, usize) {
    let total: usize = shapes
        .iter()
        .map(|s| {
            let n = s.constraints.iter().filter(|c| c.min_count.is_some_and(|m| m > 0)).count();
            if n == 0 {
                0
            } else {
                n * focus_nodes(store, s).len()
            }
        })
        .sum();
    let failed = report.violations.iter().filter(|v| v.constraint == Component::MinCount).count();
    (total - failed, total)
}

/// Runs all three levels. Level 2 materializes `store` with `rules`, and
/// level 3 validates the materialized store.
pub fn run_quality_checks(
    inputs: &[PathBuf],
    store: &mut Store,
    rules: &[Rule],
    shapes: &[Shape],
    query_constraints: &[QueryConstraint],
) -> QualityReport {
    let level1 = Level1::from_files(inputs.iter().map(|p| FileSyntax::check(p)).collect());
    run_levels_2_and_3(level1, store, rules, shapes, query_constraints)
}

/// Same as [`run_quality_checks`] with level 1 already computed.
pub fn run_levels_2_and_3(
    level1: Level1,
    store: &mut Store,
    rules: &[Rule],
    shapes: &[Shape],
    query_constraints: &[QueryConstraint],
) -> QualityReport {
    let consistency = check_consistency(store, rules);
    let level2 = Level2 {
        passed: consistency.consistent,
        report: consistency,
    };
    let shape_report = validate(store, shapes);
    let query_report = run_query_constraints(store, query_constraints);
    let coverage = min_count_coverage(store, shapes, &shape_report);
    let level3 = Level3 {
        passed: shape_report.conforms && query_report.conforms,
        shapes: shape_report,
        queries: query_report,
    };
    let mut report = QualityReport {
        level1,
        level2,
        level3,
        dimensions: Vec::new(),
        min_count_coverage: coverage,
        evidence: Evidence::default(),
    };
    report.dimensions = report.dimension_rows();
    report
}

impl QualityReport {
    /// Adds outside measurements and recomputes the dimension rows.
    pub fn with_evidence(mut self, evidence: Evidence) -> QualityReport {
        self.evidence = evidence;
        self.dimensions = self.dimension_rows();
        self
    }

    fn dimension_rows(&self) -> Vec<DimensionRow> {
        Dimension::ALL
            .iter()
            .map(|&d| {
                let (status, evidence) = self.dimension(d);
                DimensionRow {
                    dimension: d,
                    status,
                    evidence,
                }
            })
            .collect()
    }

    fn dimension(&self, d: Dimension) -> (DimensionStatus, String) {
        use DimensionStatus::*;
        match d {
            Dimension::Consistency => {
                let r = &self.level2.report;
                if r.consistent {
                    (Measured, "consistent".into())
                } else {
                    (Measured, format!("inconsistent: {} violations", r.violations.len()))
                }
            }
            Dimension::Completeness => {
                let mut parts = Vec::new();
                let (ok, total) = self.min_count_coverage;
                if total > 0 {
                    parts.push(format!("minCount coverage {ok}/{total} ({:.4})", ok as f64 / total as f64));
                }
                if let Some(rate) = self.evidence.fulfillment_rate {
                    parts.push(format!("CQ fulfillment rate {rate:.4}"));
                }
                if parts.is_empty() {
                    (Manual, "no minCount shapes and no CQ evaluation".into())
                } else {
                    (Measured, parts.join("; "))
                }
            }
            Dimension::Accuracy => match self.evidence.faultlessness {
                Some(f) => (Measured, format!("source faultlessness {f:.4}")),
                None => (Manual, "no profiled source tables".into()),
            },
            Dimension::Timeliness => (Manual, "currency of the sources is not recorded; review update dates by hand".into()),
            Dimension::Trustworthiness => (Manual, "provenance of the sources has to be reviewed by hand".into()),
            Dimension::Availability => (Manual, "depends on deployment of the query endpoint".into()),
        }
    }

    /// Fail iff any syntax error, consistency violation or constraint
    /// violation exists.
    pub fn overall_status(&self) -> OverallStatus {
        if self.level1.error_count() > 0
            || !self.level2.report.violations.is_empty()
            || !self.level3.shapes.violations.is_empty()
            || !self.level3.queries.violations.is_empty()
        {
            OverallStatus::Fail
        } else {
            OverallStatus::Pass
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "overall": self.overall_status(),
            "level1": self.level1,
            "level2": self.level2,
            "level3": {
                "passed": self.level3.passed,
                "shapes": self.level3.shapes.to_json(),
                "queries": self.level3.queries.to_json(),
            },
            "dimensions": self.dimensions,
        })
    }

    pub fn to_markdown(&self) -> String {
        let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
        let mut out = format!("# Quality report\n\noverall: {}\n\n", self.overall_status());
        out.push_str(&format!("## Level 1: syntax ({})\n\n", mark(self.level1.passed)));
        for f in &self.level1.files {
            out.push_str(&format!("- {}: {} triples", f.path, f.triple_count));
            if f.errors.is_empty() {
                out.push_str(", ok\n");
            } else {
                out.push('\n');
                for e in &f.errors {
                    out.push_str(&format!("  - {e}\n"));
                }
            }
        }
        out.push_str(&format!(
            "\n## Level 2: consistency ({})\n\n{} entailed triples added\n",
            mark(self.level2.passed),
            self.level2.report.entailed_triples_added
        ));
        for v in &self.level2.report.violations {
            out.push_str(&format!("- {}: {}\n", v.rule_name, v.message));
        }
        out.push_str(&format!("\n## Level 3: shapes and queries ({})\n\n", mark(self.level3.passed)));
        out.push_str(&self.level3.shapes.to_markdown());
        if !self.level3.queries.violations.is_empty() {
            out.push('\n');
            out.push_str(&self.level3.queries.to_markdown());
        }
        out.push_str("\n## Dimensions\n\n| dimension | status | evidence |\n|---|---|---|\n");
        for d in &self.dimensions {
            out.push_str(&format!("| {} | {} | {} |\n", d.dimension.as_str(), d.status.as_str(), d.evidence));
        }
        out
    }
}
