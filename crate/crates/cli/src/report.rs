use std::collections::BTreeMap;

use kgf_core::backlog::{CostBenefitMatrix, EvaluationTable, Rating};
use kgf_core::mapping::MappingLog;
use kgf_core::ontology::LintFinding;
use kgf_core::prep::{OpLog, QualityProfile};
use kgf_core::quality::{FileSyntax, OverallStatus, QualityReport};
use kgf_core::query::IntegrityOutcome;
use kgf_core::store::StoreStats;
use serde::{Deserialize, Serialize, Serializer};

use crate::manifest::ProjectManifest;
use crate::pipeline::Stage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Failed,
    /// Not run because a stage it depends on did not succeed.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: StageStatus,
    pub duration_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// The parts of a report that later iterations are compared on.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    /// Triples in the graph artifact, before reasoning.
    pub triple_count: usize,
    pub fulfillment_rate: Option<f64>,
    pub passed: usize,
    pub evaluable: usize,
    /// Rating per sub-question id.
    pub ratings: BTreeMap<String, Rating>,
    /// One line per quality violation or failed integrity query.
    pub violations: Vec<String>,
}

impl ReportSummary {
    pub fn collect(
        triple_count: usize,
        quality: Option<&QualityReport>,
        evaluation: Option<&EvaluationTable>,
        integrity: &[IntegrityOutcome],
    ) -> ReportSummary {
        let mut violations = Vec::new();
        if let Some(q) = quality {
            for f in &q.level1.files {
                for e in &f.errors {
                    violations.push(format!("syntax {}:{}:{} {}", f.path, e.line, e.column, e.message));
                }
            }
            for v in &q.level2.report.violations {
                let bindings: Vec<String> = v.bindings.iter().map(|(k, t)| format!("{k}={t}")).collect();
                violations.push(format!("consistency {} {}", v.rule_name, bindings.join(" ")));
            }
            for v in q.level3.shapes.violations.iter().chain(&q.level3.queries.violations) {
                let mut line = format!("shape {} {}", v.shape, v.constraint);
                if let Some(f) = &v.focus_node {
                    line.push_str(&format!(" focus={f}"));
                }
                if let Some(p) = &v.path {
                    line.push_str(&format!(" path={p}"));
                }
                if let Some(x) = &v.value {
                    line.push_str(&format!(" value={x}"));
                }
                violations.push(line);
            }
        }
        for o in integrity.iter().filter(|o| !o.passed) {
            violations.push(format!("integrity {}: {}", o.name, o.detail));
        }
        violations.sort();
        violations.dedup();
        ReportSummary {
            triple_count,
            fulfillment_rate: evaluation.map(|t| t.fulfillment_rate),
            passed: evaluation.map_or(0, |t| t.passed),
            evaluable: evaluation.map_or(0, |t| t.evaluable),
            ratings: evaluation
                .map(|t| t.rows.iter().map(|r| (r.sub_question_id.clone(), r.rating)).collect())
                .unwrap_or_default(),
            violations,
        }
    }
}

fn quality_json<S: Serializer>(q: &Option<QualityReport>, s: S) -> Result<S::Ok, S::Error> {
    q.as_ref().map(QualityReport::to_json).serialize(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationReport {
    pub project_name: String,
    pub iteration_label: String,
    pub started_at: String,
    pub manifest: ProjectManifest,
    /// One entry per stage that was requested, in execution order.
    pub stages: Vec<StageRecord>,
    pub profiles: Vec<QualityProfile>,
    /// Syntax check of the RDF data sources at ingestion.
    pub source_syntax: Vec<FileSyntax>,
    pub prep_logs: BTreeMap<String, OpLog>,
    pub lint_findings: Vec<LintFinding>,
    pub conformance_findings: Vec<LintFinding>,
    pub mapping_logs: BTreeMap<String, MappingLog>,
    pub integrity: Vec<IntegrityOutcome>,
    pub store_stats: Option<StoreStats>,
    #[serde(serialize_with = "quality_json")]
    pub quality: Option<QualityReport>,
    pub evaluation: Option<EvaluationTable>,
    pub cost_benefit: Option<CostBenefitMatrix>,
    pub summary: ReportSummary,
    pub overall: OverallStatus,
    /// Files written, relative to the iteration directory.
    pub artifacts: Vec<String>,
}

impl IterationReport {
    pub fn new(manifest: &ProjectManifest) -> IterationReport {
        IterationReport {
            project_name: manifest.project_name.clone(),
            iteration_label: manifest.iteration_label.clone(),
            started_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            manifest: manifest.clone(),
            stages: Vec::new(),
            profiles: Vec::new(),
            source_syntax: Vec::new(),
            prep_logs: BTreeMap::new(),
            lint_findings: Vec::new(),
            conformance_findings: Vec::new(),
            mapping_logs: BTreeMap::new(),
            integrity: Vec::new(),
            store_stats: None,
            quality: None,
            evaluation: None,
            cost_benefit: None,
            summary: ReportSummary::default(),
            overall: OverallStatus::Fail,
            artifacts: Vec::new(),
        }
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    pub fn failed_stages(&self) -> impl Iterator<Item = &StageRecord> {
        self.stages.iter().filter(|s| s.status != StageStatus::Ok)
    }
}
