//! The iteration runner. Stages run in procedure order; a failed stage
//! skips the stages that depend on it and nothing else.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kgf_core::backlog::{build_cost_benefit, load_backlog, render_table, Backlog, EvaluationTable, TableFormat};
use kgf_core::mapping::{apply_mapping, compile_mapping};
use kgf_core::ontology::{check_mapping_conformance, extract_vocabulary, lint, load_ontology, render_findings, Vocabulary};
use kgf_core::prep::{clean, denormalize, ingest_csv, profile, Table};
use kgf_core::quality::{run_levels_2_and_3, Evidence, FileSyntax, Level1, OverallStatus, QualityReport};
use kgf_core::query::{run_integrity_queries, NamedQuery};
use kgf_core::rdf::{
    check_syntax_str, parse_nquads_lenient, parse_turtle, parse_turtle_lenient, serialize_dataset, serialize_graph, Graph,
    RdfFormat,
};
use kgf_core::shapes::parse_shapes;
use kgf_core::store::Store;
use serde::Serialize;

use crate::manifest::ProjectManifest;
use crate::report::{IterationReport, ReportSummary, StageRecord, StageStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Ingest the sources and profile the tables.
    Profile,
    /// Clean and denormalize.
    Prep,
    /// Load the ontology, lint it and extract the vocabulary.
    Model,
    /// Compile and apply the mappings, serialize the graph.
    Map,
    /// Import into the store and run the integrity queries.
    Load,
    Quality,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Profile,
        Stage::Prep,
        Stage::Model,
        Stage::Map,
        Stage::Load,
        Stage::Quality,
        Stage::Evaluate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Profile => "profile",
            Stage::Prep => "prep",
            Stage::Model => "model",
            Stage::Map => "map",
            Stage::Load => "load",
            Stage::Quality => "quality",
            Stage::Evaluate => "evaluate",
        }
    }

    pub fn depends_on(self) -> &'static [Stage] {
        match self {
            Stage::Profile | Stage::Model => &[],
            Stage::Prep => &[Stage::Profile],
            Stage::Map => &[Stage::Prep],
            Stage::Load => &[Stage::Map],
            Stage::Quality | Stage::Evaluate => &[Stage::Load],
        }
    }

    /// This stage and everything it needs, in procedure order.
    pub fn with_prerequisites(self) -> Vec<Stage> {
        let mut need = vec![self];
        let mut i = 0;
        while i < need.len() {
            for d in need[i].depends_on() {
                if !need.contains(d) {
                    need.push(*d);
                }
            }
            i += 1;
        }
        // modeling feeds the conformance check and the store
        if self >= Stage::Map && !need.contains(&Stage::Model) {
            need.push(Stage::Model);
        }
        need.sort();
        need
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A loaded RDF data source.
struct RdfSource {
    path: PathBuf,
    graph: Graph,
}

struct Runner<'m> {
    m: &'m ProjectManifest,
    dir: PathBuf,
    report: IterationReport,
    tables: Vec<Table>,
    rdf_sources: Vec<RdfSource>,
    ontology: Option<Graph>,
    vocabulary: Option<Vocabulary>,
    kg_path: Option<PathBuf>,
    store: Option<Store>,
    backlog: Option<Backlog>,
    quality: Option<QualityReport>,
    evaluation: Option<EvaluationTable>,
}

type StageResult = Result<(), String>;

/// Runs every stage of an iteration and writes all artifacts under
/// `output_dir/iteration_label/`.
pub fn run_iteration(manifest: &ProjectManifest) -> std::io::Result<IterationReport> {
    run_stages(manifest, &Stage::ALL)
}

/// Runs the given stages (sorted into procedure order) and writes their
/// artifacts plus `report.json`. Only I/O errors on the output directory
/// are returned; stage failures are recorded in the report.
pub fn run_stages(manifest: &ProjectManifest, stages: &[Stage]) -> std::io::Result<IterationReport> {
    let dir = manifest.iteration_dir();
    std::fs::create_dir_all(&dir)?;
    let mut plan = stages.to_vec();
    plan.sort();
    plan.dedup();
    let mut r = Runner {
        m: manifest,
        dir,
        report: IterationReport::new(manifest),
        tables: Vec::new(),
        rdf_sources: Vec::new(),
        ontology: None,
        vocabulary: None,
        kg_path: None,
        store: None,
        backlog: None,
        quality: None,
        evaluation: None,
    };
    for stage in plan {
        let blocked: Vec<Stage> = stage
            .depends_on()
            .iter()
            .copied()
            .filter(|d| r.report.stage(*d).is_none_or(|s| s.status != StageStatus::Ok))
            .collect();
        if !blocked.is_empty() {
            let names: Vec<&str> = blocked.iter().map(|s| s.as_str()).collect();
            r.report.stages.push(StageRecord {
                stage,
                status: StageStatus::Skipped,
                duration_ms: 0.0,
                error: Some(format!("needs {}", names.join(", "))),
            });
            continue;
        }
        let start = Instant::now();
        let outcome = match stage {
            Stage::Profile => r.profile(),
            Stage::Prep => r.prep(),
            Stage::Model => r.model(),
            Stage::Map => r.map(),
            Stage::Load => r.load(),
            Stage::Quality => r.quality(),
            Stage::Evaluate => r.evaluate(),
        };
        let duration_ms = start.elapsed().as_secs_f64() * 1000.0;
        r.report.stages.push(StageRecord {
            stage,
            status: if outcome.is_ok() { StageStatus::Ok } else { StageStatus::Failed },
            duration_ms,
            error: outcome.err(),
        });
    }
    r.finish()?;
    Ok(r.report)
}

fn write(dir: &Path, artifacts: &mut Vec<String>, rel: &str, contents: &str) -> StageResult {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
    }
    std::fs::write(&path, contents).map_err(|e| format!("{}: {e}", path.display()))?;
    if !artifacts.iter().any(|a| a == rel) {
        artifacts.push(rel.to_string());
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report values serialize") + "\n"
}

impl Runner<'_> {
    fn write(&mut self, rel: &str, contents: &str) -> StageResult {
        write(&self.dir, &mut self.report.artifacts, rel, contents)
    }

    /// Path as shown in reports: relative to the manifest when possible.
    fn display(&self, path: &Path) -> String {
        path.strip_prefix(&self.m.base_dir).unwrap_or(path).display().to_string()
    }

    fn profile(&mut self) -> StageResult {
        for src in &self.m.data_sources {
            let path = self.m.resolve(&src.path);
            match src.format.rdf() {
                None => {
                    let options = src.options.clone().unwrap_or_default();
                    let mut t = ingest_csv(&path, &options).map_err(|e| format!("{}: {e}", src.name))?;
                    t.name = src.name.clone();
                    let types = src.types.iter().map(|(k, v)| (k.clone(), *v)).collect();
                    t.declare_types(&types).map_err(|e| format!("{}: {e}", src.name))?;
                    let p = profile(&t);
                    self.write(&format!("profiles/{}.json", src.name), &(p.to_json() + "\n"))?;
                    self.write(&format!("profiles/{}.md", src.name), &p.to_markdown())?;
                    self.report.profiles.push(p);
                    self.tables.push(t);
                }
                Some(format) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                    // syntax errors are reported by quality level 1; the
                    // statements that do parse are kept
                    let graph = match format {
                        RdfFormat::Turtle => parse_turtle_lenient(&text, None).0,
                        RdfFormat::NTriples | RdfFormat::NQuads => {
                            let (d, _) = parse_nquads_lenient(&text);
                            d.quads().map(|(_, t)| t.clone()).collect()
                        }
                    };
                    let report = check_syntax_str(&text, format, None);
                    self.report
                        .source_syntax
                        .push(FileSyntax::from_report(self.display(&path), report));
                    self.rdf_sources.push(RdfSource { path, graph });
                }
            }
        }
        Ok(())
    }

    fn prep(&mut self) -> StageResult {
        for (i, step) in self.m.prep.iter().enumerate() {
            let at = format!("prep step {}", i + 1);
            if let Some(name) = &step.clean {
                let idx = self
                    .tables
                    .iter()
                    .position(|t| &t.name == name)
                    .ok_or_else(|| format!("{at}: no table '{name}'"))?;
                let (t, log) = clean(&self.tables[idx], &step.ops).map_err(|e| format!("{at}: {e}"))?;
                self.tables[idx] = t;
                self.report.prep_logs.entry(name.clone()).or_default().entries.extend(log.entries);
            } else if let Some(spec) = &step.join {
                let mut joined = denormalize(&self.tables, spec).map_err(|e| format!("{at}: {e}"))?;
                let out = step.output.clone().unwrap_or_else(|| spec.left_table.clone());
                joined.name = out.clone();
                match self.tables.iter().position(|t| t.name == out) {
                    Some(idx) => self.tables[idx] = joined,
                    None => self.tables.push(joined),
                }
            }
        }
        let tables = std::mem::take(&mut self.tables);
        for t in &tables {
            self.write(&format!("prep/{}.csv", t.name), &t.to_csv())?;
        }
        self.tables = tables;
        let logs = json(&self.report.prep_logs);
        self.write("prep/log.json", &logs)
    }

    fn model(&mut self) -> StageResult {
        let path = self.m.resolve(&self.m.ontology);
        let graph = load_ontology(&path).map_err(|e| format!("ontology {}: {e}", self.display(&path)))?;
        let vocabulary = extract_vocabulary(&graph);
        self.report.lint_findings = lint(&vocabulary);
        let findings = self.report.lint_findings.clone();
        self.write("lint.json", &json(&findings))?;
        self.write("lint.txt", &render_findings(&findings))?;
        self.write("vocabulary.json", &json(&vocabulary))?;
        self.ontology = Some(graph);
        self.vocabulary = Some(vocabulary);
        Ok(())
    }

    fn map(&mut self) -> StageResult {
        let mut kg = Graph::new();
        for mapping in &self.m.mappings {
            let path = self.m.resolve(mapping);
            let name = self.display(&path);
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{name}: {e}"))?;
            let plan = compile_mapping(&text).map_err(|e| format!("{name}: {e}"))?;
            if let Some(v) = &self.vocabulary {
                self.report.conformance_findings.extend(check_mapping_conformance(&plan, v));
            }
            let (graph, log) = apply_mapping(&plan, &self.tables).map_err(|e| format!("{name}: {e}"))?;
            kg.extend_from(&graph);
            self.report.mapping_logs.insert(name, log);
        }
        for src in &self.rdf_sources {
            kg.extend_from(&src.graph);
        }
        let format = self.m.serialization.format();
        let rel = format!("kg.{}", format.extension());
        self.write(&rel, &serialize_graph(&kg, format))?;
        self.kg_path = Some(self.dir.join(&rel));
        self.report.summary.triple_count = kg.len();
        let (logs, findings) = (json(&self.report.mapping_logs), json(&self.report.conformance_findings));
        self.write("mapping_log.json", &logs)?;
        self.write("conformance.json", &findings)
    }

    fn load(&mut self) -> StageResult {
        // the graph is read back from its artifact, as a client would
        let kg_path = self.kg_path.clone().expect("map stage ran");
        let text = std::fs::read_to_string(&kg_path).map_err(|e| format!("{}: {e}", kg_path.display()))?;
        let kg = match self.m.serialization.format() {
            RdfFormat::Turtle => parse_turtle(&text, None).map_err(|e| format!("{}: {e}", kg_path.display()))?,
            _ => {
                let (d, errors) = parse_nquads_lenient(&text);
                if let Some(e) = errors.first() {
                    return Err(format!("{}: {e}", kg_path.display()));
                }
                d.quads().map(|(_, t)| t.clone()).collect()
            }
        };
        let mut store = Store::from_graph(&kg);
        if let Some(o) = &self.ontology {
            store.import_graph(o, None);
        }
        let mut queries = Vec::new();
        for q in &self.m.integrity_queries {
            let path = self.m.resolve(&q.path);
            let query = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            queries.push(NamedQuery {
                name: q.name.clone(),
                query,
                expectation: q.expectation,
            });
        }
        self.report.integrity = run_integrity_queries(&store, &queries);
        self.report.store_stats = Some(store.stats());
        let (integrity, stats) = (json(&self.report.integrity), json(&self.report.store_stats));
        self.write("integrity.json", &integrity)?;
        self.write("store_stats.json", &stats)?;
        self.store = Some(store);
        Ok(())
    }

    fn load_backlog(&mut self) -> Result<&Backlog, String> {
        if self.backlog.is_none() {
            let path = self.m.resolve(&self.m.backlog);
            let b = load_backlog(&path).map_err(|e| format!("backlog {}: {e}", self.display(&path)))?;
            self.backlog = Some(b);
        }
        Ok(self.backlog.as_ref().expect("just loaded"))
    }

    fn quality(&mut self) -> StageResult {
        let shapes = match &self.m.shapes {
            Some(p) => {
                let path = self.m.resolve(p);
                let name = self.display(&path);
                let text = std::fs::read_to_string(&path).map_err(|e| format!("{name}: {e}"))?;
                let graph = parse_turtle(&text, None).map_err(|e| format!("shapes {name}: {e}"))?;
                parse_shapes(&graph).map_err(|e| format!("shapes {name}: {e}"))?
            }
            None => Vec::new(),
        };
        let constraints = self.load_backlog()?.query_constraints();

        let mut inputs = vec![self.m.resolve(&self.m.ontology)];
        inputs.extend(self.rdf_sources.iter().map(|s| s.path.clone()));
        inputs.extend(self.kg_path.clone());
        let files = inputs
            .iter()
            .map(|p| {
                let mut f = FileSyntax::check(p);
                f.path = self.display(p);
                if let Ok(rel) = p.strip_prefix(&self.dir) {
                    f.path = rel.display().to_string();
                }
                f
            })
            .collect();
        let rules = self.m.ruleset.rules();
        let store = self.store.as_mut().expect("load stage ran");
        let report = run_levels_2_and_3(Level1::from_files(files), store, &rules, &shapes, &constraints);
        let dataset = store.to_dataset();
        let text = serialize_dataset(&dataset, RdfFormat::NQuads).map_err(|e| e.to_string())?;
        self.write("store.nq", &text)?;
        self.quality = Some(report);
        Ok(())
    }

    fn evaluate(&mut self) -> StageResult {
        let label = self.m.iteration_label.clone();
        self.load_backlog()?;
        let backlog = self.backlog.as_ref().expect("loaded");
        let store = self.store.as_ref().expect("load stage ran");
        let table = kgf_core::backlog::evaluate_backlog(backlog, store, &label);
        let matrix = build_cost_benefit(backlog);
        self.write("evaluation.csv", &render_table(&table, TableFormat::Csv))?;
        self.write("evaluation.md", &render_table(&table, TableFormat::Markdown))?;
        self.write("evaluation.json", &render_table(&table, TableFormat::Json))?;
        self.write("cost_benefit.md", &matrix.to_markdown())?;
        self.report.cost_benefit = Some(matrix);
        self.evaluation = Some(table);
        Ok(())
    }

    fn finish(&mut self) -> std::io::Result<()> {
        let faultlessness: Vec<f64> = self
            .report
            .profiles
            .iter()
            .filter_map(|p| p.criterion("faultlessness").and_then(|c| c.score.value()))
            .collect();
        let evidence = Evidence {
            faultlessness: (!faultlessness.is_empty()).then(|| faultlessness.iter().sum::<f64>() / faultlessness.len() as f64),
            fulfillment_rate: self.evaluation.as_ref().map(|t| t.fulfillment_rate),
        };
        if let Some(q) = self.quality.take() {
            let q = q.with_evidence(evidence);
            let mut artifacts = std::mem::take(&mut self.report.artifacts);
            let results = [
                write(&self.dir, &mut artifacts, "quality.json", &json(&q.to_json())),
                write(&self.dir, &mut artifacts, "quality.md", &q.to_markdown()),
            ];
            self.report.artifacts = artifacts;
            for r in results {
                r.map_err(std::io::Error::other)?;
            }
            self.quality = Some(q);
        }
        self.report.summary = ReportSummary::collect(
            self.report.summary.triple_count,
            self.quality.as_ref(),
            self.evaluation.as_ref(),
            &self.report.integrity,
        );
        let stage_failed = self.report.stages.iter().any(|s| s.status != StageStatus::Ok);
        let quality_failed = self.quality.as_ref().is_some_and(|q| q.overall_status() == OverallStatus::Fail);
        self.report.overall = if stage_failed || quality_failed {
            OverallStatus::Fail
        } else {
            OverallStatus::Pass
        };
        self.report.quality = self.quality.clone();
        self.report.evaluation = self.evaluation.clone();
        let mut artifacts = std::mem::take(&mut self.report.artifacts);
        if !artifacts.iter().any(|a| a == "report.json") {
            artifacts.push("report.json".into());
        }
        artifacts.sort();
        self.report.artifacts = artifacts;
        std::fs::write(self.dir.join("report.json"), json(&self.report))
    }
}

/// Used by the `lint` subcommand to decide its exit status.
pub fn has_lint_errors(report: &IterationReport) -> bool {
    use kgf_core::ontology::Severity;
    report
        .lint_findings
        .iter()
        .chain(&report.conformance_findings)
        .any(|f| f.severity == Severity::Error)
}

