//! Project manifest: one TOML file describing sources, preparation steps,
//! modeling artifacts, checks and outputs of an iteration.
//!
//! ```toml
//! project_name = "factory"
//! iteration_label = "it-1"
//! ontology = "ontology.ttl"
//! mappings = ["factory.map"]
//! shapes = "shapes.ttl"          # optional
//! ruleset = "default"            # none | rdfs | default
//! backlog = "backlog.toml"
//! output_dir = "out"
//! serialization = "nquads"       # nquads | turtle
//!
//! [[data_sources]]
//! name = "machines"
//! path = "data/machines.csv"
//! format = "csv"                 # csv | turtle | ntriples | nquads
//! options = { delimiter = ",", null_markers = ["", "n/a"] }
//! types = { commissioned = "date" }
//!
//! [[prep]]
//! clean = "machines"
//! ops = [{ op = "trim" }, { op = "cast", column = "power_kw", to = "decimal" }]
//!
//! [[prep]]
//! join = { left_table = "orders", right_table = "customers", left_key = "customer_id", right_key = "id" }
//! output = "orders_flat"         # defaults to the left table name
//!
//! [[integrity_queries]]
//! name = "machines-exist"
//! path = "queries/machines.rq"
//! expectation = "nonempty"       # optional
//! ```
//!
//! Relative paths are resolved against the manifest's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kgf_core::inference::RuleSetKind;
use kgf_core::prep::{CleanOp, ColumnType, CsvOptions, JoinSpec};
use kgf_core::query::Expectation;
use kgf_core::rdf::RdfFormat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {path}: {message}")]
    Parse { path: String, message: String },
    #[error("{field}: path {path} does not exist")]
    MissingPath { field: String, path: String },
    #[error("duplicate name '{name}' in {section}")]
    DuplicateName { section: &'static str, name: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Turtle,
    Ntriples,
    Nquads,
}

impl DataFormat {
    pub fn rdf(self) -> Option<RdfFormat> {
        match self {
            DataFormat::Csv => None,
            DataFormat::Turtle => Some(RdfFormat::Turtle),
            DataFormat::Ntriples => Some(RdfFormat::NTriples),
            DataFormat::Nquads => Some(RdfFormat::NQuads),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Serialization {
    #[default]
    Nquads,
    Turtle,
}

impl Serialization {
    pub fn format(self) -> RdfFormat {
        match self {
            Serialization::Nquads => RdfFormat::NQuads,
            Serialization::Turtle => RdfFormat::Turtle,
        }
    }
}

impl FromStr for Serialization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nquads" | "nq" => Ok(Serialization::Nquads),
            "turtle" | "ttl" => Ok(Serialization::Turtle),
            other => Err(format!("unknown serialization '{other}' (expected turtle or nquads)")),
        }
    }
}

impl fmt::Display for Serialization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Serialization::Nquads => "nquads",
            Serialization::Turtle => "turtle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    pub name: String,
    pub path: PathBuf,
    pub format: DataFormat,
    /// CSV ingestion options.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<CsvOptions>,
    /// Declared CSV column types.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub types: BTreeMap<String, ColumnType>,
}

/// One preparation step: either `clean` with `ops`, or `join` with an
/// optional `output` name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepStep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clean: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ops: Vec<CleanOp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub join: Option<JoinSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrityQuery {
    pub name: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectation: Option<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectManifest {
    pub project_name: String,
    pub iteration_label: String,
    #[serde(default)]
    pub data_sources: Vec<DataSource>,
    #[serde(default)]
    pub prep: Vec<PrepStep>,
    pub ontology: PathBuf,
    #[serde(default)]
    pub mappings: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shapes: Option<PathBuf>,
    #[serde(default)]
    pub ruleset: RuleSetKind,
    pub backlog: PathBuf,
    #[serde(default)]
    pub integrity_queries: Vec<IntegrityQuery>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub serialization: Serialization,
    /// Directory the relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Values that take precedence over the manifest file, typically from
/// command-line flags or `KGF_` environment variables.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub iteration_label: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub serialization: Option<Serialization>,
}

impl ProjectManifest {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Where this iteration's artifacts go.
    pub fn iteration_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir).join(&self.iteration_label)
    }

    /// Table names available after ingestion, in declaration order.
    pub fn source_tables(&self) -> impl Iterator<Item = &str> {
        self.data_sources.iter().filter(|d| d.format == DataFormat::Csv).map(|d| d.name.as_str())
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(label) = &o.iteration_label {
            self.iteration_label = label.clone();
        }
        if let Some(dir) = &o.output_dir {
            // flags are relative to the working directory, not the manifest
            self.output_dir = std::path::absolute(dir).unwrap_or_else(|_| dir.clone());
        }
        if let Some(s) = o.serialization {
            self.serialization = s;
        }
    }

    fn input_paths(&self) -> Vec<(String, &Path)> {
        let mut out = Vec::new();
        for d in &self.data_sources {
            out.push((format!("data_sources.{}", d.name), d.path.as_path()));
        }
        out.push(("ontology".to_string(), self.ontology.as_path()));
        for m in &self.mappings {
            out.push(("mappings".to_string(), m.as_path()));
        }
        if let Some(s) = &self.shapes {
            out.push(("shapes".to_string(), s.as_path()));
        }
        out.push(("backlog".to_string(), self.backlog.as_path()));
        for q in &self.integrity_queries {
            out.push((format!("integrity_queries.{}", q.name), q.path.as_path()));
        }
        out
    }

    /// Checks names, preparation steps and that every referenced input
    /// exists.
    pub fn validate(&self) -> Result<(), ManifestError> {
        if self.project_name.trim().is_empty() {
            return Err(ManifestError::Invalid("project_name is empty".into()));
        }
        let label = &self.iteration_label;
        if label.is_empty() || label == "." || label == ".." || label.contains(['/', '\\']) {
            return Err(ManifestError::Invalid(format!(
                "iteration_label '{label}' cannot be used as a directory name"
            )));
        }
        unique("data_sources", self.data_sources.iter().map(|d| d.name.as_str()))?;
        unique("integrity_queries", self.integrity_queries.iter().map(|q| q.name.as_str()))?;
        for d in &self.data_sources {
            if d.name.is_empty() {
                return Err(ManifestError::Invalid("data source with empty name".into()));
            }
            if d.format != DataFormat::Csv && (d.options.is_some() || !d.types.is_empty()) {
                return Err(ManifestError::Invalid(format!(
                    "data source '{}': options and types only apply to csv sources",
                    d.name
                )));
            }
        }
        self.validate_prep()?;
        if self.mappings.is_empty() && !self.data_sources.iter().any(|d| d.format != DataFormat::Csv) {
            return Err(ManifestError::Invalid("no mappings and no RDF data sources".into()));
        }
        for (field, path) in self.input_paths() {
            let p = self.resolve(path);
            if !p.exists() {
                return Err(ManifestError::MissingPath {
                    field,
                    path: p.display().to_string(),
                });
            }
        }
        Ok(())
    }

    fn validate_prep(&self) -> Result<(), ManifestError> {
        let mut tables: BTreeSet<&str> = self.source_tables().collect();
        for (i, step) in self.prep.iter().enumerate() {
            let at = format!("prep step {}", i + 1);
            match (&step.clean, &step.join) {
                (Some(table), None) => {
                    if step.output.is_some() {
                        return Err(ManifestError::Invalid(format!("{at}: output only applies to joins")));
                    }
                    if step.ops.is_empty() {
                        return Err(ManifestError::Invalid(format!("{at}: clean step without ops")));
                    }
                    if !tables.contains(table.as_str()) {
                        return Err(ManifestError::Invalid(format!("{at}: unknown table '{table}'")));
                    }
                }
                (None, Some(join)) => {
                    if !step.ops.is_empty() {
                        return Err(ManifestError::Invalid(format!("{at}: ops only apply to clean steps")));
                    }
                    for t in [&join.left_table, &join.right_table] {
                        if !tables.contains(t.as_str()) {
                            return Err(ManifestError::Invalid(format!("{at}: unknown table '{t}'")));
                        }
                    }
                    if let Some(out) = &step.output {
                        if *out != join.left_table && tables.contains(out.as_str()) {
                            return Err(ManifestError::DuplicateName {
                                section: "prep outputs",
                                name: out.clone(),
                            });
                        }
                        tables.insert(out.as_str());
                    }
                }
                _ => {
                    return Err(ManifestError::Invalid(format!("{at}: needs exactly one of 'clean' or 'join'")));
                }
            }
        }
        Ok(())
    }
}

fn unique<'a>(section: &'static str, names: impl Iterator<Item = &'a str>) -> Result<(), ManifestError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(ManifestError::DuplicateName {
                section,
                name: n.to_string(),
            });
        }
    }
    Ok(())
}

pub fn parse_manifest(text: &str, base_dir: &Path, origin: &str) -> Result<ProjectManifest, ManifestError> {
    let mut m: ProjectManifest = toml::from_str(text).map_err(|e| ManifestError::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    m.base_dir = base_dir.to_path_buf();
    Ok(m)
}

/// Reads, overrides and validates a manifest.
pub fn load_manifest(path: &Path, overrides: &Overrides) -> Result<ProjectManifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = std::path::absolute(path)
        .ok()
        .and_then(|p| p.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    let mut m = parse_manifest(&text, &base, &path.display().to_string())?;
    m.apply(overrides);
    m.validate()?;
    Ok(m)
}
