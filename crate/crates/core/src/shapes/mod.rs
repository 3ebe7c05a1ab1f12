//! Shape constraints over the store and CQ queries run as constraints.
//!
//! Shapes are read from Turtle using the SHACL vocabulary, restricted to
//! node shapes with `sh:targetClass`, `sh:targetNode` or
//! `sh:targetSubjectsOf`, property shapes whose path is a predicate or an
//! `sh:inversePath`, and the parameters `minCount`, `maxCount`, `datatype`,
//! `class`, `nodeKind`, `pattern`, `in`, `minInclusive` and `maxInclusive`.
//! Node shapes may also carry `nodeKind`, `class` and `in` directly.
//!
//! ```text
//! ex:MachineShape a sh:NodeShape ;
//!     sh:targetClass ex:Machine ;
//!     sh:property [ sh:path ex:serial ; sh:minCount 1 ; sh:datatype xsd:string ] .
//! ```

mod parse;
mod query;
mod validate;

use std::fmt;

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::query::{Expectation, QueryError};
use crate::rdf::{SyntaxError, Term};

pub use parse::{parse_shapes, parse_shapes_str};
pub use query::{run_query_constraints, wrap_cq_as_constraint, QueryConstraint};
pub use validate::{focus_nodes, validate};

#[derive(Debug, Error)]
pub enum ShapesError {
    #[error("shapes document: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("shape {shape}: unsupported parameter {parameter}")]
    UnsupportedParameter { shape: String, parameter: String },
    #[error("shape {shape}: invalid {parameter}: {message}")]
    InvalidParameter {
        shape: String,
        parameter: String,
        message: String,
    },
    #[error("shape {shape} has no target")]
    MissingTarget { shape: String },
    #[error("constraint '{name}': {source}")]
    Query { name: String, source: QueryError },
    #[error("constraint '{name}': expectation {expectation} does not fit a {form} query")]
    ExpectationMismatch {
        name: String,
        expectation: Expectation,
        form: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Class(String),
    Node(Term),
    SubjectsOf(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Path {
    Direct(String),
    Inverse(String),
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Path::Direct(p) => write!(f, "{}", Term::iri(p.as_str())),
            Path::Inverse(p) => write!(f, "^{}", Term::iri(p.as_str())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Iri,
    Literal,
    BlankNode,
}

impl NodeKind {
    pub fn matches(self, term: &Term) -> bool {
        match self {
            NodeKind::Iri => term.is_iri(),
            NodeKind::Literal => term.is_literal(),
            NodeKind::BlankNode => term.is_blank(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Iri => "IRI",
            NodeKind::Literal => "literal",
            NodeKind::BlankNode => "blank node",
        }
    }
}

/// Constraints on the values reached from a focus node through `path`.
#[derive(Debug, Clone)]
pub struct PropertyConstraint {
    pub path: Path,
    pub min_count: Option<u64>,
    pub max_count: Option<u64>,
    pub datatype: Option<String>,
    pub class: Option<String>,
    pub node_kind: Option<NodeKind>,
    pub pattern: Option<Regex>,
    pub in_list: Option<Vec<Term>>,
    pub min_inclusive: Option<f64>,
    pub max_inclusive: Option<f64>,
}

impl PropertyConstraint {
    pub fn new(path: Path) -> PropertyConstraint {
        PropertyConstraint {
            path,
            min_count: None,
            max_count: None,
            datatype: None,
            class: None,
            node_kind: None,
            pattern: None,
            in_list: None,
            min_inclusive: None,
            max_inclusive: None,
        }
    }
}

/// Constraints on the focus node itself.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeConstraint {
    NodeKind(NodeKind),
    Class(String),
    In(Vec<Term>),
}

#[derive(Debug, Clone)]
pub struct Shape {
    /// IRI of the shape, or `_:label` for a blank-node shape.
    pub id: String,
    pub targets: Vec<Target>,
    pub constraints: Vec<PropertyConstraint>,
    pub node_constraints: Vec<NodeConstraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    MinCount,
    MaxCount,
    Datatype,
    Class,
    NodeKind,
    Pattern,
    In,
    MinInclusive,
    MaxInclusive,
    Sparql,
}

impl Component {
    pub fn as_str(self) -> &'static str {
        match self {
            Component::MinCount => "sh:minCount",
            Component::MaxCount => "sh:maxCount",
            Component::Datatype => "sh:datatype",
            Component::Class => "sh:class",
            Component::NodeKind => "sh:nodeKind",
            Component::Pattern => "sh:pattern",
            Component::In => "sh:in",
            Component::MinInclusive => "sh:minInclusive",
            Component::MaxInclusive => "sh:maxInclusive",
            Component::Sparql => "sparql",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub shape: String,
    /// Absent for query constraints.
    pub focus_node: Option<Term>,
    pub constraint: Component,
    pub path: Option<Path>,
    pub value: Option<Term>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub conforms: bool,
    /// Sorted by shape, focus node, constraint, path, value.
    pub violations: Vec<Violation>,
}

#[derive(Serialize)]
struct ViolationJson {
    shape: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    focus_node: Option<String>,
    constraint: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    message: String,
}

impl ValidationReport {
    pub fn from_violations(mut violations: Vec<Violation>) -> ValidationReport {
        violations.sort();
        violations.dedup();
        ValidationReport {
            conforms: violations.is_empty(),
            violations,
        }
    }

    /// Both reports' violations, re-sorted.
    pub fn merge(self, other: ValidationReport) -> ValidationReport {
        let mut all = self.violations;
        all.extend(other.violations);
        ValidationReport::from_violations(all)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let violations: Vec<ViolationJson> = self
            .violations
            .iter()
            .map(|v| ViolationJson {
                shape: v.shape.clone(),
                focus_node: v.focus_node.as_ref().map(Term::to_string),
                constraint: v.constraint.as_str(),
                path: v.path.as_ref().map(Path::to_string),
                value: v.value.as_ref().map(Term::to_string),
                message: v.message.clone(),
            })
            .collect();
        serde_json::json!({ "conforms": self.conforms, "violations": violations })
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "conforms: {}\n\n| shape | focus node | constraint | path | value | message |\n|---|---|---|---|---|---|\n",
            self.conforms
        );
        let cell = |s: String| s.replace('|', "\\|");
        for v in &self.violations {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} |\n",
                cell(v.shape.clone()),
                cell(v.focus_node.as_ref().map(Term::to_string).unwrap_or_default()),
                v.constraint,
                cell(v.path.as_ref().map(Path::to_string).unwrap_or_default()),
                cell(v.value.as_ref().map(Term::to_string).unwrap_or_default()),
                cell(v.message.clone()),
            ));
        }
        out
    }
}
