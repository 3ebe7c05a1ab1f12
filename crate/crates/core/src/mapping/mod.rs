//! Declarative row-to-RDF mapping.
//!
//! A mapping document declares prefixes and one block per rule:
//!
//! ```text
//! PREFIX ex: <http://example.org/>
//!
//! RULE machine
//! SOURCE machines
//! SUBJECT ex:machine/{id}
//! FILTER {status} != "retired" && bound({name})
//!   a ex:Machine
//!   ex:name {name}@en
//!   ex:power {power_kw}^^xsd:decimal
//!   ex:site <http://example.org/site/{site}>
//!   ex:vendor "ACME"
//! END
//! ```
//!
//! Statement lines hold a predicate (a constant IRI or `a`) and an object
//! term. Terms are `<iri>` or `prefix:local` (both may contain `{column}`
//! placeholders), `{column}` literals with optional `^^datatype` or `@lang`,
//! quoted constant literals, and `_:label` for a blank node per row.
//! Values substituted into IRIs are percent-encoded, except that `<{column}>`
//! takes a cell holding a whole IRI.
//! Lines starting with `#` are comments.

mod apply;
mod filter;
mod parse;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::rdf::vocab::rdf;

pub use apply::{apply_mapping, MappingLog, SkippedStatement};
pub use filter::{CompareOp, FilterExpr, Operand};
pub use parse::compile_mapping;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MappingError {
    #[error("line {line}: unknown prefix '{prefix}'")]
    UnknownPrefix { line: usize, prefix: String },
    #[error("line {line}: malformed template: {message}")]
    MalformedTemplate { line: usize, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("mapping document defines no rules")]
    EmptyRuleSet,
    #[error("rule '{rule}': no table named '{table}'")]
    MissingTable { rule: String, table: String },
    #[error("rule '{rule}': table '{table}' has no column '{column}'")]
    MissingColumn { rule: String, table: String, column: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Segment {
    Text(String),
    Column(String),
}

/// Text with `{column}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Template {
    pub segments: Vec<Segment>,
}

impl Template {
    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Column(c) => Some(c.as_str()),
            Segment::Text(_) => None,
        })
    }

    pub fn is_constant(&self) -> bool {
        self.columns().next().is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermTemplate {
    IriTemplate { template: Template },
    ConstantIri { iri: String },
    ColumnLiteral {
        column: String,
        datatype: Option<String>,
        language: Option<String>,
    },
    ConstantLiteral {
        lexical: String,
        datatype: Option<String>,
        language: Option<String>,
    },
    RowBlankNode { label: String },
}

impl TermTemplate {
    pub fn columns(&self) -> Vec<&str> {
        match self {
            TermTemplate::IriTemplate { template } => template.columns().collect(),
            TermTemplate::ColumnLiteral { column, .. } => vec![column.as_str()],
            _ => vec![],
        }
    }

    /// True for templates that produce literals.
    pub fn is_literal(&self) -> bool {
        matches!(self, TermTemplate::ColumnLiteral { .. } | TermTemplate::ConstantLiteral { .. })
    }

    pub fn constant_iri(&self) -> Option<&str> {
        match self {
            TermTemplate::ConstantIri { iri } => Some(iri),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Statement {
    pub predicate: String,
    pub object: TermTemplate,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappingRule {
    pub name: String,
    pub source: String,
    pub subject: TermTemplate,
    pub statements: Vec<Statement>,
    pub row_filter: Option<FilterExpr>,
    pub line: usize,
}

impl MappingRule {
    /// Every column the rule reads.
    pub fn columns(&self) -> Vec<&str> {
        let mut cols = self.subject.columns();
        for s in &self.statements {
            cols.extend(s.object.columns());
        }
        if let Some(f) = &self.row_filter {
            cols.extend(f.columns());
        }
        cols.sort_unstable();
        cols.dedup();
        cols
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappingPlan {
    pub rules: Vec<MappingRule>,
    pub prefixes: BTreeMap<String, String>,
}

impl MappingPlan {
    /// (predicate, object template) pairs over all rules.
    pub fn statements(&self) -> impl Iterator<Item = (&MappingRule, &Statement)> {
        self.rules.iter().flat_map(|r| r.statements.iter().map(move |s| (r, s)))
    }

    /// Constant class IRIs asserted with `rdf:type`.
    pub fn asserted_classes(&self) -> impl Iterator<Item = (&MappingRule, &str)> {
        self.statements()
            .filter(|(_, s)| s.predicate == rdf::TYPE)
            .filter_map(|(r, s)| s.object.constant_iri().map(|c| (r, c)))
    }
}
