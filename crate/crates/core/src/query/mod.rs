//! SPARQL subset: parsing, evaluation against a [`Store`], result
//! serialization.
//!
//! Supported: SELECT / ASK / CONSTRUCT, basic graph patterns, OPTIONAL,
//! UNION, nested groups, FILTER with comparison, logical and a handful of
//! built-in functions, DISTINCT, ORDER BY, LIMIT / OFFSET and COUNT with
//! GROUP BY. Anything else is rejected with [`QueryError::Unsupported`].

mod ast;
mod eval;
mod parser;
mod results;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::*;
pub use eval::{compare_terms, evaluate, evaluate_in};
pub use parser::parse_query;
pub use results::{serialize_results, ResultFormat};

use crate::rdf::{Graph, SyntaxError, Term};
use crate::store::Store;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported feature at line {line}, column {column}: {feature}")]
    Unsupported {
        feature: String,
        line: usize,
        column: usize,
    },
    #[error("invalid query: {0}")]
    Invalid(String),
}

impl QueryError {
    pub(crate) fn invalid(message: impl Into<String>) -> QueryError {
        QueryError::Invalid(message.into())
    }
}

impl From<SyntaxError> for QueryError {
    fn from(e: SyntaxError) -> QueryError {
        QueryError::Syntax {
            line: e.line,
            column: e.column,
            message: e.message,
        }
    }
}

/// Rows of a SELECT result. `rows[i][j]` binds `variables[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolutionSequence {
    pub variables: Vec<String>,
    pub rows: Vec<Vec<Option<Term>>>,
}

impl SolutionSequence {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, variable: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == variable)
    }

    pub fn get(&self, row: usize, variable: &str) -> Option<&Term> {
        self.rows.get(row)?.get(self.column(variable)?)?.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryResult {
    Solutions(SolutionSequence),
    Boolean(bool),
    Graph(Graph),
}

impl QueryResult {
    /// One-line human summary, used in evaluation tables and reports.
    pub fn summary(&self) -> String {
        match self {
            QueryResult::Boolean(b) => b.to_string(),
            QueryResult::Solutions(s) => match s.rows.len() {
                1 => "1 row".to_string(),
                n => format!("{n} rows"),
            },
            QueryResult::Graph(g) => match g.len() {
                1 => "1 triple".to_string(),
                n => format!("{n} triples"),
            },
        }
    }
}

/// Parses and evaluates in one step.
pub fn run_query(text: &str, store: &Store) -> Result<QueryResult, QueryError> {
    let q = parse_query(text)?;
    Ok(evaluate(&q, store))
}

/// What a query must produce to pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    AskTrue,
    AskFalse,
    Nonempty,
    Empty,
}

impl Expectation {
    /// The natural expectation for a query form: ASK must be true, SELECT
    /// and CONSTRUCT must be nonempty.
    pub fn default_for(form: QueryForm) -> Expectation {
        match form {
            QueryForm::Ask => Expectation::AskTrue,
            _ => Expectation::Nonempty,
        }
    }

    /// Checks a result. A mismatched form (e.g. `ask_true` on a SELECT) fails.
    pub fn check(self, result: &QueryResult) -> bool {
        match (self, result) {
            (Expectation::AskTrue, QueryResult::Boolean(b)) => *b,
            (Expectation::AskFalse, QueryResult::Boolean(b)) => !*b,
            (Expectation::Nonempty, QueryResult::Solutions(s)) => !s.is_empty(),
            (Expectation::Empty, QueryResult::Solutions(s)) => s.is_empty(),
            (Expectation::Nonempty, QueryResult::Graph(g)) => !g.is_empty(),
            (Expectation::Empty, QueryResult::Graph(g)) => g.is_empty(),
            _ => false,
        }
    }

    pub fn accepts_form(self, form: QueryForm) -> bool {
        match self {
            Expectation::AskTrue | Expectation::AskFalse => form == QueryForm::Ask,
            Expectation::Nonempty | Expectation::Empty => form != QueryForm::Ask,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Expectation::AskTrue => "ask_true",
            Expectation::AskFalse => "ask_false",
            Expectation::Nonempty => "nonempty",
            Expectation::Empty => "empty",
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Expectation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ask_true" => Ok(Expectation::AskTrue),
            "ask_false" => Ok(Expectation::AskFalse),
            "nonempty" => Ok(Expectation::Nonempty),
            "empty" => Ok(Expectation::Empty),
            other => Err(format!("unknown expectation '{other}'")),
        }
    }
}

/// A named query with its expectation, as used for integrity checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedQuery {
    pub name: String,
    pub query: String,
    pub expectation: Option<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrityOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Runs each query. Without an explicit expectation an ASK passes iff it
/// is true and a SELECT passes iff it returns rows. Queries that fail to
/// parse fail with the error as detail.
pub fn run_integrity_queries(store: &Store, queries: &[NamedQuery]) -> Vec<IntegrityOutcome> {
    queries
        .iter()
        .map(|nq| match parse_query(&nq.query) {
            Err(e) => IntegrityOutcome {
                name: nq.name.clone(),
                passed: false,
                detail: e.to_string(),
            },
            Ok(q) => {
                let expectation = nq.expectation.unwrap_or(Expectation::default_for(q.form));
                let result = evaluate(&q, store);
                IntegrityOutcome {
                    name: nq.name.clone(),
                    passed: expectation.check(&result),
                    detail: format!("{} (expected {expectation})", result.summary()),
                }
            }
        })
        .collect()
}
