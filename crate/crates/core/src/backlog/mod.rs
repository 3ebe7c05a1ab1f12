//! Competency-question backlog: loading, evaluation against a store,
//! fulfillment rate and cost-benefit categorization.
//!
//! The backlog is a TOML document with one `[[cq]]` table per question and
//! nested `[[cq.sub_question]]` tables:
//!
//! ```toml
//! [[cq]]
//! id = "CQ1"
//! text = "Which machines produced orders last week?"
//! cluster = "production"
//! priority = 1
//! cost = "low"
//! benefit = "high"
//!
//! [[cq.sub_question]]
//! id = "CQ1.1"
//! text = "Which machines exist?"
//! query = "SELECT ?m WHERE { ?m a ex:Machine }"
//! expectation = "nonempty"
//! ```
//!
//! `kind` is `cq` (default) or `business_question`; business questions need
//! a `note`. `status` defaults to `open`. A sub-question's `expectation` is
//! one of `nonempty`, `empty`, `ask_true`, `ask_false`, `manual`; without
//! one, ASK queries expect `ask_true` and everything else `nonempty`.
//! `rating` may be given by hand for sub-questions that are not executed,
//! and `as_constraint = true` also runs the query as a quality constraint.

mod eval;
mod matrix;

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::query::{parse_query, Expectation, QueryError};
use crate::shapes::{wrap_cq_as_constraint, QueryConstraint};

pub use eval::{evaluate_backlog, render_table, EvaluationRow, EvaluationTable, TableFormat};
pub use matrix::{build_cost_benefit, CostBenefitMatrix, Quadrant};

#[derive(Debug, Error)]
pub enum BacklogError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed backlog: {0}")]
    Malformed(String),
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
    #[error("{id}: {message}")]
    Invalid { id: String, message: String },
    #[error("query of {cq}/{sub_question}: {source}")]
    Query {
        cq: String,
        sub_question: String,
        source: QueryError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CqKind {
    #[default]
    Cq,
    BusinessQuestion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    #[default]
    Open,
    InProgress,
    Answered,
    Blocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rating {
    Pass,
    Fail,
    Partial,
    NotFeasible,
}

impl Rating {
    pub fn as_str(self) -> &'static str {
        match self {
            Rating::Pass => "pass",
            Rating::Fail => "fail",
            Rating::Partial => "partial",
            Rating::NotFeasible => "not_feasible",
        }
    }
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sub-question's expectation; `Manual` ones are never executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubExpectation {
    Nonempty,
    Empty,
    AskTrue,
    AskFalse,
    Manual,
}

impl SubExpectation {
    pub fn executable(self) -> Option<Expectation> {
        match self {
            SubExpectation::Nonempty => Some(Expectation::Nonempty),
            SubExpectation::Empty => Some(Expectation::Empty),
            SubExpectation::AskTrue => Some(Expectation::AskTrue),
            SubExpectation::AskFalse => Some(Expectation::AskFalse),
            SubExpectation::Manual => None,
        }
    }
}

impl From<Expectation> for SubExpectation {
    fn from(e: Expectation) -> Self {
        match e {
            Expectation::Nonempty => SubExpectation::Nonempty,
            Expectation::Empty => SubExpectation::Empty,
            Expectation::AskTrue => SubExpectation::AskTrue,
            Expectation::AskFalse => SubExpectation::AskFalse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubQuestion {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<String>,
    /// Filled in by [`load_backlog`] when absent from the file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectation: Option<SubExpectation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<Rating>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub notes: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub as_constraint: bool,
}

impl SubQuestion {
    pub fn expectation(&self) -> SubExpectation {
        self.expectation.unwrap_or(SubExpectation::Nonempty)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompetencyQuestion {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<String>,
    pub priority: u32,
    #[serde(default)]
    pub kind: CqKind,
    #[serde(default)]
    pub status: Status,
    #[serde(default, rename = "sub_question", skip_serializing_if = "Vec::is_empty")]
    pub sub_questions: Vec<SubQuestion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benefit: Option<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Backlog {
    #[serde(default, rename = "cq")]
    pub cqs: Vec<CompetencyQuestion>,
}

impl Backlog {
    pub fn sub_question_count(&self) -> usize {
        self.cqs.iter().map(|c| c.sub_questions.len()).sum()
    }

    /// Sub-questions marked `as_constraint`, wrapped for quality level 3.
    pub fn query_constraints(&self) -> Vec<QueryConstraint> {
        self.cqs
            .iter()
            .flat_map(|c| &c.sub_questions)
            .filter(|s| s.as_constraint)
            .filter_map(|s| {
                let expectation = s.expectation().executable()?;
                // validated at load time
                wrap_cq_as_constraint(&s.id, s.query.as_deref()?, expectation).ok()
            })
            .collect()
    }
}

fn check(backlog: &mut Backlog) -> Result<(), BacklogError> {
    let mut ids = BTreeSet::new();
    let invalid = |id: &str, message: &str| BacklogError::Invalid {
        id: id.to_string(),
        message: message.to_string(),
    };
    for cq in &mut backlog.cqs {
        if !ids.insert(cq.id.clone()) {
            return Err(BacklogError::DuplicateId(cq.id.clone()));
        }
        if cq.priority == 0 {
            return Err(invalid(&cq.id, "priority must be at least 1"));
        }
        if cq.kind == CqKind::BusinessQuestion && cq.note.as_deref().is_none_or(|n| n.trim().is_empty()) {
            return Err(invalid(&cq.id, "business questions need a note"));
        }
        for sq in &mut cq.sub_questions {
            if !ids.insert(sq.id.clone()) {
                return Err(BacklogError::DuplicateId(sq.id.clone()));
            }
            let Some(text) = &sq.query else {
                if sq.as_constraint {
                    return Err(invalid(&sq.id, "as_constraint needs a query"));
                }
                continue;
            };
            let q = parse_query(text).map_err(|source| BacklogError::Query {
                cq: cq.id.clone(),
                sub_question: sq.id.clone(),
                source,
            })?;
            match sq.expectation.and_then(SubExpectation::executable) {
                Some(e) if !e.accepts_form(q.form) => {
                    return Err(invalid(&sq.id, &format!("expectation {e} does not fit the query form")));
                }
                Some(_) => {}
                None if sq.expectation.is_none() => sq.expectation = Some(Expectation::default_for(q.form).into()),
                None if sq.as_constraint => return Err(invalid(&sq.id, "a manual sub-question cannot be a constraint")),
                None => {}
            }
        }
    }
    Ok(())
}

/// Parses and checks a backlog document.
pub fn parse_backlog(text: &str) -> Result<Backlog, BacklogError> {
    let mut backlog: Backlog = toml::from_str(text).map_err(|e| BacklogError::Malformed(e.to_string()))?;
    check(&mut backlog)?;
    Ok(backlog)
}

pub fn load_backlog(path: impl AsRef<Path>) -> Result<Backlog, BacklogError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| BacklogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_backlog(&text)
}
