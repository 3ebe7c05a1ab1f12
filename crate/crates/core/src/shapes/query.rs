use super::{Component, ShapesError, ValidationReport, Violation};
use crate::query::{evaluate, parse_query, Expectation, Query, QueryForm};
use crate::store::Store;

/// A query that must meet its expectation. Only constructed through
/// [`wrap_cq_as_constraint`], so it always parses.
#[derive(Debug, Clone)]
pub struct QueryConstraint {
    pub name: String,
    pub query: String,
    pub expectation: Expectation,
    parsed: Query,
}

fn form_name(form: QueryForm) -> &'static str {
    match form {
        QueryForm::Select => "SELECT",
        QueryForm::Ask => "ASK",
        QueryForm::Construct => "CONSTRUCT",
    }
}

/// Parses `query_text` and pairs it with `expectation`. Parse errors and
/// expectations that cannot apply to the query form are reported here so
/// that running never fails.
pub fn wrap_cq_as_constraint(
    cq_id: &str,
    query_text: &str,
    expectation: Expectation,
) -> Result<QueryConstraint, ShapesError> {
    let parsed = parse_query(query_text).map_err(|source| ShapesError::Query {
        name: cq_id.to_string(),
        source,
    })?;
    if !expectation.accepts_form(parsed.form) {
        return Err(ShapesError::ExpectationMismatch {
            name: cq_id.to_string(),
            expectation,
            form: form_name(parsed.form).to_string(),
        });
    }
    Ok(QueryConstraint {
        name: cq_id.to_string(),
        query: query_text.to_string(),
        expectation,
        parsed,
    })
}

/// Runs every constraint; each failure becomes one violation named after
/// the constraint.
pub fn run_query_constraints(store: &Store, constraints: &[QueryConstraint]) -> ValidationReport {
    let violations = constraints
        .iter()
        .filter_map(|c| {
            let result = evaluate(&c.parsed, store);
            (!c.expectation.check(&result)).then(|| Violation {
                shape: c.name.clone(),
                focus_node: None,
                constraint: Component::Sparql,
                path: None,
                value: None,
                message: format!("expected {}, got {}", c.expectation, result.summary()),
            })
        })
        .collect();
    ValidationReport::from_violations(violations)
}
