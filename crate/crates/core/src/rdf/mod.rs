//! RDF data model, parsers and serializers.

mod graph;
pub mod iri;
mod isomorphism;
pub(crate) mod lexer;
mod nquads;
mod serialize;
mod syntax;
mod term;
mod turtle;
pub mod values;
pub mod vocab;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::{Dataset, Graph};
pub use isomorphism::{are_isomorphic, datasets_isomorphic};
pub use nquads::{parse_nquads, parse_nquads_lenient, parse_ntriples};
pub use serialize::{serialize_dataset, serialize_graph, serialize_graph_with_prefixes, RdfFormat};
pub use syntax::{check_syntax_str, validate_syntax, SyntaxReport};
pub use term::{is_absolute_iri, Literal, Term, Triple};
pub use turtle::{parse_turtle, parse_turtle_lenient};

/// A located syntax error. Line and column are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: line.max(1),
            column: column.max(1),
            message: message.into(),
        }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Error)]
pub enum RdfError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("relative IRI <{0}> cannot be used here")]
    RelativeIri(String),
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("{0} cannot represent named graphs")]
    NamedGraphsUnsupported(&'static str),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
