use std::path::Path;

use serde::{Deserialize, Serialize};

use super::nquads::{parse_nquads_lenient, parse_ntriples_lenient};
use super::turtle::parse_turtle_lenient;
use super::{RdfError, RdfFormat, SyntaxError};

/// Outcome of a syntax check. `ok` holds exactly when `errors` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxReport {
    pub ok: bool,
    pub errors: Vec<SyntaxError>,
    pub triple_count: usize,
}

/// Checks a document held in memory. `triple_count` counts the triples
/// of every statement that parsed, even when other statements failed.
pub fn check_syntax_str(text: &str, format: RdfFormat, base: Option<&str>) -> SyntaxReport {
    let (count, errors) = match format {
        RdfFormat::Turtle => {
            let (g, e) = parse_turtle_lenient(text, base);
            (g.len(), e)
        }
        RdfFormat::NTriples => {
            let (g, e) = parse_ntriples_lenient(text);
            (g.len(), e)
        }
        RdfFormat::NQuads => {
            let (d, e) = parse_nquads_lenient(text);
            (d.len(), e)
        }
    };
    SyntaxReport {
        ok: errors.is_empty(),
        errors,
        triple_count: count,
    }
}

/// Position of the first invalid UTF-8 sequence.
fn utf8_error_position(bytes: &[u8], valid_up_to: usize) -> (usize, usize) {
    let valid = std::str::from_utf8(&bytes[..valid_up_to]).unwrap_or_default();
    let line = valid.matches('\n').count() + 1;
    let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Reads and checks an RDF file. Only I/O failures are errors; malformed
/// content is reported in the returned [`SyntaxReport`].
pub fn validate_syntax(path: &Path, format: RdfFormat) -> Result<SyntaxReport, RdfError> {
    let bytes = std::fs::read(path).map_err(|source| RdfError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text = match std::str::from_utf8(&bytes) {
        Ok(text) => text,
        Err(e) => {
            let (line, column) = utf8_error_position(&bytes, e.valid_up_to());
            return Ok(SyntaxReport {
                ok: false,
                errors: vec![SyntaxError::new(line, column, "invalid UTF-8 byte sequence")],
                triple_count: 0,
            });
        }
    };
    let base = document_base(path);
    Ok(check_syntax_str(text, format, Some(&base)))
}

/// `file://` IRI of a path, used as the base for relative references.
pub(crate) fn document_base(path: &Path) -> String {
    let abs = std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf());
    let mut s = abs.to_string_lossy().replace('\\', "/");
    if !s.starts_with('/') {
        s.insert(0, '/');
    }
    format!("file://{}", s.replace(' ', "%20"))
}
