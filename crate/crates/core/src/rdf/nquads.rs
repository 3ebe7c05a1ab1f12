//! Line-based N-Triples and N-Quads.

use super::lexer::{Lexer, Mode, Tok, Token};
use super::term::{is_absolute_iri, Term, Triple};
use super::vocab::xsd;
use super::{Dataset, Graph, SyntaxError};

/// Parses an N-Quads document. Three-term lines go to the default graph.
pub fn parse_nquads(text: &str) -> Result<Dataset, SyntaxError> {
    let mut dataset = Dataset::new();
    for (line_no, line) in text.lines().enumerate() {
        if let Some((triple, graph)) = parse_line(line, line_no + 1, true)? {
            dataset.insert(triple, graph.as_deref());
        }
    }
    Ok(dataset)
}

/// Parses every valid line and collects one error per malformed line.
pub fn parse_nquads_lenient(text: &str) -> (Dataset, Vec<SyntaxError>) {
    let mut dataset = Dataset::new();
    let mut errors = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        match parse_line(line, line_no + 1, true) {
            Ok(Some((triple, graph))) => {
                dataset.insert(triple, graph.as_deref());
            }
            Ok(None) => {}
            Err(e) => errors.push(e),
        }
    }
    (dataset, errors)
}

pub fn parse_ntriples(text: &str) -> Result<Graph, SyntaxError> {
    let mut graph = Graph::new();
    for (line_no, line) in text.lines().enumerate() {
        if let Some((triple, _)) = parse_line(line, line_no + 1, false)? {
            graph.insert(triple);
        }
    }
    Ok(graph)
}

pub(crate) fn parse_ntriples_lenient(text: &str) -> (Graph, Vec<SyntaxError>) {
    let mut graph = Graph::new();
    let mut errors = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        match parse_line(line, line_no + 1, false) {
            Ok(Some((triple, _))) => {
                graph.insert(triple);
            }
            Ok(None) => {}
            Err(e) => errors.push(e),
        }
    }
    (graph, errors)
}

struct LineParser<'a> {
    lexer: Lexer<'a>,
    line_no: usize,
    last_end: usize,
}

impl LineParser<'_> {
    fn error(&self, column: usize, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.line_no, column, message)
    }

    fn next(&mut self) -> Result<Option<Token>, SyntaxError> {
        let t = self
            .lexer
            .next_token()
            .map_err(|e| SyntaxError::new(self.line_no, e.column, e.message))?;
        if let Some(t) = &t {
            self.last_end = t.end_column;
        }
        Ok(t)
    }

    fn require(&mut self, what: &str) -> Result<Token, SyntaxError> {
        match self.next()? {
            Some(t) => Ok(t),
            None => Err(self.error(self.last_end, format!("expected {what}"))),
        }
    }

    fn absolute_iri(&self, iri: &str, t: &Token) -> Result<Term, SyntaxError> {
        if is_absolute_iri(iri) {
            Ok(Term::iri(iri))
        } else {
            Err(self.error(t.column, format!("IRI <{iri}> must be absolute")))
        }
    }

    fn subject(&mut self) -> Result<Term, SyntaxError> {
        let t = self.require("subject")?;
        match &t.tok {
            Tok::IriRef(iri) => self.absolute_iri(iri, &t),
            Tok::Blank(label) => Ok(Term::blank(label.clone())),
            other => Err(self.error(t.column, format!("expected subject, found {}", other.describe()))),
        }
    }

    fn predicate(&mut self) -> Result<Term, SyntaxError> {
        let t = self.require("predicate")?;
        match &t.tok {
            Tok::IriRef(iri) => self.absolute_iri(iri, &t),
            other => Err(self.error(t.column, format!("expected predicate IRI, found {}", other.describe()))),
        }
    }

    fn object(&mut self) -> Result<(Term, Option<Token>), SyntaxError> {
        let t = self.require("object")?;
        let term = match &t.tok {
            Tok::IriRef(iri) => self.absolute_iri(iri, &t)?,
            Tok::Blank(label) => Term::blank(label.clone()),
            Tok::Str(lexical) => {
                let lexical = lexical.clone();
                let next = self.next()?;
                return match next.as_ref().map(|n| &n.tok) {
                    Some(Tok::LangTag(lang)) => Ok((Term::lang(lexical, lang.clone()), self.next()?)),
                    Some(Tok::Carets) => {
                        let dt = self.require("datatype IRI")?;
                        match &dt.tok {
                            Tok::IriRef(iri) => {
                                let dt_term = self.absolute_iri(iri, &dt)?;
                                let dt_iri = dt_term.as_iri().unwrap().to_string();
                                Ok((Term::typed(lexical, dt_iri), self.next()?))
                            }
                            other => Err(self.error(dt.column, format!("expected datatype IRI, found {}", other.describe()))),
                        }
                    }
                    _ => Ok((Term::typed(lexical, xsd::STRING), next)),
                };
            }
            other => return Err(self.error(t.column, format!("expected object, found {}", other.describe()))),
        };
        Ok((term, self.next()?))
    }
}

fn parse_line(
    line: &str,
    line_no: usize,
    allow_graph: bool,
) -> Result<Option<(Triple, Option<String>)>, SyntaxError> {
    let mut p = LineParser {
        lexer: Lexer::new(line, Mode::Turtle),
        line_no,
        last_end: 1,
    };
    let first = p.lexer.next_token().map_err(|e| SyntaxError::new(line_no, e.column, e.message))?;
    if first.is_none() {
        return Ok(None);
    }
    // re-lex from the start so the subject goes through the normal path
    p.lexer = Lexer::new(line, Mode::Turtle);
    let subject = p.subject()?;
    let predicate = p.predicate()?;
    let (object, mut after) = p.object()?;
    let mut graph = None;
    if let Some(t) = &after {
        if let Tok::IriRef(iri) = &t.tok {
            if !allow_graph {
                return Err(p.error(t.column, "graph labels are not allowed in N-Triples"));
            }
            if !is_absolute_iri(iri) {
                return Err(p.error(t.column, format!("IRI <{iri}> must be absolute")));
            }
            graph = Some(iri.clone());
            after = p.next()?;
        } else if let Tok::Blank(_) = &t.tok {
            if allow_graph {
                return Err(p.error(t.column, "blank node graph labels are not supported"));
            }
        }
    }
    match after {
        Some(t) if t.tok == Tok::Dot => {}
        Some(t) => {
            return Err(p.error(t.column, format!("expected '.', found {}", t.tok.describe())));
        }
        None => return Err(p.error(p.last_end, "expected '.' at end of statement")),
    }
    if let Some(t) = p.next()? {
        return Err(p.error(t.column, format!("unexpected {} after '.'", t.tok.describe())));
    }
    Ok(Some((Triple::new_unchecked(subject, predicate, object), graph)))
}
