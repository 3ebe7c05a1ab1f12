use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::term::{write_escaped_iri, write_escaped_string, Term, Triple};
use super::vocab::{self, xsd};
use super::{Dataset, Graph, RdfError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RdfFormat {
    Turtle,
    NTriples,
    NQuads,
}

impl RdfFormat {
    pub fn extension(self) -> &'static str {
        match self {
            RdfFormat::Turtle => "ttl",
            RdfFormat::NTriples => "nt",
            RdfFormat::NQuads => "nq",
        }
    }

    pub fn media_type(self) -> &'static str {
        match self {
            RdfFormat::Turtle => "text/turtle",
            RdfFormat::NTriples => "application/n-triples",
            RdfFormat::NQuads => "application/n-quads",
        }
    }

    /// Guesses the format from a file extension.
    pub fn from_path(path: &std::path::Path) -> Option<RdfFormat> {
        match path.extension()?.to_str()? {
            "ttl" => Some(RdfFormat::Turtle),
            "nt" => Some(RdfFormat::NTriples),
            "nq" => Some(RdfFormat::NQuads),
            _ => None,
        }
    }
}

impl FromStr for RdfFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "turtle" | "ttl" => Ok(RdfFormat::Turtle),
            "ntriples" | "n-triples" | "nt" => Ok(RdfFormat::NTriples),
            "nquads" | "n-quads" | "nq" => Ok(RdfFormat::NQuads),
            other => Err(format!("unknown RDF format '{other}'")),
        }
    }
}

/// Assigns `b0`, `b1`, ... to blank nodes in first-seen order.
#[derive(Default)]
struct BlankRenamer {
    labels: HashMap<String, String>,
}

impl BlankRenamer {
    fn term(&mut self, term: &Term) -> Term {
        match term {
            Term::Blank(label) => {
                let next = self.labels.len();
                let mapped = self
                    .labels
                    .entry(label.clone())
                    .or_insert_with(|| format!("b{next}"));
                Term::Blank(mapped.clone())
            }
            other => other.clone(),
        }
    }

    fn triple(&mut self, t: &Triple) -> Triple {
        Triple {
            subject: self.term(&t.subject),
            predicate: t.predicate.clone(),
            object: self.term(&t.object),
        }
    }
}

pub fn serialize_graph(graph: &Graph, format: RdfFormat) -> String {
    serialize_graph_with_prefixes(graph, format, &[])
}

/// Like [`serialize_graph`]; `prefixes` are offered to the Turtle writer
/// in addition to the well-known ones. Ignored by line formats.
pub fn serialize_graph_with_prefixes(
    graph: &Graph,
    format: RdfFormat,
    prefixes: &[(String, String)],
) -> String {
    let mut renamer = BlankRenamer::default();
    let triples: Vec<Triple> = graph.iter().map(|t| renamer.triple(t)).collect();
    match format {
        RdfFormat::Turtle => write_turtle(&triples, prefixes),
        RdfFormat::NTriples | RdfFormat::NQuads => {
            let mut out = String::new();
            for t in &triples {
                writeln!(out, "{t}").unwrap();
            }
            out
        }
    }
}

pub fn serialize_dataset(dataset: &Dataset, format: RdfFormat) -> Result<String, RdfError> {
    match format {
        RdfFormat::NQuads => {
            let mut renamer = BlankRenamer::default();
            let mut out = String::new();
            for (graph, t) in dataset.quads() {
                let t = renamer.triple(t);
                match graph {
                    None => writeln!(out, "{t}").unwrap(),
                    Some(g) => {
                        write!(out, "{} {} {} ", t.subject, t.predicate, t.object).unwrap();
                        out.push('<');
                        write_escaped_iri(&mut out, g).unwrap();
                        out.push_str("> .\n");
                    }
                }
            }
            Ok(out)
        }
        RdfFormat::Turtle | RdfFormat::NTriples if dataset.named_graphs.is_empty() => {
            Ok(serialize_graph(&dataset.default_graph, format))
        }
        RdfFormat::Turtle => Err(RdfError::NamedGraphsUnsupported("Turtle")),
        RdfFormat::NTriples => Err(RdfError::NamedGraphsUnsupported("N-Triples")),
    }
}

fn is_safe_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        }
        _ => false,
    }
}

struct PrefixTable {
    // longest namespace first so the most specific prefix wins
    entries: Vec<(String, String)>,
    used: BTreeMap<String, String>,
}

impl PrefixTable {
    fn new(extra: &[(String, String)]) -> PrefixTable {
        let mut map: BTreeMap<String, String> = vocab::well_known_prefixes()
            .into_iter()
            .map(|(p, ns)| (p.to_string(), ns.to_string()))
            .collect();
        for (p, ns) in extra {
            map.insert(p.clone(), ns.clone());
        }
        let mut entries: Vec<(String, String)> = map.into_iter().collect();
        entries.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
        PrefixTable {
            entries,
            used: BTreeMap::new(),
        }
    }

    fn write_iri(&mut self, out: &mut String, iri: &str) {
        for (prefix, ns) in &self.entries {
            if let Some(local) = iri.strip_prefix(ns.as_str()) {
                if is_safe_local(local) {
                    self.used.insert(prefix.clone(), ns.clone());
                    write!(out, "{prefix}:{local}").unwrap();
                    return;
                }
            }
        }
        out.push('<');
        write_escaped_iri(out, iri).unwrap();
        out.push('>');
    }

    fn write_term(&mut self, out: &mut String, term: &Term) {
        match term {
            Term::Iri(iri) => self.write_iri(out, iri),
            Term::Blank(label) => write!(out, "_:{label}").unwrap(),
            Term::Literal(lit) => {
                out.push('"');
                write_escaped_string(out, &lit.lexical).unwrap();
                out.push('"');
                if let Some(lang) = &lit.language {
                    write!(out, "@{lang}").unwrap();
                } else if lit.datatype != xsd::STRING {
                    out.push_str("^^");
                    self.write_iri(out, &lit.datatype);
                }
            }
        }
    }
}

fn write_turtle(triples: &[Triple], prefixes: &[(String, String)]) -> String {
    let mut table = PrefixTable::new(prefixes);
    let mut body = String::new();
    let mut i = 0;
    while i < triples.len() {
        let subject = &triples[i].subject;
        table.write_term(&mut body, subject);
        let mut first_predicate = true;
        while i < triples.len() && &triples[i].subject == subject {
            let predicate = &triples[i].predicate;
            if !first_predicate {
                body.push_str(" ;\n   ");
            }
            first_predicate = false;
            body.push(' ');
            if predicate.as_iri() == Some(vocab::rdf::TYPE) {
                body.push('a');
            } else {
                table.write_term(&mut body, predicate);
            }
            let mut first_object = true;
            while i < triples.len()
                && &triples[i].subject == subject
                && &triples[i].predicate == predicate
            {
                body.push_str(if first_object { " " } else { ", " });
                first_object = false;
                table.write_term(&mut body, &triples[i].object);
                i += 1;
            }
        }
        body.push_str(" .\n");
    }
    let mut out = String::new();
    for (prefix, ns) in &table.used {
        out.push_str(&format!("@prefix {prefix}: <"));
        write_escaped_iri(&mut out, ns).unwrap();
        out.push_str("> .\n");
    }
    if !table.used.is_empty() && !body.is_empty() {
        out.push('\n');
    }
    out.push_str(&body);
    out
}
