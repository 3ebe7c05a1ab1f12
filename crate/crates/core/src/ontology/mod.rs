//! Ontology vocabulary extraction, pitfall linting and mapping conformance.

mod lint;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;

use crate::rdf::vocab::{owl, rdf, rdfs};
use crate::rdf::{parse_turtle, Graph, RdfError, Term};

pub use lint::{check_mapping_conformance, lint, render_findings, LintCode, LintFinding, Severity};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Vocabulary {
    pub classes: BTreeSet<String>,
    pub object_properties: BTreeSet<String>,
    pub datatype_properties: BTreeSet<String>,
    /// Properties mentioned by the schema but typed neither object nor
    /// datatype property.
    pub untyped_properties: BTreeSet<String>,
    pub subclass_edges: BTreeSet<(String, String)>,
    pub domains: BTreeMap<String, BTreeSet<String>>,
    pub ranges: BTreeMap<String, BTreeSet<String>>,
    pub labels: BTreeMap<String, Vec<(String, Option<String>)>>,
    /// Stored with the smaller IRI first.
    pub disjoint_pairs: BTreeSet<(String, String)>,
}

impl Vocabulary {
    pub fn is_property(&self, iri: &str) -> bool {
        self.object_properties.contains(iri) || self.datatype_properties.contains(iri) || self.untyped_properties.contains(iri)
    }

    /// All properties, each once.
    pub fn properties(&self) -> BTreeSet<&str> {
        self.object_properties
            .iter()
            .chain(&self.datatype_properties)
            .chain(&self.untyped_properties)
            .map(String::as_str)
            .collect()
    }

    pub fn are_disjoint(&self, a: &str, b: &str) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.disjoint_pairs.iter().any(|(x, y)| (x.as_str(), y.as_str()) == key)
    }

    /// Direct superclasses of `class`.
    pub fn superclasses<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.subclass_edges.iter().filter(move |(s, _)| s == class).map(|(_, o)| o.as_str())
    }
}

fn iri(t: &Term) -> Option<&str> {
    t.as_iri()
}

/// Collects schema declarations from `graph`.
pub fn extract_vocabulary(graph: &Graph) -> Vocabulary {
    let mut v = Vocabulary::default();
    let mut mentioned: BTreeSet<String> = BTreeSet::new();
    for t in graph.iter() {
        let Some(s) = iri(&t.subject) else { continue };
        let p = t.predicate.as_iri().unwrap_or_default();
        let o = iri(&t.object);
        match (p, o) {
            (rdf::TYPE, Some(owl::CLASS | rdfs::CLASS)) => {
                v.classes.insert(s.to_string());
            }
            (rdf::TYPE, Some(owl::OBJECT_PROPERTY)) => {
                v.object_properties.insert(s.to_string());
            }
            (rdf::TYPE, Some(owl::DATATYPE_PROPERTY)) => {
                v.datatype_properties.insert(s.to_string());
            }
            (rdf::TYPE, Some(rdf::PROPERTY | owl::SYMMETRIC_PROPERTY | owl::TRANSITIVE_PROPERTY)) => {
                mentioned.insert(s.to_string());
            }
            (rdfs::SUB_CLASS_OF, Some(o)) => {
                v.classes.insert(s.to_string());
                v.classes.insert(o.to_string());
                v.subclass_edges.insert((s.to_string(), o.to_string()));
            }
            (rdfs::DOMAIN, Some(o)) => {
                mentioned.insert(s.to_string());
                v.domains.entry(s.to_string()).or_default().insert(o.to_string());
            }
            (rdfs::RANGE, Some(o)) => {
                mentioned.insert(s.to_string());
                v.ranges.entry(s.to_string()).or_default().insert(o.to_string());
            }
            (rdfs::SUB_PROPERTY_OF | owl::INVERSE_OF, Some(o)) => {
                mentioned.insert(s.to_string());
                mentioned.insert(o.to_string());
            }
            (owl::DISJOINT_WITH, Some(o)) => {
                v.classes.insert(s.to_string());
                v.classes.insert(o.to_string());
                let pair = if s <= o { (s, o) } else { (o, s) };
                v.disjoint_pairs.insert((pair.0.to_string(), pair.1.to_string()));
            }
            (rdfs::LABEL, None) => {
                if let Some(lit) = t.object.as_literal() {
                    v.labels
                        .entry(s.to_string())
                        .or_default()
                        .push((lit.lexical.clone(), lit.language.clone()));
                }
            }
            _ => {}
        }
    }
    for p in mentioned {
        if !v.object_properties.contains(&p) && !v.datatype_properties.contains(&p) {
            v.untyped_properties.insert(p);
        }
    }
    v
}

/// Reads a Turtle ontology file.
pub fn load_ontology(path: &Path) -> Result<Graph, RdfError> {
    let text = std::fs::read_to_string(path).map_err(|source| RdfError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = format!("file://{}", path.display());
    parse_turtle(&text, Some(&base)).map_err(RdfError::Syntax)
}
