use std::str::FromStr;

use serde_json::{json, Map, Value};

use super::QueryResult;
use crate::rdf::vocab::xsd;
use crate::rdf::{serialize_graph, RdfFormat, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultFormat {
    /// SPARQL 1.1 Query Results JSON.
    Json,
    Csv,
}

impl ResultFormat {
    pub fn media_type(self) -> &'static str {
        match self {
            ResultFormat::Json => "application/sparql-results+json",
            ResultFormat::Csv => "text/csv",
        }
    }
}

impl FromStr for ResultFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" | "sparql-json" => Ok(ResultFormat::Json),
            "csv" => Ok(ResultFormat::Csv),
            other => Err(format!("unknown result format '{other}'")),
        }
    }
}

fn term_json(term: &Term) -> Value {
    match term {
        Term::Iri(iri) => json!({"type": "uri", "value": iri}),
        Term::Blank(label) => json!({"type": "bnode", "value": label}),
        Term::Literal(lit) => {
            let mut m = Map::new();
            m.insert("type".into(), "literal".into());
            m.insert("value".into(), lit.lexical.clone().into());
            if let Some(lang) = &lit.language {
                m.insert("xml:lang".into(), lang.clone().into());
            } else if lit.datatype != xsd::STRING {
                m.insert("datatype".into(), lit.datatype.clone().into());
            }
            Value::Object(m)
        }
    }
}

fn csv_value(term: &Term) -> String {
    match term {
        Term::Iri(iri) => iri.clone(),
        Term::Blank(label) => format!("_:{label}"),
        Term::Literal(lit) => lit.lexical.clone(),
    }
}

/// Serializes a result. CONSTRUCT results are always written as Turtle.
pub fn serialize_results(result: &QueryResult, format: ResultFormat) -> String {
    match (result, format) {
        (QueryResult::Graph(g), _) => serialize_graph(g, RdfFormat::Turtle),
        (QueryResult::Boolean(b), ResultFormat::Json) => json!({"head": {}, "boolean": b}).to_string(),
        (QueryResult::Boolean(b), ResultFormat::Csv) => format!("boolean\n{b}\n"),
        (QueryResult::Solutions(s), ResultFormat::Json) => {
            let bindings: Vec<Value> = s
                .rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (var, value) in s.variables.iter().zip(row) {
                        if let Some(t) = value {
                            m.insert(var.clone(), term_json(t));
                        }
                    }
                    Value::Object(m)
                })
                .collect();
            json!({"head": {"vars": s.variables}, "results": {"bindings": bindings}}).to_string()
        }
        (QueryResult::Solutions(s), ResultFormat::Csv) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&s.variables).expect("in-memory write");
            for row in &s.rows {
                let fields: Vec<String> = row.iter().map(|t| t.as_ref().map(csv_value).unwrap_or_default()).collect();
                w.write_record(&fields).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
        }
    }
}
