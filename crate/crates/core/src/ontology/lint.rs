use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::Vocabulary;
use crate::mapping::{MappingPlan, TermTemplate};
use crate::rdf::vocab::{rdf, OWL, RDF, RDFS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LintCode {
    #[serde(rename = "CYCLE-SUBCLASS")]
    CycleSubclass,
    #[serde(rename = "MISSING-DOMAIN")]
    MissingDomain,
    #[serde(rename = "MISSING-RANGE")]
    MissingRange,
    #[serde(rename = "MISSING-LABEL")]
    MissingLabel,
    #[serde(rename = "DUAL-PROPERTY-KIND")]
    DualPropertyKind,
    #[serde(rename = "DISJOINT-SUBCLASS")]
    DisjointSubclass,
    #[serde(rename = "ORPHAN-CLASS")]
    OrphanClass,
    #[serde(rename = "UNDECLARED-PREDICATE")]
    UndeclaredPredicate,
    #[serde(rename = "UNDECLARED-CLASS")]
    UndeclaredClass,
    #[serde(rename = "KIND-MISMATCH")]
    KindMismatch,
}

impl LintCode {
    pub fn as_str(self) -> &'static str {
        match self {
            LintCode::CycleSubclass => "CYCLE-SUBCLASS",
            LintCode::MissingDomain => "MISSING-DOMAIN",
            LintCode::MissingRange => "MISSING-RANGE",
            LintCode::MissingLabel => "MISSING-LABEL",
            LintCode::DualPropertyKind => "DUAL-PROPERTY-KIND",
            LintCode::DisjointSubclass => "DISJOINT-SUBCLASS",
            LintCode::OrphanClass => "ORPHAN-CLASS",
            LintCode::UndeclaredPredicate => "UNDECLARED-PREDICATE",
            LintCode::UndeclaredClass => "UNDECLARED-CLASS",
            LintCode::KindMismatch => "KIND-MISMATCH",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            LintCode::CycleSubclass | LintCode::DualPropertyKind | LintCode::DisjointSubclass | LintCode::KindMismatch => {
                Severity::Error
            }
            LintCode::MissingDomain | LintCode::MissingRange | LintCode::UndeclaredPredicate | LintCode::UndeclaredClass => {
                Severity::Warning
            }
            LintCode::MissingLabel | LintCode::OrphanClass => Severity::Info,
        }
    }
}

impl fmt::Display for LintCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LintFinding {
    pub code: LintCode,
    pub severity: Severity,
    pub subject: String,
    pub message: String,
}

impl LintFinding {
    fn new(code: LintCode, subject: &str, message: String) -> LintFinding {
        LintFinding {
            code,
            severity: code.severity(),
            subject: subject.to_string(),
            message,
        }
    }
}

fn sorted(mut findings: Vec<LintFinding>) -> Vec<LintFinding> {
    findings.sort_by(|a, b| {
        (a.severity, a.code.as_str(), &a.subject, &a.message).cmp(&(b.severity, b.code.as_str(), &b.subject, &b.message))
    });
    findings.dedup();
    findings
}

/// Classes lying on a subclass cycle (self-loops included), via Tarjan's
/// strongly connected components.
fn cyclic_classes(v: &Vocabulary) -> BTreeSet<&str> {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (s, o) in &v.subclass_edges {
        succ.entry(s).or_default().push(o);
        succ.entry(o).or_default();
    }
    struct State<'a> {
        index: BTreeMap<&'a str, usize>,
        low: BTreeMap<&'a str, usize>,
        stack: Vec<&'a str>,
        on_stack: BTreeSet<&'a str>,
        next: usize,
        out: BTreeSet<&'a str>,
    }
    fn visit<'a>(n: &'a str, succ: &BTreeMap<&'a str, Vec<&'a str>>, st: &mut State<'a>) {
        st.index.insert(n, st.next);
        st.low.insert(n, st.next);
        st.next += 1;
        st.stack.push(n);
        st.on_stack.insert(n);
        for &m in &succ[n] {
            if !st.index.contains_key(m) {
                visit(m, succ, st);
                let l = st.low[m].min(st.low[n]);
                st.low.insert(n, l);
            } else if st.on_stack.contains(m) {
                let l = st.index[m].min(st.low[n]);
                st.low.insert(n, l);
            }
        }
        if st.low[n] == st.index[n] {
            let mut component = Vec::new();
            loop {
                let m = st.stack.pop().unwrap();
                st.on_stack.remove(m);
                component.push(m);
                if m == n {
                    break;
                }
            }
            if component.len() > 1 || succ[n].contains(&n) {
                st.out.extend(component);
            }
        }
    }
    let mut st = State {
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on_stack: BTreeSet::new(),
        next: 0,
        out: BTreeSet::new(),
    };
    for &n in succ.keys() {
        if !st.index.contains_key(n) {
            visit(n, &succ, &mut st);
        }
    }
    st.out
}

/// `class` and everything above it.
fn ancestors<'a>(v: &'a Vocabulary, class: &'a str) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::from([class]);
    let mut todo = vec![class];
    while let Some(c) = todo.pop() {
        for sup in v.superclasses(c) {
            if seen.insert(sup) {
                todo.push(sup);
            }
        }
    }
    seen
}

/// Runs the pitfall catalogue. Findings are sorted by severity, code and
/// subject.
pub fn lint(v: &Vocabulary) -> Vec<LintFinding> {
    let mut out = Vec::new();
    for c in cyclic_classes(v) {
        out.push(LintFinding::new(LintCode::CycleSubclass, c, format!("{c} is its own (indirect) subclass")));
    }
    for p in v.properties() {
        if !v.domains.contains_key(p) {
            out.push(LintFinding::new(LintCode::MissingDomain, p, format!("property {p} has no rdfs:domain")));
        }
        if !v.ranges.contains_key(p) {
            out.push(LintFinding::new(LintCode::MissingRange, p, format!("property {p} has no rdfs:range")));
        }
    }
    let properties = v.properties();
    for term in v.classes.iter().map(String::as_str).chain(properties.iter().copied()) {
        if !v.labels.contains_key(term) {
            out.push(LintFinding::new(LintCode::MissingLabel, term, format!("{term} has no rdfs:label")));
        }
    }
    for p in v.object_properties.intersection(&v.datatype_properties) {
        out.push(LintFinding::new(
            LintCode::DualPropertyKind,
            p,
            format!("{p} is declared both owl:ObjectProperty and owl:DatatypeProperty"),
        ));
    }
    if !v.disjoint_pairs.is_empty() {
        for c in &v.classes {
            let up = ancestors(v, c);
            if let Some((a, b)) = v.disjoint_pairs.iter().find(|(a, b)| up.contains(a.as_str()) && up.contains(b.as_str())) {
                out.push(LintFinding::new(
                    LintCode::DisjointSubclass,
                    c,
                    format!("{c} is a subclass of disjoint classes {a} and {b}"),
                ));
            }
        }
    }
    let used: BTreeSet<&str> = v
        .subclass_edges
        .iter()
        .flat_map(|(s, o)| [s.as_str(), o.as_str()])
        .chain(v.domains.values().chain(v.ranges.values()).flatten().map(String::as_str))
        .collect();
    for c in &v.classes {
        if !used.contains(c.as_str()) {
            out.push(LintFinding::new(
                LintCode::OrphanClass,
                c,
                format!("{c} is not used by any property or subclass edge"),
            ));
        }
    }
    sorted(out)
}

/// Built-in RDF, RDFS and OWL terms count as declared.
fn is_builtin(iri: &str) -> bool {
    [RDF, RDFS, OWL].iter().any(|ns| iri.starts_with(ns))
}

/// Checks that a mapping plan only uses declared vocabulary and respects
/// property kinds. One finding per offending term.
pub fn check_mapping_conformance(plan: &MappingPlan, v: &Vocabulary) -> Vec<LintFinding> {
    let mut out = Vec::new();
    for (rule, st) in plan.statements() {
        let p = st.predicate.as_str();
        let at = format!("rule '{}' line {}", rule.name, st.line);
        if p == rdf::TYPE {
            if let Some(class) = st.object.constant_iri() {
                if !v.classes.contains(class) && !is_builtin(class) {
                    out.push(LintFinding::new(
                        LintCode::UndeclaredClass,
                        class,
                        format!("class {class} is not declared in the ontology"),
                    ));
                }
            }
            continue;
        }
        if is_builtin(p) {
            continue;
        }
        if !v.is_property(p) {
            out.push(LintFinding::new(
                LintCode::UndeclaredPredicate,
                p,
                format!("predicate {p} is not declared in the ontology"),
            ));
            continue;
        }
        let object_kind = v.object_properties.contains(p);
        let datatype_kind = v.datatype_properties.contains(p);
        if object_kind == datatype_kind {
            continue;
        }
        let literal = st.object.is_literal();
        if datatype_kind && !literal {
            out.push(LintFinding::new(
                LintCode::KindMismatch,
                p,
                format!("datatype property {p} gets a non-literal object ({at})"),
            ));
        } else if object_kind && literal {
            let what = match &st.object {
                TermTemplate::ColumnLiteral { column, .. } => format!("column literal {{{column}}}"),
                _ => "a constant literal".to_string(),
            };
            out.push(LintFinding::new(
                LintCode::KindMismatch,
                p,
                format!("object property {p} gets {what} ({at})"),
            ));
        }
    }
    // one finding per (code, subject)
    let mut seen = BTreeSet::new();
    out.retain(|f| seen.insert((f.code, f.subject.clone())));
    sorted(out)
}

/// Human-readable report, one finding per line.
pub fn render_findings(findings: &[LintFinding]) -> String {
    let mut out = String::new();
    for f in findings {
        out.push_str(&format!("{:<7} {:<20} {}\n", f.severity, f.code, f.message));
    }
    let errors = findings.iter().filter(|f| f.severity == Severity::Error).count();
    let warnings = findings.iter().filter(|f| f.severity == Severity::Warning).count();
    out.push_str(&format!("{errors} errors, {warnings} warnings, {} info\n", findings.len() - errors - warnings));
    out
}
