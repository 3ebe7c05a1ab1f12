//! Random shapes over a small component set, rendered as Turtle, and a
//! brute-force validator that scans the graph for every check.

use std::collections::BTreeSet;

use kgf_core::rdf::vocab::{rdf, rdfs, xsd};
use kgf_core::rdf::{Graph, Term, Triple};
use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;

use super::gen::TestRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Iri,
    Literal,
    Blank,
}

impl Kind {
    fn holds(self, t: &Term) -> bool {
        match self {
            Kind::Iri => matches!(t, Term::Iri(_)),
            Kind::Literal => matches!(t, Term::Literal(_)),
            Kind::Blank => matches!(t, Term::Blank(_)),
        }
    }

    fn turtle(self) -> &'static str {
        match self {
            Kind::Iri => "sh:IRI",
            Kind::Literal => "sh:Literal",
            Kind::Blank => "sh:BlankNode",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OProp {
    pub pred: String,
    pub inverse: bool,
    pub min: Option<u64>,
    pub max: Option<u64>,
    pub datatype: Option<String>,
    pub class: Option<String>,
    pub kind: Option<Kind>,
    pub pattern: Option<String>,
    pub in_list: Option<Vec<Term>>,
    pub min_incl: Option<i64>,
    pub max_incl: Option<i64>,
}

#[derive(Debug, Clone, Default)]
pub struct OShape {
    pub id: String,
    pub target_classes: Vec<String>,
    pub target_nodes: Vec<Term>,
    pub target_subjects_of: Vec<String>,
    pub props: Vec<OProp>,
    pub node_kind: Option<Kind>,
    pub node_class: Option<String>,
    pub node_in: Option<Vec<Term>>,
}

/// (shape, focus node, component, path, value)
pub type Found = (String, Option<Term>, &'static str, Option<String>, Option<Term>);

const EX: &str = "http://ex.org/";

fn ex(local: impl std::fmt::Display) -> String {
    format!("{EX}{local}")
}

fn literal_pool() -> Vec<Term> {
    vec![
        Term::integer(1),
        Term::integer(42),
        Term::integer(-3),
        Term::typed("abc", xsd::INTEGER),
        Term::typed("2.5", xsd::DECIMAL),
        Term::string("x"),
        Term::string("5"),
        Term::typed("2020-01-01", xsd::DATE),
        Term::typed("2020-02-30", xsd::DATE),
        Term::lang("e1", "en"),
    ]
}

fn some_node(r: &mut TestRng, entities: usize) -> Term {
    match r.gen_range(0..10) {
        0..=5 => Term::iri(ex(format!("e{}", r.gen_range(0..entities)))),
        6 => Term::blank(format!("b{}", r.gen_range(0..3))),
        _ => literal_pool().choose(r).unwrap().clone(),
    }
}

/// Graph of at most `max` triples over entities e*, classes C0..C4 and
/// predicates p0..p3.
pub fn random_data(r: &mut TestRng, max: usize) -> Graph {
    let n = r.gen_range(0..=max);
    let entities = n / 8 + 3;
    let mut g = Graph::new();
    for _ in 0..n {
        let s = if r.gen_bool(0.1) { Term::blank(format!("b{}", r.gen_range(0..3))) } else { Term::iri(ex(format!("e{}", r.gen_range(0..entities)))) };
        let t = match r.gen_range(0..10) {
            0 => Triple::new(Term::iri(ex(format!("C{}", r.gen_range(0..5)))), Term::iri(rdfs::SUB_CLASS_OF), Term::iri(ex(format!("C{}", r.gen_range(0..5))))),
            1..=3 => Triple::new(s, Term::iri(rdf::TYPE), Term::iri(ex(format!("C{}", r.gen_range(0..5))))),
            _ => Triple::new(s, Term::iri(ex(format!("p{}", r.gen_range(0..4)))), some_node(r, entities)),
        };
        g.insert(t.unwrap());
    }
    g
}

fn maybe<T>(r: &mut TestRng, p: f64, f: impl FnOnce(&mut TestRng) -> T) -> Option<T> {
    if r.gen_bool(p) {
        Some(f(r))
    } else {
        None
    }
}

fn kind(r: &mut TestRng) -> Kind {
    *[Kind::Iri, Kind::Literal, Kind::Blank].choose(r).unwrap()
}

fn value_list(r: &mut TestRng) -> Vec<Term> {
    (0..r.gen_range(1..5)).map(|_| some_node(r, 6)).collect()
}

pub fn random_shapes(r: &mut TestRng) -> Vec<OShape> {
    (0..r.gen_range(0..4))
        .map(|i| {
            let mut s = OShape {
                id: ex(format!("S{i}")),
                ..OShape::default()
            };
            loop {
                if r.gen_bool(0.5) {
                    s.target_classes.push(ex(format!("C{}", r.gen_range(0..5))));
                }
                if r.gen_bool(0.3) {
                    let t = some_node(r, 8);
                    // blank nodes cannot be named across documents
                    if !t.is_blank() {
                        s.target_nodes.push(t);
                    }
                }
                if r.gen_bool(0.3) {
                    s.target_subjects_of.push(ex(format!("p{}", r.gen_range(0..4))));
                }
                if !(s.target_classes.is_empty() && s.target_nodes.is_empty() && s.target_subjects_of.is_empty()) {
                    break;
                }
            }
            s.node_kind = maybe(r, 0.2, kind);
            s.node_class = maybe(r, 0.2, |r| ex(format!("C{}", r.gen_range(0..5))));
            s.node_in = maybe(r, 0.1, |r| value_list(r).into_iter().filter(|t| !t.is_blank()).collect());
            for _ in 0..r.gen_range(0..4) {
                let mut p = OProp {
                    pred: ex(format!("p{}", r.gen_range(0..4))),
                    inverse: r.gen_bool(0.2),
                    ..OProp::default()
                };
                // one property shape per path keeps violations distinguishable
                if s.props.iter().any(|q| q.pred == p.pred && q.inverse == p.inverse) {
                    continue;
                }
                p.min = maybe(r, 0.4, |r| r.gen_range(0..3));
                p.max = maybe(r, 0.3, |r| r.gen_range(p.min.unwrap_or(0)..4));
                p.datatype = maybe(r, 0.2, |r| [xsd::INTEGER, xsd::STRING, xsd::DATE].choose(r).unwrap().to_string());
                p.class = maybe(r, 0.2, |r| ex(format!("C{}", r.gen_range(0..5))));
                p.kind = maybe(r, 0.2, kind);
                p.pattern = maybe(r, 0.15, |r| ["^http", "[0-9]", "^a", "e1$", "x"].choose(r).unwrap().to_string());
                p.in_list = maybe(r, 0.1, |r| value_list(r).into_iter().filter(|t| !t.is_blank()).collect());
                p.min_incl = maybe(r, 0.15, |r| r.gen_range(-5..10));
                p.max_incl = maybe(r, 0.15, |r| r.gen_range(0..50));
                s.props.push(p);
            }
            s
        })
        .collect()
}

fn list(ts: &[Term]) -> String {
    let items: Vec<String> = ts.iter().map(Term::to_string).collect();
    format!("( {} )", items.join(" "))
}

pub fn shapes_turtle(shapes: &[OShape]) -> String {
    let mut out = String::from("@prefix sh: <http://www.w3.org/ns/shacl#> .\n");
    for s in shapes {
        let mut parts = vec!["a sh:NodeShape".to_string()];
        parts.extend(s.target_classes.iter().map(|c| format!("sh:targetClass <{c}>")));
        parts.extend(s.target_nodes.iter().map(|t| format!("sh:targetNode {t}")));
        parts.extend(s.target_subjects_of.iter().map(|p| format!("sh:targetSubjectsOf <{p}>")));
        parts.extend(s.node_kind.map(|k| format!("sh:nodeKind {}", k.turtle())));
        parts.extend(s.node_class.as_ref().map(|c| format!("sh:class <{c}>")));
        parts.extend(s.node_in.as_ref().map(|l| format!("sh:in {}", list(l))));
        for p in &s.props {
            let mut ps = vec![if p.inverse {
                format!("sh:path [ sh:inversePath <{}> ]", p.pred)
            } else {
                format!("sh:path <{}>", p.pred)
            }];
            ps.extend(p.min.map(|v| format!("sh:minCount {v}")));
            ps.extend(p.max.map(|v| format!("sh:maxCount {v}")));
            ps.extend(p.datatype.as_ref().map(|v| format!("sh:datatype <{v}>")));
            ps.extend(p.class.as_ref().map(|v| format!("sh:class <{v}>")));
            ps.extend(p.kind.map(|k| format!("sh:nodeKind {}", k.turtle())));
            ps.extend(p.pattern.as_ref().map(|v| format!("sh:pattern \"{v}\"")));
            ps.extend(p.in_list.as_ref().map(|l| format!("sh:in {}", list(l))));
            ps.extend(p.min_incl.map(|v| format!("sh:minInclusive {v}")));
            ps.extend(p.max_incl.map(|v| format!("sh:maxInclusive {v}")));
            parts.push(format!("sh:property [ {} ]", ps.join(" ; ")));
        }
        out.push_str(&format!("<{}> {} .\n", s.id, parts.join(" ;\n    ")));
    }
    out
}

/// Classes `c` is a (reflexive, transitive) subclass of, found by repeated
/// scans.
fn superclasses(g: &Graph, c: &Term) -> BTreeSet<Term> {
    let mut set = BTreeSet::from([c.clone()]);
    loop {
        let before = set.len();
        for t in g.iter() {
            if t.predicate.as_iri() == Some(rdfs::SUB_CLASS_OF) && set.contains(&t.subject) {
                set.insert(t.object.clone());
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

/// Type assertions with the superclasses of each asserted type.
struct Types(Vec<(Term, BTreeSet<Term>)>);

impl Types {
    fn of(g: &Graph) -> Types {
        Types(
            g.iter()
                .filter(|t| t.predicate.as_iri() == Some(rdf::TYPE))
                .map(|t| (t.subject.clone(), superclasses(g, &t.object)))
                .collect(),
        )
    }

    fn instance_of(&self, node: &Term, class: &str) -> bool {
        self.0.iter().any(|(s, sup)| s == node && sup.contains(&Term::iri(class)))
    }
}

fn valid(datatype: &str, lexical: &str) -> bool {
    match datatype {
        xsd::INTEGER => Regex::new(r"^[+-]?[0-9]+$").unwrap().is_match(lexical),
        xsd::DATE => chrono::NaiveDate::parse_from_str(lexical, "%Y-%m-%d").is_ok(),
        _ => true,
    }
}

fn number(t: &Term) -> Option<f64> {
    let lit = t.as_literal()?;
    match lit.datatype.as_str() {
        xsd::INTEGER | xsd::DECIMAL if Regex::new(r"^[+-]?[0-9]*\.?[0-9]+$").unwrap().is_match(&lit.lexical) => {
            lit.lexical.parse().ok()
        }
        _ => None,
    }
}

pub fn brute_force(g: &Graph, shapes: &[OShape]) -> BTreeSet<Found> {
    let mut out = BTreeSet::new();
    let types = Types::of(g);
    for s in shapes {
        let mut focus: BTreeSet<Term> = s.target_nodes.iter().cloned().collect();
        for t in g.iter() {
            if s.target_classes.iter().any(|c| types.instance_of(&t.subject, c)) {
                focus.insert(t.subject.clone());
            }
            if s.target_subjects_of.iter().any(|p| t.predicate.as_iri() == Some(p.as_str())) {
                focus.insert(t.subject.clone());
            }
        }
        for f in &focus {
            let mut hit = |c: &'static str, path: Option<String>, v: Option<Term>| {
                out.insert((s.id.clone(), Some(f.clone()), c, path, v));
            };
            if s.node_kind.is_some_and(|k| !k.holds(f)) {
                hit("sh:nodeKind", None, Some(f.clone()));
            }
            if s.node_class.as_ref().is_some_and(|c| !types.instance_of(f, c)) {
                hit("sh:class", None, Some(f.clone()));
            }
            if s.node_in.as_ref().is_some_and(|l| !l.contains(f)) {
                hit("sh:in", None, Some(f.clone()));
            }
            for p in &s.props {
                let path = if p.inverse { format!("^<{}>", p.pred) } else { format!("<{}>", p.pred) };
                let values: BTreeSet<Term> = g
                    .iter()
                    .filter(|t| t.predicate.as_iri() == Some(p.pred.as_str()))
                    .filter_map(|t| match p.inverse {
                        false if &t.subject == f => Some(t.object.clone()),
                        true if &t.object == f => Some(t.subject.clone()),
                        _ => None,
                    })
                    .collect();
                let n = values.len() as u64;
                if p.min.is_some_and(|m| n < m) {
                    hit("sh:minCount", Some(path.clone()), None);
                }
                if p.max.is_some_and(|m| n > m) {
                    hit("sh:maxCount", Some(path.clone()), None);
                }
                for v in values {
                    let mut bad = |c: &'static str| hit(c, Some(path.clone()), Some(v.clone()));
                    if let Some(dt) = &p.datatype {
                        if !v.as_literal().is_some_and(|l| &l.datatype == dt && valid(dt, &l.lexical)) {
                            bad("sh:datatype");
                        }
                    }
                    if p.class.as_ref().is_some_and(|c| !types.instance_of(&v, c)) {
                        bad("sh:class");
                    }
                    if p.kind.is_some_and(|k| !k.holds(&v)) {
                        bad("sh:nodeKind");
                    }
                    if let Some(re) = &p.pattern {
                        let text = match &v {
                            Term::Iri(i) => Some(i.as_str()),
                            Term::Literal(l) => Some(l.lexical.as_str()),
                            Term::Blank(_) => None,
                        };
                        if !text.is_some_and(|t| Regex::new(re).unwrap().is_match(t)) {
                            bad("sh:pattern");
                        }
                    }
                    if p.in_list.as_ref().is_some_and(|l| !l.contains(&v)) {
                        bad("sh:in");
                    }
                    if p.min_incl.is_some_and(|m| !number(&v).is_some_and(|x| x >= m as f64)) {
                        bad("sh:minInclusive");
                    }
                    if p.max_incl.is_some_and(|m| !number(&v).is_some_and(|x| x <= m as f64)) {
                        bad("sh:maxInclusive");
                    }
                }
            }
        }
    }
    out
}
