//! Naive closure of the default ruleset, written as plain nested loops over
//! the triple set, and a random schema-plus-data graph generator.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use kgf_core::rdf::vocab::{owl, rdf, rdfs, xsd};
use kgf_core::rdf::{Graph, Term, Triple};
use rand::seq::SliceRandom;
use rand::Rng;

use super::gen::TestRng;

fn iri(s: &str) -> Term {
    Term::iri(s)
}

fn with_p<'a>(ts: &'a [Triple], p: &str) -> Vec<&'a Triple> {
    ts.iter().filter(|t| t.predicate.as_iri() == Some(p)).collect()
}

type T3 = [usize; 3];

/// Terms numbered in order of first appearance.
struct Ids {
    terms: Vec<Term>,
    index: HashMap<Term, usize>,
}

impl Ids {
    fn get(&mut self, t: &Term) -> usize {
        if let Some(&i) = self.index.get(t) {
            return i;
        }
        self.terms.push(t.clone());
        self.index.insert(t.clone(), self.terms.len() - 1);
        self.terms.len() - 1
    }
}

/// Pairs (a, b) with a[2] == b[0].
fn chain(left: &[T3], right: &[T3]) -> Vec<(T3, T3)> {
    let mut by_subject: HashMap<usize, Vec<T3>> = HashMap::new();
    for b in right {
        by_subject.entry(b[0]).or_default().push(*b);
    }
    let mut out = Vec::new();
    for a in left {
        for b in by_subject.get(&a[2]).into_iter().flatten() {
            out.push((*a, *b));
        }
    }
    out
}

struct Vocab {
    ty: usize,
    sc: usize,
    sp: usize,
    domain: usize,
    range: usize,
    inverse: usize,
    symmetric: usize,
    transitive: usize,
    same: usize,
}

/// Every rule applied once to the whole triple set.
fn one_round(ts: &[T3], v: &Vocab) -> Vec<T3> {
    let mut out = Vec::new();
    let mut by_pred: HashMap<usize, Vec<T3>> = HashMap::new();
    for t in ts {
        by_pred.entry(t[1]).or_default().push(*t);
    }
    let empty = Vec::new();
    let with = |p: usize| by_pred.get(&p).unwrap_or(&empty);
    let (sc, types, sp) = (with(v.sc), with(v.ty), with(v.sp));
    for (a, b) in chain(sc, sc) {
        out.push([a[0], v.sc, b[2]]);
    }
    for (x, a) in chain(types, sc) {
        out.push([x[0], v.ty, a[2]]);
    }
    for (a, b) in chain(sp, sp) {
        out.push([a[0], v.sp, b[2]]);
    }
    for a in sp {
        for t in with(a[0]) {
            out.push([t[0], a[2], t[2]]);
        }
    }
    for d in with(v.domain) {
        for t in with(d[0]) {
            out.push([t[0], v.ty, d[2]]);
        }
    }
    for r in with(v.range) {
        for t in with(r[0]) {
            out.push([t[2], v.ty, r[2]]);
        }
    }
    for inv in with(v.inverse) {
        for t in with(inv[0]) {
            out.push([t[2], inv[2], t[0]]);
        }
        for t in with(inv[2]) {
            out.push([t[2], inv[0], t[0]]);
        }
    }
    for decl in types {
        if decl[2] == v.symmetric {
            for t in with(decl[0]) {
                out.push([t[2], t[1], t[0]]);
            }
        }
        if decl[2] == v.transitive {
            let edges = with(decl[0]);
            for (a, b) in chain(edges, edges) {
                out.push([a[0], a[1], b[2]]);
            }
        }
    }
    let same = with(v.same);
    for a in same {
        out.push([a[2], v.same, a[0]]);
    }
    for (a, b) in chain(same, same) {
        out.push([a[0], v.same, b[2]]);
    }
    out
}

/// Applies every rule to the whole graph until nothing new appears. Triples
/// with a literal subject or a non-IRI predicate are never added.
pub fn naive_closure(g: &Graph) -> Graph {
    let mut ids = Ids { terms: Vec::new(), index: HashMap::new() };
    let mut vocab = |s: &str| ids.get(&iri(s));
    let v = Vocab {
        ty: vocab(rdf::TYPE),
        sc: vocab(rdfs::SUB_CLASS_OF),
        sp: vocab(rdfs::SUB_PROPERTY_OF),
        domain: vocab(rdfs::DOMAIN),
        range: vocab(rdfs::RANGE),
        inverse: vocab(owl::INVERSE_OF),
        symmetric: vocab(owl::SYMMETRIC_PROPERTY),
        transitive: vocab(owl::TRANSITIVE_PROPERTY),
        same: vocab(owl::SAME_AS),
    };
    let mut all: HashSet<T3> = g
        .iter()
        .map(|t| [ids.get(&t.subject), ids.get(&t.predicate), ids.get(&t.object)])
        .collect();
    loop {
        let ts: Vec<T3> = all.iter().copied().collect();
        let before = all.len();
        for t in one_round(&ts, &v) {
            if !ids.terms[t[0]].is_literal() && ids.terms[t[1]].is_iri() {
                all.insert(t);
            }
        }
        if all.len() == before {
            break;
        }
    }
    all.into_iter()
        .map(|[s, p, o]| Triple::new(ids.terms[s].clone(), ids.terms[p].clone(), ids.terms[o].clone()).unwrap())
        .collect()
}

fn valid_integer(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn valid_date(s: &str) -> bool {
    s.len() == 10 && chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok()
}

pub type OracleViolation = (String, BTreeMap<String, Term>);

fn binding(pairs: &[(&str, &Term)]) -> BTreeMap<String, Term> {
    pairs.iter().map(|(k, v)| (k.to_string(), (*v).clone())).collect()
}

/// Violations of the three falsum rules on an already closed graph. Only
/// xsd:integer and xsd:date ranges are checked; the generator uses no other
/// datatype ranges.
pub fn naive_violations(closed: &Graph) -> BTreeSet<OracleViolation> {
    let ts: Vec<Triple> = closed.iter().cloned().collect();
    let mut out = BTreeSet::new();
    let types = with_p(&ts, rdf::TYPE);
    for d in with_p(&ts, owl::DISJOINT_WITH) {
        for x in &types {
            for y in &types {
                if x.subject == y.subject && x.object == d.subject && y.object == d.object {
                    out.insert((
                        "disjoint-instance".to_string(),
                        binding(&[("a", &d.subject), ("b", &d.object), ("x", &x.subject)]),
                    ));
                }
            }
        }
    }
    for diff in with_p(&ts, owl::DIFFERENT_FROM) {
        for same in with_p(&ts, owl::SAME_AS) {
            if diff.subject == same.subject && diff.object == same.object {
                out.insert((
                    "same-and-different".to_string(),
                    binding(&[("x", &diff.subject), ("y", &diff.object)]),
                ));
            }
        }
    }
    for r in with_p(&ts, rdfs::RANGE) {
        let check: fn(&str) -> bool = match r.object.as_iri() {
            Some(xsd::INTEGER) => valid_integer,
            Some(xsd::DATE) => valid_date,
            _ => continue,
        };
        for t in &ts {
            if t.predicate == r.subject {
                if let Some(lit) = t.object.as_literal() {
                    if !check(&lit.lexical) {
                        out.insert((
                            "ill-typed-value".to_string(),
                            binding(&[("d", &r.object), ("p", &r.subject), ("s", &t.subject), ("v", &t.object)]),
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Schema and instance triples over small pools so that rules fire.
pub fn random_schema_graph(r: &mut TestRng, max_triples: usize) -> Graph {
    let n = r.gen_range(0..=max_triples);
    let classes: Vec<String> = (0..r.gen_range(2..9)).map(|i| format!("http://ex.org/C{i}")).collect();
    let props: Vec<String> = (0..r.gen_range(2..7)).map(|i| format!("http://ex.org/p{i}")).collect();
    let entities: Vec<String> = (0..(n / 10 + 3)).map(|i| format!("http://ex.org/e{i}")).collect();
    let literals = [
        Term::string("1"),
        Term::integer(42),
        Term::string("abc"),
        Term::typed("1.5", xsd::DECIMAL),
        Term::string("2021-01-02"),
        Term::typed("2021-13-01", xsd::DATE),
        Term::lang("x", "en"),
    ];
    let pick = |r: &mut TestRng, v: &[String]| iri(v.choose(r).unwrap());
    let mut g = Graph::new();
    let schema_share = r.gen_range(0.05..0.3);
    for _ in 0..n {
        let t = if r.gen_bool(schema_share) {
            match r.gen_range(0..11) {
                0 | 1 => (pick(r, &classes), iri(rdfs::SUB_CLASS_OF), pick(r, &classes)),
                2 => (pick(r, &props), iri(rdfs::SUB_PROPERTY_OF), pick(r, &props)),
                3 => (pick(r, &props), iri(rdfs::DOMAIN), pick(r, &classes)),
                4 => {
                    let range = match r.gen_range(0..4) {
                        0 => iri(xsd::INTEGER),
                        1 => iri(xsd::DATE),
                        _ => pick(r, &classes),
                    };
                    (pick(r, &props), iri(rdfs::RANGE), range)
                }
                5 => (pick(r, &props), iri(owl::INVERSE_OF), pick(r, &props)),
                6 => (pick(r, &props), iri(rdf::TYPE), iri(owl::SYMMETRIC_PROPERTY)),
                7 => (pick(r, &props), iri(rdf::TYPE), iri(owl::TRANSITIVE_PROPERTY)),
                8 => (pick(r, &entities), iri(owl::SAME_AS), pick(r, &entities)),
                9 => (pick(r, &entities), iri(owl::DIFFERENT_FROM), pick(r, &entities)),
                _ => (pick(r, &classes), iri(owl::DISJOINT_WITH), pick(r, &classes)),
            }
        } else if r.gen_bool(0.3) {
            (pick(r, &entities), iri(rdf::TYPE), pick(r, &classes))
        } else {
            let o = if r.gen_bool(0.3) { literals.choose(r).unwrap().clone() } else { pick(r, &entities) };
            (pick(r, &entities), pick(r, &props), o)
        };
        g.insert(Triple::new(t.0, t.1, t.2).unwrap());
    }
    g
}
