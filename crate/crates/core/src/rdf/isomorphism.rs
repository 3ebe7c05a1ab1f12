//! Blank-node-aware graph comparison.
//!
//! Colour refinement narrows candidate pairs, then a backtracking search
//! looks for a bijection between blank nodes.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::{Hash, Hasher};

use super::term::{Term, Triple};
use super::{Dataset, Graph};

type Quad = (Triple, Option<String>);

pub fn are_isomorphic(a: &Graph, b: &Graph) -> bool {
    let qa: Vec<Quad> = a.iter().map(|t| (t.clone(), None)).collect();
    let qb: Vec<Quad> = b.iter().map(|t| (t.clone(), None)).collect();
    quads_isomorphic(&qa, &qb)
}

pub fn datasets_isomorphic(a: &Dataset, b: &Dataset) -> bool {
    let collect = |d: &Dataset| -> Vec<Quad> {
        d.quads()
            .map(|(g, t)| (t.clone(), g.map(str::to_string)))
            .collect()
    };
    quads_isomorphic(&collect(a), &collect(b))
}

fn has_blank(q: &Quad) -> bool {
    q.0.subject.is_blank() || q.0.object.is_blank()
}

fn blanks_of(quads: &[Quad]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (t, _) in quads {
        for term in [&t.subject, &t.object] {
            if let Term::Blank(l) = term {
                if seen.insert(l.clone()) {
                    out.push(l.clone());
                }
            }
        }
    }
    out
}

fn hash_of<T: Hash>(value: &T) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

/// Iterated colour refinement; returns a colour per blank label.
fn colours(quads: &[Quad], blanks: &[String], rounds: usize) -> HashMap<String, u64> {
    let mut colour: HashMap<String, u64> = blanks.iter().map(|b| (b.clone(), 0)).collect();
    let describe = |term: &Term, colour: &HashMap<String, u64>| -> u64 {
        match term {
            Term::Blank(l) => hash_of(&("blank", colour[l])),
            other => hash_of(&("term", other)),
        }
    };
    for _ in 0..rounds {
        let mut signatures: HashMap<String, Vec<u64>> =
            blanks.iter().map(|b| (b.clone(), Vec::new())).collect();
        for (t, g) in quads {
            if let Term::Blank(l) = &t.subject {
                let sig = hash_of(&(0u8, &t.predicate, describe(&t.object, &colour), g));
                signatures.get_mut(l).unwrap().push(sig);
            }
            if let Term::Blank(l) = &t.object {
                let sig = hash_of(&(1u8, &t.predicate, describe(&t.subject, &colour), g));
                signatures.get_mut(l).unwrap().push(sig);
            }
        }
        let mut next = HashMap::with_capacity(colour.len());
        for (b, mut sigs) in signatures {
            sigs.sort_unstable();
            next.insert(b.clone(), hash_of(&(colour[&b], sigs)));
        }
        colour = next;
    }
    colour
}

fn quads_isomorphic(a: &[Quad], b: &[Quad]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let ground_a: HashSet<&Quad> = a.iter().filter(|q| !has_blank(q)).collect();
    let ground_b: HashSet<&Quad> = b.iter().filter(|q| !has_blank(q)).collect();
    if ground_a != ground_b {
        return false;
    }
    let blank_a: Vec<Quad> = a.iter().filter(|q| has_blank(q)).cloned().collect();
    let blank_b: Vec<Quad> = b.iter().filter(|q| has_blank(q)).cloned().collect();
    let nodes_a = blanks_of(&blank_a);
    let nodes_b = blanks_of(&blank_b);
    if nodes_a.len() != nodes_b.len() {
        return false;
    }
    let rounds = 4.min(nodes_a.len() + 1);
    let col_a = colours(&blank_a, &nodes_a, rounds);
    let col_b = colours(&blank_b, &nodes_b, rounds);

    let mut hist_a: BTreeMap<u64, usize> = BTreeMap::new();
    let mut hist_b: BTreeMap<u64, usize> = BTreeMap::new();
    for c in col_a.values() {
        *hist_a.entry(*c).or_default() += 1;
    }
    for c in col_b.values() {
        *hist_b.entry(*c).or_default() += 1;
    }
    if hist_a != hist_b {
        return false;
    }

    let mut order = nodes_a.clone();
    order.sort_by_key(|n| (hist_a[&col_a[n]], col_a[n]));
    let mut candidates: HashMap<u64, Vec<String>> = HashMap::new();
    for n in &nodes_b {
        candidates.entry(col_b[n]).or_default().push(n.clone());
    }
    // quads of `a` indexed by the blank labels they mention
    let mut incident: HashMap<&str, Vec<&Quad>> = HashMap::new();
    for q in &blank_a {
        for term in [&q.0.subject, &q.0.object] {
            if let Term::Blank(l) = term {
                incident.entry(l.as_str()).or_default().push(q);
            }
        }
    }
    let target: HashSet<&Quad> = blank_b.iter().collect();
    let mut search = Search {
        order: &order,
        colour: &col_a,
        candidates: &candidates,
        incident: &incident,
        target: &target,
        mapping: HashMap::new(),
        used: HashSet::new(),
    };
    search.extend(0)
}

struct Search<'a> {
    order: &'a [String],
    colour: &'a HashMap<String, u64>,
    candidates: &'a HashMap<u64, Vec<String>>,
    incident: &'a HashMap<&'a str, Vec<&'a Quad>>,
    target: &'a HashSet<&'a Quad>,
    mapping: HashMap<String, String>,
    used: HashSet<String>,
}

impl Search<'_> {
    fn map_term(&self, term: &Term) -> Option<Term> {
        match term {
            Term::Blank(l) => self.mapping.get(l).map(|m| Term::Blank(m.clone())),
            other => Some(other.clone()),
        }
    }

    fn consistent(&self, node: &str) -> bool {
        for q in self.incident.get(node).into_iter().flatten() {
            let (Some(s), Some(o)) = (self.map_term(&q.0.subject), self.map_term(&q.0.object)) else {
                continue;
            };
            let image = (
                Triple {
                    subject: s,
                    predicate: q.0.predicate.clone(),
                    object: o,
                },
                q.1.clone(),
            );
            if !self.target.contains(&image) {
                return false;
            }
        }
        true
    }

    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let node = &self.order[depth];
        let Some(cands) = self.candidates.get(&self.colour[node]) else {
            return false;
        };
        for cand in cands {
            if self.used.contains(cand) {
                continue;
            }
            self.mapping.insert(node.clone(), cand.clone());
            if self.consistent(node) {
                self.used.insert(cand.clone());
                if self.extend(depth + 1) {
                    return true;
                }
                self.used.remove(cand);
            }
            self.mapping.remove(node);
        }
        false
    }
}
