use std::collections::btree_set;
use std::collections::{BTreeMap, BTreeSet};

use super::term::{Term, Triple};

/// A set of triples. Iteration order is the term ordering, so anything
/// derived from a graph (serializations, reports) is reproducible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    /// Returns true if the triple was not already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.remove(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> btree_set::Iter<'_, Triple> {
        self.triples.iter()
    }

    /// Adds every triple of `other`; returns how many were new.
    pub fn extend_from(&mut self, other: &Graph) -> usize {
        other
            .iter()
            .filter(|t| self.triples.insert((*t).clone()))
            .count()
    }

    pub fn objects_of<'a>(
        &'a self,
        subject: &'a Term,
        predicate: &'a str,
    ) -> impl Iterator<Item = &'a Term> + 'a {
        self.triples
            .iter()
            .filter(move |t| &t.subject == subject && t.predicate.as_iri() == Some(predicate))
            .map(|t| &t.object)
    }

    pub fn subjects_with<'a>(
        &'a self,
        predicate: &'a str,
        object: &'a Term,
    ) -> impl Iterator<Item = &'a Term> + 'a {
        self.triples
            .iter()
            .filter(move |t| &t.object == object && t.predicate.as_iri() == Some(predicate))
            .map(|t| &t.subject)
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
        }
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter)
    }
}

impl IntoIterator for Graph {
    type Item = Triple;
    type IntoIter = btree_set::IntoIter<Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.into_iter()
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

/// A default graph plus named graphs keyed by IRI.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub default_graph: Graph,
    pub named_graphs: BTreeMap<String, Graph>,
}

impl Dataset {
    pub fn new() -> Dataset {
        Dataset::default()
    }

    pub fn from_graph(graph: Graph) -> Dataset {
        Dataset {
            default_graph: graph,
            named_graphs: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, triple: Triple, graph: Option<&str>) -> bool {
        match graph {
            None => self.default_graph.insert(triple),
            Some(name) => self
                .named_graphs
                .entry(name.to_string())
                .or_default()
                .insert(triple),
        }
    }

    /// Total number of quads across all graphs.
    pub fn len(&self) -> usize {
        self.default_graph.len() + self.named_graphs.values().map(Graph::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterates `(graph name, triple)` pairs, default graph first.
    pub fn quads(&self) -> impl Iterator<Item = (Option<&str>, &Triple)> {
        self.default_graph.iter().map(|t| (None, t)).chain(
            self.named_graphs
                .iter()
                .flat_map(|(name, g)| g.iter().map(move |t| (Some(name.as_str()), t))),
        )
    }
}
