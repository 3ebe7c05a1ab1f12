//! In-memory triple store.
//!
//! Terms are interned into `u32` identifiers. Every graph keeps three
//! permutation indexes (SPO, POS, OSP) as ordered sets, and a pattern is
//! answered from the index whose key order has the longest bound prefix.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::rdf::{Dataset, Graph, Term, Triple};

pub type TermId = u32;

/// Bidirectional term dictionary.
#[derive(Debug, Default, Clone)]
pub struct Dictionary {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
}

impl Dictionary {
    pub fn intern(&mut self, term: &Term) -> TermId {
        if let Some(id) = self.ids.get(term) {
            return *id;
        }
        let id = TermId::try_from(self.terms.len()).expect("term dictionary overflow");
        self.terms.push(term.clone());
        self.ids.insert(term.clone(), id);
        id
    }

    pub fn id(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.terms[id as usize]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A triple pattern; `None` is a wildcard.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Option<Term>,
    pub predicate: Option<Term>,
    pub object: Option<Term>,
}

impl TriplePattern {
    pub fn new(subject: Option<Term>, predicate: Option<Term>, object: Option<Term>) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn any() -> Self {
        TriplePattern::default()
    }

    pub fn matches(&self, t: &Triple) -> bool {
        self.subject.as_ref().is_none_or(|s| s == &t.subject)
            && self.predicate.as_ref().is_none_or(|p| p == &t.predicate)
            && self.object.as_ref().is_none_or(|o| o == &t.object)
    }
}

/// Pattern over interned identifiers, in subject/predicate/object order.
pub type IdPattern = [Option<TermId>; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    Spo,
    Pos,
    Osp,
}

impl IndexKind {
    /// Positions (0 = s, 1 = p, 2 = o) in key order.
    fn order(self) -> [usize; 3] {
        match self {
            IndexKind::Spo => [0, 1, 2],
            IndexKind::Pos => [1, 2, 0],
            IndexKind::Osp => [2, 0, 1],
        }
    }

    fn bound_prefix(self, pattern: &IdPattern) -> usize {
        self.order()
            .iter()
            .take_while(|&&pos| pattern[pos].is_some())
            .count()
    }
}

#[derive(Debug, Default, Clone)]
struct GraphIndex {
    spo: BTreeSet<[TermId; 3]>,
    pos: BTreeSet<[TermId; 3]>,
    osp: BTreeSet<[TermId; 3]>,
}

impl GraphIndex {
    fn insert(&mut self, [s, p, o]: [TermId; 3]) -> bool {
        if !self.spo.insert([s, p, o]) {
            return false;
        }
        self.pos.insert([p, o, s]);
        self.osp.insert([o, s, p]);
        true
    }

    fn len(&self) -> usize {
        self.spo.len()
    }

    fn index(&self, kind: IndexKind) -> &BTreeSet<[TermId; 3]> {
        match kind {
            IndexKind::Spo => &self.spo,
            IndexKind::Pos => &self.pos,
            IndexKind::Osp => &self.osp,
        }
    }

    fn best_index(pattern: &IdPattern) -> IndexKind {
        [IndexKind::Spo, IndexKind::Pos, IndexKind::Osp]
            .into_iter()
            .max_by_key(|k| (k.bound_prefix(pattern), matches!(k, IndexKind::Spo)))
            .unwrap()
    }

    fn scan<'a>(
        &'a self,
        pattern: IdPattern,
        kind: IndexKind,
    ) -> Box<dyn Iterator<Item = [TermId; 3]> + 'a> {
        let order = kind.order();
        let prefix = kind.bound_prefix(&pattern);
        let mut lo = [TermId::MIN; 3];
        let mut hi = [TermId::MAX; 3];
        for (i, &pos) in order.iter().enumerate().take(prefix) {
            lo[i] = pattern[pos].unwrap();
            hi[i] = pattern[pos].unwrap();
        }
        let unpermute = move |key: &[TermId; 3]| {
            let mut spo = [0; 3];
            for (i, &pos) in order.iter().enumerate() {
                spo[pos] = key[i];
            }
            spo
        };
        Box::new(
            self.index(kind)
                .range(lo..=hi)
                .map(unpermute)
                .filter(move |t| (0..3).all(|i| pattern[i].is_none_or(|v| v == t[i]))),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreStats {
    pub triple_count: usize,
    pub graph_count: usize,
    pub distinct_subjects: usize,
    pub distinct_predicates: usize,
    pub distinct_objects: usize,
}

/// Graph key: `None` is the default graph.
pub type GraphKey = Option<String>;

#[derive(Debug, Default, Clone)]
pub struct Store {
    dict: Dictionary,
    graphs: BTreeMap<GraphKey, GraphIndex>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    pub fn from_graph(graph: &Graph) -> Store {
        let mut store = Store::new();
        store.import_graph(graph, None);
        store
    }

    pub fn from_dataset(dataset: &Dataset) -> Store {
        let mut store = Store::new();
        store.import_dataset(dataset, None);
        store
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn term(&self, id: TermId) -> &Term {
        self.dict.term(id)
    }

    pub fn id(&self, term: &Term) -> Option<TermId> {
        self.dict.id(term)
    }

    pub fn intern(&mut self, term: &Term) -> TermId {
        self.dict.intern(term)
    }

    pub fn insert(&mut self, triple: &Triple, graph: Option<&str>) -> bool {
        let ids = [
            self.dict.intern(&triple.subject),
            self.dict.intern(&triple.predicate),
            self.dict.intern(&triple.object),
        ];
        self.insert_ids(ids, graph)
    }

    /// Inserts an already interned triple. Callers guarantee the subject is
    /// not a literal and the predicate is an IRI.
    pub fn insert_ids(&mut self, ids: [TermId; 3], graph: Option<&str>) -> bool {
        self.graphs
            .entry(graph.map(str::to_string))
            .or_default()
            .insert(ids)
    }

    /// Imports a graph into `target` (default graph when `None`); returns
    /// the number of triples that were not already present.
    pub fn import_graph(&mut self, graph: &Graph, target: Option<&str>) -> usize {
        graph.iter().filter(|t| self.insert(t, target)).count()
    }

    /// Imports a dataset. Its default graph goes to `target`; named graphs
    /// keep their names.
    pub fn import_dataset(&mut self, dataset: &Dataset, target: Option<&str>) -> usize {
        let mut added = self.import_graph(&dataset.default_graph, target);
        for (name, g) in &dataset.named_graphs {
            added += self.import_graph(g, Some(name));
        }
        added
    }

    pub fn len(&self) -> usize {
        self.graphs.values().map(GraphIndex::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn graph_len(&self, graph: Option<&str>) -> usize {
        self.graph_index(graph).map_or(0, GraphIndex::len)
    }

    pub fn graph_names(&self) -> impl Iterator<Item = Option<&str>> {
        self.graphs.keys().map(|k| k.as_deref())
    }

    fn graph_index(&self, graph: Option<&str>) -> Option<&GraphIndex> {
        self.graphs.get(&graph.map(str::to_string))
    }

    fn resolve_pattern(&self, pattern: &TriplePattern) -> Option<IdPattern> {
        let lookup = |t: &Option<Term>| -> Option<Option<TermId>> {
            match t {
                None => Some(None),
                Some(term) => self.dict.id(term).map(Some),
            }
        };
        Some([
            lookup(&pattern.subject)?,
            lookup(&pattern.predicate)?,
            lookup(&pattern.object)?,
        ])
    }

    /// Triples of `graph` (default graph when `None`) matching `pattern`.
    /// An unknown graph yields nothing.
    pub fn matching<'a>(
        &'a self,
        pattern: &TriplePattern,
        graph: Option<&str>,
    ) -> impl Iterator<Item = Triple> + 'a {
        let ids = self.resolve_pattern(pattern);
        let index = self.graph_index(graph);
        let iter: Box<dyn Iterator<Item = [TermId; 3]> + 'a> = match (ids, index) {
            (Some(ids), Some(index)) => index.scan(ids, GraphIndex::best_index(&ids)),
            _ => Box::new(std::iter::empty()),
        };
        iter.map(move |ids| self.triple_of(ids))
    }

    /// Same as [`Store::matching`] but forcing a particular index.
    pub fn matching_with_index(
        &self,
        pattern: &TriplePattern,
        graph: Option<&str>,
        kind: IndexKind,
    ) -> Vec<Triple> {
        match (self.resolve_pattern(pattern), self.graph_index(graph)) {
            (Some(ids), Some(index)) => index.scan(ids, kind).map(|t| self.triple_of(t)).collect(),
            _ => Vec::new(),
        }
    }

    pub fn match_ids<'a>(
        &'a self,
        pattern: IdPattern,
        graph: Option<&str>,
    ) -> Box<dyn Iterator<Item = [TermId; 3]> + 'a> {
        match self.graph_index(graph) {
            Some(index) => index.scan(pattern, GraphIndex::best_index(&pattern)),
            None => Box::new(std::iter::empty()),
        }
    }

    pub fn contains_ids(&self, ids: [TermId; 3], graph: Option<&str>) -> bool {
        self.graph_index(graph).is_some_and(|g| g.spo.contains(&ids))
    }

    /// Number of matches for an id pattern.
    pub fn count_ids(&self, pattern: IdPattern, graph: Option<&str>) -> usize {
        self.match_ids(pattern, graph).count()
    }

    pub fn triple_of(&self, [s, p, o]: [TermId; 3]) -> Triple {
        Triple {
            subject: self.dict.term(s).clone(),
            predicate: self.dict.term(p).clone(),
            object: self.dict.term(o).clone(),
        }
    }

    pub fn graph(&self, graph: Option<&str>) -> Graph {
        self.matching(&TriplePattern::any(), graph).collect()
    }

    pub fn to_dataset(&self) -> Dataset {
        let mut dataset = Dataset::new();
        for name in self.graph_names() {
            for t in self.matching(&TriplePattern::any(), name) {
                dataset.insert(t, name);
            }
        }
        dataset
    }

    pub fn stats(&self) -> StoreStats {
        let mut subjects = HashSet::new();
        let mut predicates = HashSet::new();
        let mut objects = HashSet::new();
        let mut graph_count = 0;
        for index in self.graphs.values() {
            if index.len() > 0 {
                graph_count += 1;
            }
            for &[s, p, o] in &index.spo {
                subjects.insert(s);
                predicates.insert(p);
                objects.insert(o);
            }
        }
        StoreStats {
            triple_count: self.len(),
            graph_count,
            distinct_subjects: subjects.len(),
            distinct_predicates: predicates.len(),
            distinct_objects: objects.len(),
        }
    }
}
