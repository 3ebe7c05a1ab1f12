//! Seeded random generators for RDF terms, graphs and stores.

use kgf_core::rdf::vocab::{rdf, xsd};
use kgf_core::prep::Table;
use kgf_core::rdf::{Graph, Term, Triple};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const STRING_PIECES: &[&str] = &[
    "a", "B", " ", "\"", "\\", "\n", "\r", "\t", "é", "日本", "'", ",", ";", ".", "#", "<>", "{x}", "😀", "",
];

const IRI_PIECES: &[&str] = &["a", "Z", "0", "-", "_", ".", "/", "#", "~", "é", "%20", "?q=1", "&", ":"];

fn random_string(rng: &mut TestRng, max_pieces: usize) -> String {
    let n = rng.gen_range(0..=max_pieces);
    (0..n).map(|_| *STRING_PIECES.choose(rng).unwrap()).collect()
}

/// An IRI exercising characters that stress prefixed-name abbreviation.
pub fn random_iri(rng: &mut TestRng) -> String {
    let ns = ["http://ex.org/", "http://ex.org/ns#", "urn:x:", "http://www.w3.org/2001/XMLSchema#"]
        .choose(rng)
        .unwrap();
    let n = rng.gen_range(0..4);
    let local: String = (0..n).map(|_| *IRI_PIECES.choose(rng).unwrap()).collect();
    format!("{ns}{local}")
}

/// Literal of any shape: plain, language-tagged, or typed with a known or
/// unknown datatype (lexical forms are not necessarily valid).
pub fn random_literal(rng: &mut TestRng) -> Term {
    match rng.gen_range(0..7) {
        0 => Term::string(random_string(rng, 4)),
        1 => Term::lang(random_string(rng, 3), *["en", "de", "en-US", "fr-be"].choose(rng).unwrap()),
        2 => Term::integer(rng.gen_range(-1000..1000)),
        3 => Term::typed(format!("{}.{}", rng.gen_range(-99..99), rng.gen_range(0..99)), xsd::DECIMAL),
        4 => Term::typed(["1.5e3", "-0.0", "INF", "NaN", "2E-2"].choose(rng).unwrap().to_string(), xsd::DOUBLE),
        5 => Term::typed(["true", "false", "1", "0"].choose(rng).unwrap().to_string(), xsd::BOOLEAN),
        _ => Term::typed(random_string(rng, 3), random_iri(rng)),
    }
}

pub fn random_term_graph(rng: &mut TestRng, max_triples: usize) -> Graph {
    let n = rng.gen_range(0..=max_triples);
    let blanks = rng.gen_range(1..6);
    let mut g = Graph::new();
    let node = |rng: &mut TestRng| -> Term {
        if rng.gen_bool(0.3) {
            Term::blank(format!("n{}", rng.gen_range(0..blanks)))
        } else {
            Term::iri(random_iri(rng))
        }
    };
    for _ in 0..n {
        let s = node(rng);
        let p = if rng.gen_bool(0.15) { Term::iri(rdf::TYPE) } else { Term::iri(random_iri(rng)) };
        let o = if rng.gen_bool(0.5) { random_literal(rng) } else { node(rng) };
        g.insert(Triple::new(s, p, o).unwrap());
    }
    g
}

/// Vocabulary for query tests: small pools so joins hit.
pub struct QueryVocab {
    pub entities: Vec<Term>,
    pub predicates: Vec<Term>,
    pub classes: Vec<Term>,
    pub literals: Vec<Term>,
}

impl QueryVocab {
    pub fn new(entity_count: usize) -> QueryVocab {
        QueryVocab {
            entities: (0..entity_count).map(|i| Term::iri(format!("http://ex.org/e{i}"))).collect(),
            predicates: (0..5).map(|i| Term::iri(format!("http://ex.org/p{i}"))).collect(),
            classes: (0..3).map(|i| Term::iri(format!("http://ex.org/C{i}"))).collect(),
            literals: vec![
                Term::integer(1),
                Term::integer(2),
                Term::integer(10),
                Term::typed("2.0", xsd::DECIMAL),
                Term::typed("1.5e0", xsd::DOUBLE),
                Term::string("abc"),
                Term::string("Abd"),
                Term::string(""),
                Term::lang("abc", "en"),
                Term::lang("chat", "fr"),
                Term::boolean(true),
                Term::typed("2021-01-01", xsd::DATE),
                Term::typed("2020-06-30", xsd::DATE),
                Term::typed("2021-01-01T10:00:00Z", xsd::DATE_TIME),
                Term::typed("x", "http://ex.org/dt"),
                Term::typed("zz", xsd::INTEGER),
            ],
        }
    }

    pub fn node(&self, rng: &mut TestRng, blanks: usize) -> Term {
        if blanks > 0 && rng.gen_bool(0.1) {
            Term::blank(format!("b{}", rng.gen_range(0..blanks)))
        } else {
            self.entities.choose(rng).unwrap().clone()
        }
    }

    pub fn object(&self, rng: &mut TestRng, blanks: usize) -> Term {
        if rng.gen_bool(0.4) {
            self.literals.choose(rng).unwrap().clone()
        } else {
            self.node(rng, blanks)
        }
    }
}

/// A random graph over a [`QueryVocab`] sized for `triples`.
pub fn random_query_graph(rng: &mut TestRng, max_triples: usize) -> (Graph, QueryVocab) {
    let n = rng.gen_range(0..=max_triples);
    let vocab = QueryVocab::new(n / 12 + 3);
    let blanks = rng.gen_range(0..4);
    let mut g = Graph::new();
    for _ in 0..n {
        let s = vocab.node(rng, blanks);
        let t = if rng.gen_bool(0.2) {
            Triple::new(s, Term::iri(rdf::TYPE), vocab.classes.choose(rng).unwrap().clone())
        } else {
            let p = vocab.predicates.choose(rng).unwrap().clone();
            Triple::new(s, p, vocab.object(rng, blanks))
        };
        g.insert(t.unwrap());
    }
    (g, vocab)
}

const CELL_POOL: &[&str] = &[
    "1", "2", "42", "-7", "3.5", "3,5", "2021-01-02", "02.01.2021", "1/2/21", "true", "no", "abc", "a,b", "say \"hi\"",
    " x ", "line\nbreak", "é",
];

/// Random table with `rows` rows; cells come from a small pool so keys repeat.
pub fn random_table(rng: &mut TestRng, name: &str, columns: &[&str], rows: usize, null_rate: f64) -> Table {
    let data = (0..rows)
        .map(|_| {
            columns
                .iter()
                .map(|_| {
                    if rng.gen_bool(null_rate) {
                        None
                    } else {
                        Some(CELL_POOL.choose(rng).unwrap().to_string())
                    }
                })
                .collect()
        })
        .collect();
    Table::new(name, columns.iter().map(|c| c.to_string()).collect(), data).unwrap()
}

/// Random key column values drawn from `k0..k{keys}`, some null.
pub fn random_keys(rng: &mut TestRng, rows: usize, keys: usize) -> Vec<Option<String>> {
    (0..rows)
        .map(|_| if rng.gen_bool(0.1) { None } else { Some(format!("k{}", rng.gen_range(0..keys.max(1)))) })
        .collect()
}
