//! Forward-chaining entailment and consistency checking.
//!
//! Rules are conjunctive triple patterns with either a triple head or a
//! falsum head that reports a violation. Materialization is semi-naive:
//! after the first round a rule only fires on joins that use at least one
//! triple derived in the previous round.

mod rules;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::rdf::values::{is_known_datatype, is_valid_lexical};
use crate::rdf::Term;
use crate::store::{Store, TermId};

pub use rules::{default_rules, rdfs_rules};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleTerm {
    Var(String),
    Const(Term),
}

impl RuleTerm {
    /// `?name` is a variable, anything else an IRI.
    pub fn parse(text: &str) -> RuleTerm {
        match text.strip_prefix('?') {
            Some(v) => RuleTerm::Var(v.to_string()),
            None => RuleTerm::Const(Term::iri(text)),
        }
    }
}

pub type RulePattern = [RuleTerm; 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    /// The value is a literal that is not a valid lexical form of the
    /// datatype (only checked for datatypes the workbench knows).
    IllTyped { value: String, datatype: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Head {
    Triple(RulePattern),
    /// Inconsistency; `{var}` in the message is replaced by its binding.
    Bottom(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub body: Vec<RulePattern>,
    pub guards: Vec<Guard>,
    pub head: Head,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule '{0}' has an empty body")]
    EmptyBody(String),
    #[error("rule '{rule}': variable ?{var} does not occur in the body")]
    UnboundVariable { rule: String, var: String },
}

fn pattern_vars(p: &RulePattern) -> impl Iterator<Item = &str> {
    p.iter().filter_map(|t| match t {
        RuleTerm::Var(v) => Some(v.as_str()),
        RuleTerm::Const(_) => None,
    })
}

impl Rule {
    pub fn new(name: &str, body: Vec<RulePattern>, guards: Vec<Guard>, head: Head) -> Result<Rule, RuleError> {
        if body.is_empty() {
            return Err(RuleError::EmptyBody(name.to_string()));
        }
        let bound: BTreeSet<&str> = body.iter().flat_map(pattern_vars).collect();
        let mut needed: Vec<&str> = Vec::new();
        if let Head::Triple(h) = &head {
            needed.extend(pattern_vars(h));
        }
        for g in &guards {
            let Guard::IllTyped { value, datatype } = g;
            needed.extend([value.as_str(), datatype.as_str()]);
        }
        if let Some(var) = needed.into_iter().find(|v| !bound.contains(v)) {
            return Err(RuleError::UnboundVariable {
                rule: name.to_string(),
                var: var.to_string(),
            });
        }
        Ok(Rule {
            name: name.to_string(),
            body,
            guards,
            head,
        })
    }

    /// Shorthand: `?x` variables, everything else IRIs.
    pub fn triple(name: &str, body: &[[&str; 3]], head: [&str; 3]) -> Rule {
        Rule::new(name, body.iter().map(|p| p.map(RuleTerm::parse)).collect(), vec![], Head::Triple(head.map(RuleTerm::parse)))
            .expect("well-formed built-in rule")
    }

    pub fn bottom(name: &str, body: &[[&str; 3]], guards: Vec<Guard>, message: &str) -> Rule {
        Rule::new(name, body.iter().map(|p| p.map(RuleTerm::parse)).collect(), guards, Head::Bottom(message.to_string()))
            .expect("well-formed built-in rule")
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self.head, Head::Bottom(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleSetKind {
    None,
    Rdfs,
    #[default]
    Default,
}

impl RuleSetKind {
    pub fn rules(self) -> Vec<Rule> {
        match self {
            RuleSetKind::None => vec![],
            RuleSetKind::Rdfs => rdfs_rules(),
            RuleSetKind::Default => default_rules(),
        }
    }
}

impl FromStr for RuleSetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(RuleSetKind::None),
            "rdfs" => Ok(RuleSetKind::Rdfs),
            "default" => Ok(RuleSetKind::Default),
            other => Err(format!("unknown ruleset '{other}' (expected none, rdfs or default)")),
        }
    }
}

impl fmt::Display for RuleSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleSetKind::None => "none",
            RuleSetKind::Rdfs => "rdfs",
            RuleSetKind::Default => "default",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule_name: String,
    #[serde(serialize_with = "bindings_as_ntriples")]
    pub bindings: BTreeMap<String, Term>,
    pub message: String,
}

fn bindings_as_ntriples<S: serde::Serializer>(b: &BTreeMap<String, Term>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(b.iter().map(|(k, v)| (k, v.to_string())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub violations: Vec<Violation>,
    pub entailed_triples_added: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MaterializeStats {
    pub added: usize,
    pub rounds: usize,
    /// True if the round limit stopped evaluation before the fixpoint.
    pub capped: bool,
}

/// Safety limit on semi-naive rounds.
pub const MAX_ROUNDS: usize = 100_000;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Var(usize),
    Const(TermId),
}

struct Compiled {
    body: Vec<[Slot; 3]>,
    head: Option<[Slot; 3]>,
    guards: Vec<(usize, usize)>,
    vars: Vec<String>,
}

fn compile(rule: &Rule, store: &mut Store) -> Compiled {
    let mut vars: Vec<String> = Vec::new();
    let mut slot = |t: &RuleTerm, store: &mut Store| match t {
        RuleTerm::Const(c) => Slot::Const(store.intern(c)),
        RuleTerm::Var(v) => Slot::Var(match vars.iter().position(|x| x == v) {
            Some(i) => i,
            None => {
                vars.push(v.clone());
                vars.len() - 1
            }
        }),
    };
    let mut compile_pattern = |p: &RulePattern, store: &mut Store| [slot(&p[0], store), slot(&p[1], store), slot(&p[2], store)];
    let body: Vec<[Slot; 3]> = rule.body.iter().map(|p| compile_pattern(p, store)).collect();
    let head = match &rule.head {
        Head::Triple(h) => Some(compile_pattern(h, store)),
        Head::Bottom(_) => None,
    };
    let index = |name: &str| vars.iter().position(|v| v == name).expect("guard variables occur in the body");
    let guards = rule
        .guards
        .iter()
        .map(|Guard::IllTyped { value, datatype }| (index(value), index(datatype)))
        .collect();
    Compiled { body, head, guards, vars }
}

type Binding = Vec<Option<TermId>>;

/// Extends `binding` so that `pattern` matches `triple`.
fn bind(pattern: &[Slot; 3], triple: [TermId; 3], binding: &Binding) -> Option<Binding> {
    let mut fresh: [Option<(usize, TermId)>; 3] = [None; 3];
    for (k, (slot, id)) in pattern.iter().zip(triple).enumerate() {
        match *slot {
            Slot::Const(c) if c != id => return None,
            Slot::Const(_) => {}
            Slot::Var(v) => match binding[v] {
                Some(x) if x != id => return None,
                Some(_) => {}
                None => {
                    // a variable repeated within the pattern must match itself
                    if fresh[..k].iter().flatten().any(|&(w, x)| w == v && x != id) {
                        return None;
                    }
                    fresh[k] = Some((v, id));
                }
            },
        }
    }
    let mut b = binding.clone();
    for (v, id) in fresh.into_iter().flatten() {
        b[v] = Some(id);
    }
    Some(b)
}

fn id_pattern(pattern: &[Slot; 3], binding: &Binding) -> [Option<TermId>; 3] {
    pattern.map(|s| match s {
        Slot::Const(c) => Some(c),
        Slot::Var(v) => binding[v],
    })
}

/// All bindings satisfying `body` where atom `delta_atom`, when given,
/// only matches triples from `delta`.
fn solve(store: &Store, c: &Compiled, delta: Option<(usize, &[[TermId; 3]])>) -> Vec<Binding> {
    let mut rows: Vec<Binding> = vec![vec![None; c.vars.len()]];
    let mut order: Vec<usize> = (0..c.body.len()).collect();
    if let Some((d, _)) = delta {
        order.retain(|&i| i != d);
        order.insert(0, d);
    }
    for (step, &i) in order.iter().enumerate() {
        let pattern = &c.body[i];
        let mut next = Vec::new();
        for row in &rows {
            match delta {
                Some((_, triples)) if step == 0 => {
                    next.extend(triples.iter().filter_map(|t| bind(pattern, *t, row)));
                }
                _ => {
                    for t in store.match_ids(id_pattern(pattern, row), None) {
                        if let Some(b) = bind(pattern, t, row) {
                            next.push(b);
                        }
                    }
                }
            }
        }
        rows = next;
        if rows.is_empty() {
            break;
        }
    }
    rows.retain(|row| {
        c.guards.iter().all(|&(value, datatype)| {
            let (Some(v), Some(d)) = (row[value], row[datatype]) else { return false };
            let (Some(lit), Some(dt)) = (store.term(v).as_literal(), store.term(d).as_iri()) else {
                return false;
            };
            is_known_datatype(dt) && !is_valid_lexical(dt, &lit.lexical)
        })
    });
    rows
}

fn instantiate(store: &Store, head: &[Slot; 3], row: &Binding) -> Option<[TermId; 3]> {
    let ids = id_pattern(head, row);
    let [Some(s), Some(p), Some(o)] = ids else { return None };
    // generalized triples (literal subjects, non-IRI predicates) are dropped
    if store.term(s).is_literal() || !store.term(p).is_iri() {
        return None;
    }
    Some([s, p, o])
}

/// Extends the default graph of `store` to the fixpoint of `rules`.
pub fn materialize_with_stats(store: &mut Store, rules: &[Rule]) -> MaterializeStats {
    let compiled: Vec<Compiled> = rules.iter().filter(|r| !r.is_bottom()).map(|r| compile(r, store)).collect();
    let mut stats = MaterializeStats {
        added: 0,
        rounds: 0,
        capped: false,
    };
    if compiled.is_empty() {
        return stats;
    }
    let mut delta: Option<Vec<[TermId; 3]>> = None;
    loop {
        if stats.rounds == MAX_ROUNDS {
            stats.capped = true;
            break;
        }
        stats.rounds += 1;
        let mut new: BTreeSet<[TermId; 3]> = BTreeSet::new();
        for c in &compiled {
            let head = c.head.as_ref().expect("triple-headed");
            let rows = match &delta {
                None => solve(store, c, None),
                Some(d) => (0..c.body.len()).flat_map(|i| solve(store, c, Some((i, d)))).collect(),
            };
            for row in rows {
                if let Some(t) = instantiate(store, head, &row) {
                    if !store.contains_ids(t, None) {
                        new.insert(t);
                    }
                }
            }
        }
        if new.is_empty() {
            break;
        }
        for &t in &new {
            store.insert_ids(t, None);
        }
        stats.added += new.len();
        delta = Some(new.into_iter().collect());
    }
    stats
}

/// Materializes and returns the number of entailed triples added.
pub fn materialize(store: &mut Store, rules: &[Rule]) -> usize {
    materialize_with_stats(store, rules).added
}

fn render(message: &str, bindings: &BTreeMap<String, Term>) -> String {
    let mut out = message.to_string();
    for (k, v) in bindings {
        out = out.replace(&format!("{{{k}}}"), &v.to_string());
    }
    out
}

/// Materializes, then evaluates the falsum rules. Violations come out in
/// rule order, then by bindings.
pub fn check_consistency(store: &mut Store, rules: &[Rule]) -> ConsistencyReport {
    let added = materialize(store, rules);
    let mut violations = Vec::new();
    for rule in rules.iter().filter(|r| r.is_bottom()) {
        let Head::Bottom(message) = &rule.head else { unreachable!() };
        let c = compile(rule, store);
        let mut found: BTreeSet<BTreeMap<String, Term>> = BTreeSet::new();
        for row in solve(store, &c, None) {
            let bindings = c
                .vars
                .iter()
                .zip(&row)
                .filter_map(|(v, id)| id.map(|id| (v.clone(), store.term(id).clone())))
                .collect();
            found.insert(bindings);
        }
        violations.extend(found.into_iter().map(|bindings| Violation {
            rule_name: rule.name.clone(),
            message: render(message, &bindings),
            bindings,
        }));
    }
    ConsistencyReport {
        consistent: violations.is_empty(),
        violations,
        entailed_triples_added: added,
    }
}
