use std::borrow::Cow;
use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use regex::Regex;

use super::ast::*;
use super::{QueryResult, SolutionSequence};
use crate::rdf::values::{boolean_value, numeric_value, parse_date, parse_date_time};
use crate::rdf::vocab::{rdf, xsd};
use crate::rdf::{Graph, Literal, Term, Triple};
use crate::store::{IdPattern, Store, TermId};

type Row = Vec<Option<TermId>>;

/// Evaluates against the default graph.
pub fn evaluate(query: &Query, store: &Store) -> QueryResult {
    evaluate_in(query, store, None)
}

/// Evaluates against one graph of the store; `None` is the default graph.
pub fn evaluate_in(query: &Query, store: &Store, graph: Option<&str>) -> QueryResult {
    let mut vars = query.pattern.pattern_variables();
    // variables only mentioned in filters or ORDER BY still get a slot
    collect_expression_vars(&query.pattern, &mut vars);
    let slots = vars.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
    let ev = Evaluator {
        store,
        graph,
        vars,
        slots,
        regexes: RefCell::new(HashMap::new()),
    };
    let rows = ev.group(&query.pattern);
    let (table, rows) = ev.aggregate_or_resolve(query, rows);
    let rows = order_rows(&ev, query, &table, rows);
    let output_vars = query.result_variables();
    match query.form {
        QueryForm::Ask => QueryResult::Boolean(!slice(&query.modifiers, rows).is_empty()),
        QueryForm::Select => {
            let cols: Vec<usize> = output_vars
                .iter()
                .map(|v| table.iter().position(|t| t == v).expect("validated projection"))
                .collect();
            let mut projected: Vec<Vec<Option<Term>>> = rows
                .into_iter()
                .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
                .collect();
            if query.modifiers.distinct {
                let mut seen = HashSet::new();
                projected.retain(|r| seen.insert(r.clone()));
            }
            QueryResult::Solutions(SolutionSequence {
                variables: output_vars,
                rows: slice(&query.modifiers, projected),
            })
        }
        QueryForm::Construct => {
            let rows = slice(&query.modifiers, rows);
            QueryResult::Graph(instantiate_template(&query.construct_template, &table, &rows))
        }
    }
}

fn slice<T>(modifiers: &Modifiers, rows: Vec<T>) -> Vec<T> {
    let offset = modifiers.offset.unwrap_or(0);
    let limit = modifiers.limit.unwrap_or(usize::MAX);
    rows.into_iter().skip(offset).take(limit).collect()
}

fn collect_expression_vars(group: &GroupPattern, out: &mut Vec<String>) {
    fn walk(e: &Expression, out: &mut Vec<String>) {
        match e {
            Expression::Var(v) | Expression::Bound(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expression::Const(_) => {}
            Expression::Or(a, b) | Expression::And(a, b) | Expression::Compare(_, a, b) | Expression::SameTerm(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Expression::Not(a)
            | Expression::Str(a)
            | Expression::Lang(a)
            | Expression::Datatype(a)
            | Expression::IsIri(a)
            | Expression::IsBlank(a)
            | Expression::IsLiteral(a) => walk(a, out),
            Expression::In { needle, list, .. } => {
                walk(needle, out);
                list.iter().for_each(|x| walk(x, out));
            }
            Expression::Regex { text, pattern, flags } => {
                walk(text, out);
                walk(pattern, out);
                if let Some(f) = flags {
                    walk(f, out);
                }
            }
        }
    }
    for e in &group.elements {
        match e {
            GroupElement::Filter(f) => walk(f, out),
            GroupElement::Optional(g) | GroupElement::Group(g) => collect_expression_vars(g, out),
            GroupElement::Union(alts) => alts.iter().for_each(|g| collect_expression_vars(g, out)),
            GroupElement::Triples(_) => {}
        }
    }
}

#[derive(Clone, Copy)]
enum Slot {
    Const(TermId),
    Var(usize),
}

struct Evaluator<'a> {
    store: &'a Store,
    graph: Option<&'a str>,
    vars: Vec<String>,
    slots: HashMap<String, usize>,
    regexes: RefCell<HashMap<(String, String), Option<Regex>>>,
}

impl<'a> Evaluator<'a> {
    fn empty_row(&self) -> Row {
        vec![None; self.vars.len()]
    }

    /// Evaluates a group bottom-up; filters apply to the whole group.
    fn group(&self, g: &GroupPattern) -> Vec<Row> {
        let (rows, filters) = self.group_unfiltered(g);
        rows.into_iter()
            .filter(|r| filters.iter().all(|f| self.filter_row(f, r)))
            .collect()
    }

    fn group_unfiltered<'g>(&self, g: &'g GroupPattern) -> (Vec<Row>, Vec<&'g Expression>) {
        let mut rows = vec![self.empty_row()];
        let mut filters = Vec::new();
        for e in &g.elements {
            match e {
                GroupElement::Triples(ts) => rows = self.bgp(ts, rows),
                GroupElement::Group(inner) => rows = join(rows, self.group(inner)),
                GroupElement::Union(alts) => {
                    let mut all = Vec::new();
                    for alt in alts {
                        all.extend(self.group(alt));
                    }
                    rows = join(rows, all);
                }
                GroupElement::Optional(inner) => {
                    let (right, conditions) = self.group_unfiltered(inner);
                    rows = self.left_join(rows, right, &conditions);
                }
                GroupElement::Filter(f) => filters.push(f),
            }
            if rows.is_empty() {
                // nothing can bring rows back, and filters over no rows are moot
                return (rows, filters);
            }
        }
        (rows, filters)
    }

    fn slot_of(&self, v: &VarOrTerm) -> Option<Slot> {
        match v {
            VarOrTerm::Var(name) => Some(Slot::Var(self.slots[name])),
            VarOrTerm::Term(t) => self.store.id(t).map(Slot::Const),
        }
    }

    /// Extends each row with the matches of a basic graph pattern.
    fn bgp(&self, triples: &[PatternTriple], mut rows: Vec<Row>) -> Vec<Row> {
        let mut patterns: Vec<[Slot; 3]> = Vec::with_capacity(triples.len());
        for t in triples {
            let (Some(s), Some(p), Some(o)) = (
                self.slot_of(&t.subject),
                self.slot_of(&t.predicate),
                self.slot_of(&t.object),
            ) else {
                // a constant the store has never seen
                return Vec::new();
            };
            patterns.push([s, p, o]);
        }
        let sizes: Vec<usize> = patterns
            .iter()
            .map(|p| {
                let ids: IdPattern = p.map(|s| match s {
                    Slot::Const(id) => Some(id),
                    Slot::Var(_) => None,
                });
                self.store.count_ids(ids, self.graph)
            })
            .collect();
        let mut bound: HashSet<usize> = match rows.first() {
            Some(r) => (0..r.len()).filter(|&i| r[i].is_some()).collect(),
            None => return rows,
        };
        let mut remaining: Vec<usize> = (0..patterns.len()).collect();
        while !remaining.is_empty() {
            let pick = *remaining
                .iter()
                .max_by(|&&a, &&b| {
                    let score = |i: usize| {
                        patterns[i]
                            .iter()
                            .filter(|s| match s {
                                Slot::Const(_) => true,
                                Slot::Var(v) => bound.contains(v),
                            })
                            .count()
                    };
                    score(a)
                        .cmp(&score(b))
                        .then_with(|| sizes[b].cmp(&sizes[a]))
                        .then_with(|| b.cmp(&a))
                })
                .unwrap();
            remaining.retain(|&i| i != pick);
            let pattern = patterns[pick];
            let mut next = Vec::new();
            for row in &rows {
                let ids: IdPattern = pattern.map(|s| match s {
                    Slot::Const(id) => Some(id),
                    Slot::Var(v) => row[v],
                });
                'matches: for found in self.store.match_ids(ids, self.graph) {
                    let mut extended = row.clone();
                    for (slot, id) in pattern.iter().zip(found) {
                        if let Slot::Var(v) = *slot {
                            match extended[v] {
                                Some(existing) if existing != id => continue 'matches,
                                _ => extended[v] = Some(id),
                            }
                        }
                    }
                    next.push(extended);
                }
            }
            rows = next;
            if rows.is_empty() {
                return rows;
            }
            for s in pattern {
                if let Slot::Var(v) = s {
                    bound.insert(v);
                }
            }
        }
        rows
    }

    fn left_join(&self, left: Vec<Row>, right: Vec<Row>, conditions: &[&Expression]) -> Vec<Row> {
        let index = JoinIndex::new(&left, &right);
        let mut out = Vec::new();
        for l in left {
            let before = out.len();
            for r in index.candidates(&l) {
                if let Some(merged) = merge(&l, r) {
                    if conditions.iter().all(|c| self.filter_row(c, &merged)) {
                        out.push(merged);
                    }
                }
            }
            if out.len() == before {
                out.push(l);
            }
        }
        out
    }

    fn filter_row(&self, expr: &Expression, row: &Row) -> bool {
        let lookup = |name: &str| -> Option<&Term> {
            let slot = *self.slots.get(name)?;
            row[slot].map(|id| self.store.term(id))
        };
        self.eval(expr, &lookup).and_then(|v| effective_boolean(&v)).unwrap_or(false)
    }

    /// Turns id rows into term rows, grouping and counting when the query
    /// aggregates. Returns the column names alongside.
    fn aggregate_or_resolve(&self, query: &Query, rows: Vec<Row>) -> (Vec<String>, Vec<Vec<Option<Term>>>) {
        if !query.has_aggregates() {
            let resolved = rows
                .into_iter()
                .map(|r| r.into_iter().map(|id| id.map(|id| self.store.term(id).clone())).collect())
                .collect();
            return (self.vars.clone(), resolved);
        }
        let key_slots: Vec<usize> = query.group_by.iter().map(|v| self.slots[v]).collect();
        let mut groups: Vec<(Vec<Option<TermId>>, Vec<Row>)> = Vec::new();
        let mut position: HashMap<Vec<Option<TermId>>, usize> = HashMap::new();
        for row in rows {
            let key: Vec<Option<TermId>> = key_slots.iter().map(|&s| row[s]).collect();
            let idx = *position.entry(key.clone()).or_insert_with(|| {
                groups.push((key, Vec::new()));
                groups.len() - 1
            });
            groups[idx].1.push(row);
        }
        if groups.is_empty() && key_slots.is_empty() {
            groups.push((Vec::new(), Vec::new()));
        }
        let counts: Vec<&ProjectionItem> = match &query.projection {
            Projection::Items(items) => items.iter().filter(|i| matches!(i, ProjectionItem::Count { .. })).collect(),
            Projection::All => Vec::new(),
        };
        let visible: Vec<usize> = (0..self.vars.len()).filter(|&i| !is_hidden_var(&self.vars[i])).collect();
        let mut table: Vec<String> = query.group_by.clone();
        table.extend(counts.iter().map(|c| c.output_name().to_string()));
        let out = groups
            .into_iter()
            .map(|(key, members)| {
                let mut row: Vec<Option<Term>> =
                    key.into_iter().map(|id| id.map(|id| self.store.term(id).clone())).collect();
                for item in &counts {
                    let ProjectionItem::Count { distinct, argument, .. } = item else { unreachable!() };
                    let n = match (argument, distinct) {
                        (None, false) => members.len(),
                        (None, true) => members
                            .iter()
                            .map(|r| visible.iter().map(|&i| r[i]).collect::<Vec<_>>())
                            .collect::<HashSet<_>>()
                            .len(),
                        (Some(v), false) => members.iter().filter(|r| r[self.slots[v]].is_some()).count(),
                        (Some(v), true) => members
                            .iter()
                            .filter_map(|r| r[self.slots[v]])
                            .collect::<HashSet<_>>()
                            .len(),
                    };
                    row.push(Some(Term::integer(n as i64)));
                }
                row
            })
            .collect();
        (table, out)
    }

    fn eval<'t>(&self, expr: &'t Expression, lookup: &dyn Fn(&str) -> Option<&'t Term>) -> Option<Cow<'t, Term>> {
        let bool_term = |b: bool| Some(Cow::Owned(Term::boolean(b)));
        match expr {
            Expression::Var(v) => lookup(v).map(Cow::Borrowed),
            Expression::Const(t) => Some(Cow::Borrowed(t)),
            Expression::Or(a, b) => {
                let a = self.eval(a, lookup).and_then(|v| effective_boolean(&v));
                let b = self.eval(b, lookup).and_then(|v| effective_boolean(&v));
                match (a, b) {
                    (Some(true), _) | (_, Some(true)) => bool_term(true),
                    (Some(false), Some(false)) => bool_term(false),
                    _ => None,
                }
            }
            Expression::And(a, b) => {
                let a = self.eval(a, lookup).and_then(|v| effective_boolean(&v));
                let b = self.eval(b, lookup).and_then(|v| effective_boolean(&v));
                match (a, b) {
                    (Some(false), _) | (_, Some(false)) => bool_term(false),
                    (Some(true), Some(true)) => bool_term(true),
                    _ => None,
                }
            }
            Expression::Not(a) => {
                let v = effective_boolean(&*self.eval(a, lookup)?)?;
                bool_term(!v)
            }
            Expression::Compare(op, a, b) => {
                let a = self.eval(a, lookup)?;
                let b = self.eval(b, lookup)?;
                bool_term(compare_values(*op, &a, &b)?)
            }
            Expression::In { needle, list, negated } => {
                let needle = self.eval(needle, lookup)?;
                let mut error = false;
                for item in list {
                    match self.eval(item, lookup).and_then(|v| compare_values(CompareOp::Eq, &needle, &v)) {
                        Some(true) => return bool_term(!negated),
                        Some(false) => {}
                        None => error = true,
                    }
                }
                if error {
                    None
                } else {
                    bool_term(*negated)
                }
            }
            Expression::Bound(v) => bool_term(lookup(v).is_some()),
            Expression::Regex { text, pattern, flags } => {
                let text = self.eval(text, lookup)?;
                let text = string_value(&text)?;
                let pattern = self.eval(pattern, lookup)?;
                let pattern = simple_string(&pattern)?;
                let flags = match flags {
                    Some(f) => simple_string(&*self.eval(f, lookup)?)?.to_string(),
                    None => String::new(),
                };
                let matched = self.regex(pattern, &flags)?.is_match(text);
                bool_term(matched)
            }
            Expression::Str(a) => match &*self.eval(a, lookup)? {
                Term::Iri(iri) => Some(Cow::Owned(Term::string(iri.clone()))),
                Term::Literal(lit) => Some(Cow::Owned(Term::string(lit.lexical.clone()))),
                Term::Blank(_) => None,
            },
            Expression::Lang(a) => match &*self.eval(a, lookup)? {
                Term::Literal(lit) => Some(Cow::Owned(Term::string(lit.language.clone().unwrap_or_default()))),
                _ => None,
            },
            Expression::Datatype(a) => match &*self.eval(a, lookup)? {
                Term::Literal(lit) if lit.language.is_some() => Some(Cow::Owned(Term::iri(rdf::LANG_STRING))),
                Term::Literal(lit) => Some(Cow::Owned(Term::iri(lit.datatype.clone()))),
                _ => None,
            },
            Expression::IsIri(a) => bool_term(self.eval(a, lookup)?.is_iri()),
            Expression::IsBlank(a) => bool_term(self.eval(a, lookup)?.is_blank()),
            Expression::IsLiteral(a) => bool_term(self.eval(a, lookup)?.is_literal()),
            Expression::SameTerm(a, b) => {
                let a = self.eval(a, lookup)?;
                let b = self.eval(b, lookup)?;
                bool_term(a == b)
            }
        }
    }

    fn regex(&self, pattern: &str, flags: &str) -> Option<Regex> {
        let key = (pattern.to_string(), flags.to_string());
        self.regexes
            .borrow_mut()
            .entry(key)
            .or_insert_with(|| {
                if !flags.chars().all(|c| matches!(c, 'i' | 's' | 'm' | 'x')) {
                    return None;
                }
                let full = if flags.is_empty() {
                    pattern.to_string()
                } else {
                    format!("(?{flags}){pattern}")
                };
                Regex::new(&full).ok()
            })
            .clone()
    }
}

/// Rows whose certainly-bound shared variables agree are grouped by hash;
/// the rest of the compatibility check happens per pair.
struct JoinIndex<'r> {
    key: Vec<usize>,
    buckets: HashMap<Vec<TermId>, Vec<&'r Row>>,
}

impl<'r> JoinIndex<'r> {
    fn new(left: &[Row], right: &'r [Row]) -> JoinIndex<'r> {
        let width = left.first().or(right.first()).map_or(0, |r| r.len());
        let always = |rows: &[Row], i: usize| rows.iter().all(|r| r[i].is_some());
        let key: Vec<usize> = (0..width).filter(|&i| always(left, i) && always(right, i)).collect();
        let mut buckets: HashMap<Vec<TermId>, Vec<&Row>> = HashMap::new();
        for r in right {
            buckets.entry(key.iter().map(|&i| r[i].unwrap()).collect()).or_default().push(r);
        }
        JoinIndex { key, buckets }
    }

    fn candidates(&self, l: &Row) -> impl Iterator<Item = &'r Row> + '_ {
        let k: Vec<TermId> = self.key.iter().map(|&i| l[i].unwrap()).collect();
        self.buckets.get(&k).into_iter().flatten().copied()
    }
}

fn merge(a: &Row, b: &Row) -> Option<Row> {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) if x != y => Err(()),
            _ => Ok(x.or(*y)),
        })
        .collect::<Result<Row, ()>>()
        .ok()
}

fn join(left: Vec<Row>, right: Vec<Row>) -> Vec<Row> {
    if left.len() == 1 && left[0].iter().all(Option::is_none) {
        return right;
    }
    let index = JoinIndex::new(&left, &right);
    let mut out = Vec::new();
    for l in &left {
        out.extend(index.candidates(l).filter_map(|r| merge(l, r)));
    }
    out
}

fn order_rows(
    ev: &Evaluator<'_>,
    query: &Query,
    table: &[String],
    rows: Vec<Vec<Option<Term>>>,
) -> Vec<Vec<Option<Term>>> {
    let output_vars = query.result_variables();
    let cols: Vec<usize> = output_vars
        .iter()
        .filter_map(|v| table.iter().position(|t| t == v))
        .collect();
    let mut keyed: Vec<(Vec<Option<Term>>, Vec<Option<Term>>)> = rows
        .into_iter()
        .map(|row| {
            let lookup = |name: &str| -> Option<&Term> {
                let i = table.iter().position(|t| t == name)?;
                row[i].as_ref()
            };
            let keys = query
                .modifiers
                .order_by
                .iter()
                .map(|c| ev.eval(&c.expression, &lookup).map(Cow::into_owned))
                .collect();
            (keys, row)
        })
        .collect();
    keyed.sort_by(|(ka, ra), (kb, rb)| {
        for (i, cond) in query.modifiers.order_by.iter().enumerate() {
            let ord = compare_optional(&ka[i], &kb[i]);
            let ord = if cond.descending { ord.reverse() } else { ord };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        cols.iter()
            .map(|&c| compare_optional(&ra[c], &rb[c]))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    keyed.into_iter().map(|(_, r)| r).collect()
}

fn instantiate_template(template: &[PatternTriple], table: &[String], rows: &[Vec<Option<Term>>]) -> Graph {
    let mut graph = Graph::new();
    for (n, row) in rows.iter().enumerate() {
        let resolve = |v: &VarOrTerm| -> Option<Term> {
            match v {
                VarOrTerm::Term(t) => Some(t.clone()),
                VarOrTerm::Var(name) if is_hidden_var(name) => Some(Term::blank(format!("c{n}_{}", &name[2..]))),
                VarOrTerm::Var(name) => {
                    let i = table.iter().position(|t| t == name)?;
                    row[i].clone()
                }
            }
        };
        for t in template {
            let (Some(s), Some(p), Some(o)) = (resolve(&t.subject), resolve(&t.predicate), resolve(&t.object)) else {
                continue;
            };
            if let Ok(triple) = Triple::new(s, p, o) {
                graph.insert(triple);
            }
        }
    }
    graph
}

fn is_simple_string(lit: &Literal) -> bool {
    lit.language.is_none() && lit.datatype == xsd::STRING
}

fn simple_string(t: &Term) -> Option<&str> {
    match t {
        Term::Literal(lit) if is_simple_string(lit) => Some(&lit.lexical),
        _ => None,
    }
}

/// Lexical form of any string literal, language-tagged or not.
fn string_value(t: &Term) -> Option<&str> {
    match t {
        Term::Literal(lit) if lit.language.is_some() || lit.datatype == xsd::STRING => Some(&lit.lexical),
        _ => None,
    }
}

fn effective_boolean(t: &Term) -> Option<bool> {
    let lit = t.as_literal()?;
    if lit.datatype == xsd::BOOLEAN {
        return boolean_value(lit);
    }
    if let Some(n) = numeric_value(lit) {
        return Some(n != 0.0 && !n.is_nan());
    }
    if lit.language.is_some() || lit.datatype == xsd::STRING {
        return Some(!lit.lexical.is_empty());
    }
    None
}

/// Value comparison used by FILTER. `None` is a type error.
fn compare_values(op: CompareOp, a: &Term, b: &Term) -> Option<bool> {
    let ordering: Option<Option<Ordering>> = match (a, b) {
        (Term::Literal(x), Term::Literal(y)) => {
            if let (Some(p), Some(q)) = (numeric_value(x), numeric_value(y)) {
                Some(p.partial_cmp(&q))
            } else if is_simple_string(x) && is_simple_string(y) {
                Some(Some(x.lexical.cmp(&y.lexical)))
            } else if let (Some(p), Some(q)) = (boolean_value(x), boolean_value(y)) {
                Some(Some(p.cmp(&q)))
            } else if x.datatype == xsd::DATE && y.datatype == xsd::DATE {
                match (parse_date(&x.lexical), parse_date(&y.lexical)) {
                    (Some(p), Some(q)) => Some(Some(p.cmp(&q))),
                    _ => None,
                }
            } else if x.datatype == xsd::DATE_TIME && y.datatype == xsd::DATE_TIME {
                match (parse_date_time(&x.lexical), parse_date_time(&y.lexical)) {
                    (Some(p), Some(q)) => Some(Some(p.cmp(&q))),
                    _ => None,
                }
            } else {
                None
            }
        }
        _ => None,
    };
    match ordering {
        // NaN: unordered
        Some(None) => Some(op == CompareOp::Ne),
        Some(Some(o)) => Some(match op {
            CompareOp::Eq => o == Ordering::Equal,
            CompareOp::Ne => o != Ordering::Equal,
            CompareOp::Lt => o == Ordering::Less,
            CompareOp::Le => o != Ordering::Greater,
            CompareOp::Gt => o == Ordering::Greater,
            CompareOp::Ge => o != Ordering::Less,
        }),
        None => match op {
            CompareOp::Eq => Some(a == b),
            CompareOp::Ne => Some(a != b),
            _ => None,
        },
    }
}

fn literal_class(lit: &Literal) -> u8 {
    if numeric_value(lit).is_some() {
        0
    } else if lit.datatype == xsd::DATE && parse_date(&lit.lexical).is_some() {
        1
    } else if lit.datatype == xsd::DATE_TIME && parse_date_time(&lit.lexical).is_some() {
        2
    } else {
        3
    }
}

/// Total order used by ORDER BY: blank nodes, then IRIs, then literals.
/// Literals order numbers by value, then dates, then date-times, then the
/// rest by lexical form. Ties fall back to the structural term order.
pub fn compare_terms(a: &Term, b: &Term) -> Ordering {
    let rank = |t: &Term| match t {
        Term::Blank(_) => 0,
        Term::Iri(_) => 1,
        Term::Literal(_) => 2,
    };
    let by_value = match (a, b) {
        (Term::Literal(x), Term::Literal(y)) => {
            let (cx, cy) = (literal_class(x), literal_class(y));
            cx.cmp(&cy).then_with(|| match cx {
                0 => numeric_value(x).unwrap().total_cmp(&numeric_value(y).unwrap()),
                1 => parse_date(&x.lexical).cmp(&parse_date(&y.lexical)),
                2 => parse_date_time(&x.lexical).cmp(&parse_date_time(&y.lexical)),
                _ => Ordering::Equal,
            })
        }
        _ => rank(a).cmp(&rank(b)),
    };
    by_value.then_with(|| a.cmp(b))
}

/// [`compare_terms`] with unbound first.
pub(crate) fn compare_optional(a: &Option<Term>, b: &Option<Term>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(a), Some(b)) => compare_terms(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{parse_query, run_query};
    use crate::rdf::parse_turtle;

    const DATA: &str = r#"
        @prefix ex: <http://ex.org/> .
        @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
        ex:m1 a ex:Machine ; ex:name "Press" ; ex:power 12 .
        ex:m2 a ex:Machine ; ex:name "Lathe"@en ; ex:power 7.5 .
        ex:m3 a ex:Machine .
        ex:o1 ex:machine ex:m1 ; ex:date "2021-03-01"^^xsd:date .
        ex:o2 ex:machine ex:m1 ; ex:date "2021-01-15"^^xsd:date .
        ex:o3 ex:machine ex:m2 .
    "#;

    fn store() -> Store {
        Store::from_graph(&parse_turtle(DATA, None).unwrap())
    }

    fn select(q: &str) -> SolutionSequence {
        match run_query(&format!("PREFIX ex: <http://ex.org/> {q}"), &store()).unwrap() {
            QueryResult::Solutions(s) => s,
            other => panic!("not a select: {other:?}"),
        }
    }

    fn ask(q: &str) -> bool {
        match run_query(&format!("PREFIX ex: <http://ex.org/> {q}"), &store()).unwrap() {
            QueryResult::Boolean(b) => b,
            other => panic!("not an ask: {other:?}"),
        }
    }

    #[test]
    fn ask_empty_group_is_true_on_any_store() {
        assert!(ask("ASK {}"));
        let empty = Store::new();
        assert_eq!(run_query("ASK {}", &empty).unwrap(), QueryResult::Boolean(true));
    }

    #[test]
    fn single_pattern_single_row() {
        let mut g = Graph::new();
        g.insert(Triple::new(Term::iri("http://a"), Term::iri("http://p"), Term::iri("http://b")).unwrap());
        let s = Store::from_graph(&g);
        let QueryResult::Solutions(r) = run_query("SELECT ?o { <http://a> <http://p> ?o }", &s).unwrap() else {
            panic!()
        };
        assert_eq!(r.rows, vec![vec![Some(Term::iri("http://b"))]]);
    }

    #[test]
    fn filter_false_removes_everything() {
        assert!(select("SELECT * { ?s ?p ?o FILTER(false) }").is_empty());
    }

    #[test]
    fn optional_keeps_unmatched() {
        let r = select("SELECT ?m ?n { ?m a ex:Machine OPTIONAL { ?m ex:name ?n } } ORDER BY ?m");
        assert_eq!(r.len(), 3);
        assert_eq!(r.get(2, "n"), None);
    }

    #[test]
    fn optional_filter_is_join_condition() {
        let r = select("SELECT ?m ?p { ?m a ex:Machine OPTIONAL { ?m ex:power ?p FILTER(?p > 10) } }");
        assert_eq!(r.len(), 3);
        assert_eq!(r.rows.iter().filter(|row| row[1].is_some()).count(), 1);
    }

    #[test]
    fn union_concatenates() {
        let r = select("SELECT ?x { { ?x ex:name ?n } UNION { ?x ex:machine ?m } }");
        assert_eq!(r.len(), 5);
    }

    #[test]
    fn filter_errors_are_false() {
        // ?n is unbound for m3; comparing a language string with < is a type error
        assert!(select("SELECT ?m { ?m a ex:Machine OPTIONAL { ?m ex:name ?n } FILTER(?n < \"Z\") }").len() == 1);
        let r = select("SELECT ?m { ?m a ex:Machine OPTIONAL { ?m ex:name ?n } FILTER(!(?n < \"Z\")) }");
        assert_eq!(r.len(), 0);
        // error || true is true
        let r = select("SELECT ?m { ?m a ex:Machine OPTIONAL { ?m ex:name ?n } FILTER(?n < \"Z\" || true) }");
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn numeric_promotion_and_dates() {
        assert_eq!(select("SELECT ?m { ?m ex:power ?p FILTER(?p >= 7.5) }").len(), 2);
        assert_eq!(select("SELECT ?m { ?m ex:power ?p FILTER(?p = 12.0) }").len(), 1);
        let r = select("SELECT ?o { ?o ex:date ?d FILTER(?d < \"2021-02-01\"^^<http://www.w3.org/2001/XMLSchema#date>) }");
        assert_eq!(r.get(0, "o"), Some(&Term::iri("http://ex.org/o2")));
    }

    #[test]
    fn order_limit_offset_distinct() {
        let r = select("SELECT ?p { ?m ex:power ?p } ORDER BY DESC(?p)");
        assert_eq!(r.get(0, "p"), Some(&Term::integer(12)));
        let r = select("SELECT DISTINCT ?m { ?o ex:machine ?m } ORDER BY ?m LIMIT 1 OFFSET 1");
        assert_eq!(r.rows, vec![vec![Some(Term::iri("http://ex.org/m2"))]]);
    }

    #[test]
    fn count_and_group_by() {
        let r = select("SELECT ?m (COUNT(?o) AS ?n) { ?o ex:machine ?m } GROUP BY ?m ORDER BY DESC(?n)");
        assert_eq!(r.rows[0], vec![Some(Term::iri("http://ex.org/m1")), Some(Term::integer(2))]);
        let r = select("SELECT (COUNT(*) AS ?n) { ?x ex:nothing ?y }");
        assert_eq!(r.rows, vec![vec![Some(Term::integer(0))]]);
        let r = select("SELECT (COUNT(DISTINCT ?m) AS ?n) { ?o ex:machine ?m }");
        assert_eq!(r.rows, vec![vec![Some(Term::integer(2))]]);
    }

    #[test]
    fn regex_str_lang_datatype() {
        assert_eq!(select("SELECT ?m { ?m ex:name ?n FILTER(regex(?n, \"^p\", \"i\")) }").len(), 1);
        assert_eq!(select("SELECT ?m { ?m ex:name ?n FILTER(lang(?n) = \"en\") }").len(), 1);
        assert_eq!(
            select("SELECT ?m { ?m ex:power ?p FILTER(datatype(?p) = <http://www.w3.org/2001/XMLSchema#integer>) }").len(),
            1
        );
        assert_eq!(select("SELECT ?m { ?m a ?c FILTER(regex(str(?c), \"Machine$\")) }").len(), 3);
        assert_eq!(select("SELECT ?m { ?m ex:power ?p FILTER(?p IN (12, 3)) }").len(), 1);
        assert_eq!(select("SELECT ?m { ?m ex:power ?p FILTER(?p NOT IN (12, 3)) }").len(), 1);
    }

    #[test]
    fn construct_skips_holes() {
        let q = parse_query(
            "PREFIX ex: <http://ex.org/> CONSTRUCT { ?m ex:label ?n . ?m ex:kind [ ex:v 1 ] } WHERE { ?m a ex:Machine OPTIONAL { ?m ex:name ?n } }",
        )
        .unwrap();
        let QueryResult::Graph(g) = evaluate(&q, &store()) else { panic!() };
        assert_eq!(g.iter().filter(|t| t.predicate == Term::iri("http://ex.org/label")).count(), 2);
        // one fresh blank node per solution
        assert_eq!(g.iter().filter(|t| t.predicate == Term::iri("http://ex.org/v")).count(), 3);
    }

    #[test]
    fn unknown_constants_match_nothing() {
        assert!(select("SELECT ?s { ?s ex:unknown ?o }").is_empty());
        assert!(!ask("ASK { ex:nobody ?p ?o }"));
    }

    #[test]
    fn repeated_variable_in_one_pattern() {
        let mut g = Graph::new();
        g.insert(Triple::new(Term::iri("http://a"), Term::iri("http://p"), Term::iri("http://a")).unwrap());
        g.insert(Triple::new(Term::iri("http://a"), Term::iri("http://p"), Term::iri("http://b")).unwrap());
        let s = Store::from_graph(&g);
        let QueryResult::Solutions(r) = run_query("SELECT ?x { ?x <http://p> ?x }", &s).unwrap() else { panic!() };
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn total_order_groups_kinds() {
        let mut terms = vec![
            Term::string("b"),
            Term::integer(10),
            Term::iri("http://z"),
            Term::blank("x"),
            Term::typed("2.5", xsd::DECIMAL),
            Term::typed("2020-01-01", xsd::DATE),
        ];
        terms.sort_by(compare_terms);
        assert_eq!(terms[0], Term::blank("x"));
        assert_eq!(terms[1], Term::iri("http://z"));
        assert_eq!(terms[2], Term::typed("2.5", xsd::DECIMAL));
        assert_eq!(terms[3], Term::integer(10));
        assert_eq!(terms[5], Term::string("b"));
    }
}
