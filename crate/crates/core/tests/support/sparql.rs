//! Random queries from the supported fragment and a naive reference
//! evaluator: nested-loop joins over solution maps, OPTIONAL as left join,
//! UNION as concatenation, DISTINCT as set de-duplication.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use kgf_core::rdf::vocab::{rdf, xsd};
use kgf_core::rdf::{Graph, Term, Triple};
use rand::seq::SliceRandom;
use rand::Rng;

use super::gen::{QueryVocab, TestRng};

pub type Solution = BTreeMap<String, Term>;

#[derive(Debug, Clone)]
pub enum QTerm {
    Var(String),
    Const(Term),
}

#[derive(Debug, Clone)]
pub struct QTriple(pub QTerm, pub QTerm, pub QTerm);

#[derive(Debug, Clone)]
pub enum QElem {
    Triples(Vec<QTriple>),
    Optional(Vec<QElem>),
    Union(Vec<QElem>, Vec<QElem>),
    Group(Vec<QElem>),
    Filter(QExpr),
}

#[derive(Debug, Clone)]
pub enum QArg {
    Var(String),
    Const(Term),
}

#[derive(Debug, Clone)]
pub enum QExpr {
    Cmp(&'static str, QArg, QArg),
    Bound(String),
    Not(Box<QExpr>),
    And(Box<QExpr>, Box<QExpr>),
    Or(Box<QExpr>, Box<QExpr>),
    IsIri(String),
    IsLiteral(String),
    IsBlank(String),
    SameTerm(String, String),
    In(String, Vec<Term>, bool),
    /// regex(str(?v), pattern) with optional "i" flag
    Regex(String, String, bool),
    LangIs(String, String),
    DatatypeIs(String, String),
}

#[derive(Debug, Clone)]
pub enum QForm {
    Select { vars: Option<Vec<String>>, distinct: bool },
    Count { group: Option<String>, arg: Option<String>, distinct: bool },
    Ask,
    Construct(Vec<QTriple>),
}

#[derive(Debug, Clone)]
pub struct RQuery {
    pub form: QForm,
    pub pattern: Vec<QElem>,
    pub order: Vec<(String, bool)>,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Answer {
    Rows(Vec<String>, Vec<Vec<Option<Term>>>),
    Boolean(bool),
    Graph(Graph),
}

// ---------------------------------------------------------------- rendering

fn term_text(t: &QTerm) -> String {
    match t {
        QTerm::Var(v) if v.starts_with("_:") => v.clone(),
        QTerm::Var(v) => format!("?{v}"),
        QTerm::Const(c) => c.to_string(),
    }
}

fn arg_text(a: &QArg) -> String {
    match a {
        QArg::Var(v) => format!("?{v}"),
        QArg::Const(c) => c.to_string(),
    }
}

fn expr_text(e: &QExpr) -> String {
    match e {
        QExpr::Cmp(op, a, b) => format!("({} {op} {})", arg_text(a), arg_text(b)),
        QExpr::Bound(v) => format!("bound(?{v})"),
        QExpr::Not(a) => format!("!({})", expr_text(a)),
        QExpr::And(a, b) => format!("({} && {})", expr_text(a), expr_text(b)),
        QExpr::Or(a, b) => format!("({} || {})", expr_text(a), expr_text(b)),
        QExpr::IsIri(v) => format!("isIRI(?{v})"),
        QExpr::IsLiteral(v) => format!("isLiteral(?{v})"),
        QExpr::IsBlank(v) => format!("isBlank(?{v})"),
        QExpr::SameTerm(a, b) => format!("sameTerm(?{a}, ?{b})"),
        QExpr::In(v, list, negated) => {
            let items: Vec<String> = list.iter().map(|t| t.to_string()).collect();
            format!("(?{v} {}IN ({}))", if *negated { "NOT " } else { "" }, items.join(", "))
        }
        QExpr::Regex(v, p, i) => {
            if *i {
                format!("regex(str(?{v}), \"{p}\", \"i\")")
            } else {
                format!("regex(str(?{v}), \"{p}\")")
            }
        }
        QExpr::LangIs(v, l) => format!("(lang(?{v}) = \"{l}\")"),
        QExpr::DatatypeIs(v, d) => format!("(datatype(?{v}) = <{d}>)"),
    }
}

fn group_text(elems: &[QElem]) -> String {
    let mut out = String::from("{ ");
    for e in elems {
        match e {
            QElem::Triples(ts) => {
                for t in ts {
                    out.push_str(&format!("{} {} {} . ", term_text(&t.0), term_text(&t.1), term_text(&t.2)));
                }
            }
            QElem::Optional(g) => out.push_str(&format!("OPTIONAL {} ", group_text(g))),
            QElem::Union(a, b) => out.push_str(&format!("{} UNION {} ", group_text(a), group_text(b))),
            QElem::Group(g) => out.push_str(&format!("{} ", group_text(g))),
            QElem::Filter(f) => out.push_str(&format!("FILTER({}) ", expr_text(f))),
        }
    }
    out.push('}');
    out
}

impl RQuery {
    pub fn to_sparql(&self) -> String {
        let mut q = match &self.form {
            QForm::Select { vars, distinct } => {
                let proj = match vars {
                    None => "*".to_string(),
                    Some(vs) => vs.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join(" "),
                };
                format!("SELECT {}{proj} WHERE ", if *distinct { "DISTINCT " } else { "" })
            }
            QForm::Count { group, arg, distinct } => {
                let g = group.as_ref().map(|g| format!("?{g} ")).unwrap_or_default();
                let a = arg.as_ref().map(|a| format!("?{a}")).unwrap_or_else(|| "*".into());
                let d = if *distinct { "DISTINCT " } else { "" };
                format!("SELECT {g}(COUNT({d}{a}) AS ?n) WHERE ")
            }
            QForm::Ask => "ASK ".to_string(),
            QForm::Construct(template) => {
                let body: Vec<String> = template
                    .iter()
                    .map(|t| format!("{} {} {} .", term_text(&t.0), term_text(&t.1), term_text(&t.2)))
                    .collect();
                format!("CONSTRUCT {{ {} }} WHERE ", body.join(" "))
            }
        };
        q.push_str(&group_text(&self.pattern));
        if let QForm::Count { group: Some(g), .. } = &self.form {
            q.push_str(&format!(" GROUP BY ?{g}"));
        }
        if !self.order.is_empty() {
            q.push_str(" ORDER BY");
            for (v, desc) in &self.order {
                if *desc {
                    q.push_str(&format!(" DESC(?{v})"));
                } else {
                    q.push_str(&format!(" ?{v}"));
                }
            }
        }
        if let Some(l) = self.limit {
            q.push_str(&format!(" LIMIT {l}"));
        }
        if let Some(o) = self.offset {
            q.push_str(&format!(" OFFSET {o}"));
        }
        q
    }
}

// ---------------------------------------------------------------- generation

const VARS: &[&str] = &["a", "b", "c", "d", "e"];

struct QueryGen<'v> {
    vocab: &'v QueryVocab,
    used: Vec<String>,
}

impl QueryGen<'_> {
    fn var_or_new(&mut self, rng: &mut TestRng, reuse: f64) -> String {
        if !self.used.is_empty() && rng.gen_bool(reuse) {
            self.used.choose(rng).unwrap().clone()
        } else {
            let v = VARS.choose(rng).unwrap().to_string();
            if !self.used.contains(&v) {
                self.used.push(v.clone());
            }
            v
        }
    }

    fn triple(&mut self, rng: &mut TestRng) -> QTriple {
        let subject_var = if rng.gen_bool(0.93) { Some(self.var_or_new(rng, 0.85)) } else { None };
        let s = match &subject_var {
            Some(v) => QTerm::Var(v.clone()),
            None => QTerm::Const(self.vocab.entities.choose(rng).unwrap().clone()),
        };
        let is_type = rng.gen_bool(0.2);
        let p = if is_type {
            QTerm::Const(Term::iri(rdf::TYPE))
        } else if rng.gen_bool(0.1) {
            QTerm::Var(self.fresh_var(rng, subject_var.as_deref()))
        } else {
            QTerm::Const(self.vocab.predicates.choose(rng).unwrap().clone())
        };
        let o = if is_type && rng.gen_bool(0.7) {
            QTerm::Const(self.vocab.classes.choose(rng).unwrap().clone())
        } else if rng.gen_bool(0.85) {
            // self-loops are rare in the data, so avoid ?x p ?x most of the time
            let others: Vec<String> = self.used.iter().filter(|v| Some(v.as_str()) != subject_var.as_deref()).cloned().collect();
            if !others.is_empty() && rng.gen_bool(0.4) {
                QTerm::Var(others.choose(rng).unwrap().clone())
            } else if rng.gen_bool(0.05) {
                QTerm::Var(self.var_or_new(rng, 1.0))
            } else {
                QTerm::Var(self.fresh_var(rng, subject_var.as_deref()))
            }
        } else if rng.gen_bool(0.5) {
            QTerm::Const(self.vocab.entities.choose(rng).unwrap().clone())
        } else {
            QTerm::Const(self.vocab.literals.choose(rng).unwrap().clone())
        };
        QTriple(s, p, o)
    }

    /// A variable different from `avoid`, preferring unused names.
    fn fresh_var(&mut self, rng: &mut TestRng, avoid: Option<&str>) -> String {
        let unused: Vec<&str> = VARS.iter().copied().filter(|v| !self.used.iter().any(|u| u == v)).collect();
        let v = match unused.choose(rng) {
            Some(v) => v.to_string(),
            None => VARS.iter().copied().filter(|v| Some(*v) != avoid).collect::<Vec<_>>().choose(rng).unwrap().to_string(),
        };
        if !self.used.contains(&v) {
            self.used.push(v.clone());
        }
        v
    }

    /// Triples connected to `scope`, the variables already used in the
    /// enclosing group, so groups never evaluate to cross products.
    fn bgp(&mut self, rng: &mut TestRng, max: usize, scope: &mut Vec<String>) -> QElem {
        let n = rng.gen_range(1..=max);
        let mut out = Vec::new();
        for _ in 0..n {
            let mut t = self.triple(rng);
            let vars: Vec<String> = [&t.0, &t.1, &t.2]
                .into_iter()
                .filter_map(|x| match x {
                    QTerm::Var(v) => Some(v.clone()),
                    QTerm::Const(_) => None,
                })
                .collect();
            if !scope.is_empty() && !vars.iter().any(|v| scope.contains(v)) {
                t.0 = QTerm::Var(scope.choose(rng).unwrap().clone());
            }
            for x in [&t.0, &t.1, &t.2] {
                if let QTerm::Var(v) = x {
                    if !scope.contains(v) {
                        scope.push(v.clone());
                    }
                }
            }
            out.push(t);
        }
        QElem::Triples(out)
    }

    fn arg(&mut self, rng: &mut TestRng) -> QArg {
        if rng.gen_bool(0.5) {
            QArg::Var(self.existing(rng))
        } else if rng.gen_bool(0.8) {
            QArg::Const(self.vocab.literals.choose(rng).unwrap().clone())
        } else {
            QArg::Const(self.vocab.entities.choose(rng).unwrap().clone())
        }
    }

    fn existing(&self, rng: &mut TestRng) -> String {
        self.used.choose(rng).cloned().unwrap_or_else(|| "a".into())
    }

    fn expr(&mut self, rng: &mut TestRng, depth: usize) -> QExpr {
        let pick = if depth == 0 { rng.gen_range(0..10) } else { rng.gen_range(0..13) };
        match pick {
            0 | 1 | 2 => {
                let op = *["=", "!=", "<", "<=", ">", ">="].choose(rng).unwrap();
                let left = QArg::Var(self.existing(rng));
                QExpr::Cmp(op, left, self.arg(rng))
            }
            3 => QExpr::Bound(self.existing(rng)),
            4 => match rng.gen_range(0..3) {
                0 => QExpr::IsIri(self.existing(rng)),
                1 => QExpr::IsLiteral(self.existing(rng)),
                _ => QExpr::IsBlank(self.existing(rng)),
            },
            5 => QExpr::SameTerm(self.existing(rng), self.existing(rng)),
            6 => {
                let n = rng.gen_range(0..4);
                let list = (0..n)
                    .map(|_| match self.arg(rng) {
                        QArg::Const(c) => c,
                        QArg::Var(_) => Term::integer(2),
                    })
                    .collect();
                QExpr::In(self.existing(rng), list, rng.gen_bool(0.4))
            }
            7 => {
                let p = *["^a", "b", "e1", "^http", "c$", "[0-9]"].choose(rng).unwrap();
                QExpr::Regex(self.existing(rng), p.to_string(), rng.gen_bool(0.4))
            }
            8 => QExpr::LangIs(self.existing(rng), ["en", "fr", ""].choose(rng).unwrap().to_string()),
            9 => QExpr::DatatypeIs(
                self.existing(rng),
                [xsd::INTEGER, xsd::STRING, xsd::DATE, rdf::LANG_STRING].choose(rng).unwrap().to_string(),
            ),
            10 => QExpr::Not(Box::new(self.expr(rng, depth - 1))),
            11 => QExpr::And(Box::new(self.expr(rng, depth - 1)), Box::new(self.expr(rng, depth - 1))),
            _ => QExpr::Or(Box::new(self.expr(rng, depth - 1)), Box::new(self.expr(rng, depth - 1))),
        }
    }

    fn group(&mut self, rng: &mut TestRng, nesting: usize) -> Vec<QElem> {
        let mut scope = Vec::new();
        let mut elems = vec![self.bgp(rng, if nesting == 2 { 3 } else { 2 }, &mut scope)];
        let extras = rng.gen_range(0..3);
        for _ in 0..extras {
            let choice = if nesting == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..5) };
            match choice {
                0 => {
                    let f = self.expr(rng, 2);
                    elems.push(QElem::Filter(f));
                }
                1 => elems.push(self.bgp(rng, 1, &mut scope)),
                2 => {
                    let g = self.group(rng, nesting - 1);
                    elems.push(QElem::Optional(g));
                }
                3 => {
                    let a = self.group(rng, nesting - 1);
                    let b = self.group(rng, nesting - 1);
                    elems.push(QElem::Union(a, b));
                }
                _ => {
                    let g = self.group(rng, nesting - 1);
                    elems.push(QElem::Group(g));
                }
            }
        }
        elems.shuffle(rng);
        elems
    }
}

/// Variables in triple patterns, in order of first appearance.
pub fn pattern_vars(elems: &[QElem]) -> Vec<String> {
    fn walk(elems: &[QElem], out: &mut Vec<String>) {
        for e in elems {
            match e {
                QElem::Triples(ts) => {
                    for t in ts {
                        for x in [&t.0, &t.1, &t.2] {
                            if let QTerm::Var(v) = x {
                                if !out.contains(v) {
                                    out.push(v.clone());
                                }
                            }
                        }
                    }
                }
                QElem::Optional(g) | QElem::Group(g) => walk(g, out),
                QElem::Union(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                QElem::Filter(_) => {}
            }
        }
    }
    let mut out = Vec::new();
    walk(elems, &mut out);
    out
}

pub fn random_query(rng: &mut TestRng, vocab: &QueryVocab) -> RQuery {
    let mut g = QueryGen { vocab, used: Vec::new() };
    let pattern = g.group(rng, 2);
    let vars = pattern_vars(&pattern);
    let pick = if vars.is_empty() { rng.gen_range(0..3) * 3 } else { rng.gen_range(0..10) };
    let form = match pick {
        0 => QForm::Ask,
        1 => {
            let mut template = Vec::new();
            for _ in 0..rng.gen_range(1..3) {
                let s = if rng.gen_bool(0.15) {
                    QTerm::Var(format!("_:t{}", rng.gen_range(0..2)))
                } else {
                    vars.choose(rng).map(|v| QTerm::Var(v.clone())).unwrap()
                };
                let o = if rng.gen_bool(0.3) {
                    QTerm::Const(vocab.literals.choose(rng).unwrap().clone())
                } else {
                    vars.choose(rng).map(|v| QTerm::Var(v.clone())).unwrap()
                };
                template.push(QTriple(s, QTerm::Const(Term::iri("http://ex.org/out")), o));
            }
            QForm::Construct(template)
        }
        2 => QForm::Count {
            group: if rng.gen_bool(0.6) { vars.choose(rng).cloned() } else { None },
            arg: if rng.gen_bool(0.6) { vars.choose(rng).cloned() } else { None },
            distinct: rng.gen_bool(0.5),
        },
        _ => {
            let proj = if vars.is_empty() || rng.gen_bool(0.3) {
                None
            } else {
                let mut vs: Vec<String> = vars.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
                if vs.is_empty() {
                    vs.push(vars[0].clone());
                }
                vs.shuffle(rng);
                Some(vs)
            };
            QForm::Select {
                vars: proj,
                distinct: rng.gen_bool(0.3),
            }
        }
    };
    let mut order = Vec::new();
    let mut limit = None;
    let mut offset = None;
    if !matches!(form, QForm::Ask | QForm::Construct(_)) {
        let orderable: Vec<String> = match &form {
            QForm::Count { group, .. } => group.iter().cloned().chain(["n".to_string()]).collect(),
            _ => vars.clone(),
        };
        for _ in 0..if orderable.is_empty() { 0 } else { rng.gen_range(0..3) } {
            order.push((orderable.choose(rng).unwrap().clone(), rng.gen_bool(0.4)));
        }
        if rng.gen_bool(0.3) {
            limit = Some(rng.gen_range(0..8));
        }
        if rng.gen_bool(0.2) {
            offset = Some(rng.gen_range(0..4));
        }
    }
    RQuery {
        form,
        pattern,
        order,
        limit,
        offset,
    }
}

// ---------------------------------------------------------------- evaluation

fn compatible_merge(a: &Solution, b: &Solution) -> Option<Solution> {
    if b.iter().any(|(k, v)| a.get(k).is_some_and(|x| x != v)) {
        return None;
    }
    let mut out = a.clone();
    out.extend(b.iter().map(|(k, v)| (k.clone(), v.clone())));
    Some(out)
}

fn join(left: &[Solution], right: &[Solution]) -> Vec<Solution> {
    let mut out = Vec::new();
    for l in left {
        for r in right {
            if let Some(m) = compatible_merge(l, r) {
                out.push(m);
            }
        }
    }
    out
}

fn fits(pattern: &QTerm, term: &Term, sol: &Solution) -> bool {
    match pattern {
        QTerm::Const(c) => c == term,
        QTerm::Var(v) => sol.get(v).is_none_or(|bound| bound == term),
    }
}

/// Extends each solution with every graph triple the pattern matches,
/// scanning the whole graph per solution.
fn extend_with_triple(graph: &Graph, rows: &[Solution], t: &QTriple) -> Vec<Solution> {
    let mut out = Vec::new();
    for row in rows {
        'triples: for triple in graph.iter() {
            let mut fresh: Vec<(&String, &Term)> = Vec::new();
            for (p, term) in [(&t.0, &triple.subject), (&t.1, &triple.predicate), (&t.2, &triple.object)] {
                let ok = match p {
                    QTerm::Const(c) => c == term,
                    QTerm::Var(v) => match row.get(v).or_else(|| fresh.iter().find(|(n, _)| *n == v).map(|(_, t)| *t)) {
                        Some(bound) => bound == term,
                        None => {
                            fresh.push((v, term));
                            true
                        }
                    },
                };
                if !ok {
                    continue 'triples;
                }
            }
            let mut sol = row.clone();
            sol.extend(fresh.into_iter().map(|(v, t)| (v.clone(), t.clone())));
            out.push(sol);
        }
    }
    out
}

fn eval_group_parts<'q>(graph: &Graph, elems: &'q [QElem]) -> (Vec<Solution>, Vec<&'q QExpr>) {
    let mut rows = vec![Solution::new()];
    let mut filters = Vec::new();
    for e in elems {
        match e {
            QElem::Triples(ts) => {
                for t in ts {
                    rows = extend_with_triple(graph, &rows, t);
                }
            }
            QElem::Group(g) => rows = join(&rows, &eval_group(graph, g)),
            QElem::Union(a, b) => {
                let mut both = eval_group(graph, a);
                both.extend(eval_group(graph, b));
                rows = join(&rows, &both);
            }
            QElem::Optional(g) => {
                let (right, conds) = eval_group_parts(graph, g);
                let mut out = Vec::new();
                for l in &rows {
                    let mut any = false;
                    for r in &right {
                        if let Some(m) = compatible_merge(l, r) {
                            if conds.iter().all(|c| filter_true(c, &m)) {
                                out.push(m);
                                any = true;
                            }
                        }
                    }
                    if !any {
                        out.push(l.clone());
                    }
                }
                rows = out;
            }
            QElem::Filter(f) => filters.push(f),
        }
    }
    (rows, filters)
}

fn eval_group(graph: &Graph, elems: &[QElem]) -> Vec<Solution> {
    let (rows, filters) = eval_group_parts(graph, elems);
    rows.into_iter().filter(|r| filters.iter().all(|f| filter_true(f, r))).collect()
}

// Values: Ok(term) or Err(()) for a type error.
type V = Result<Term, ()>;

fn numeric(t: &Term) -> Option<f64> {
    let lit = t.as_literal()?;
    let numeric_types = [xsd::INTEGER, xsd::DECIMAL, xsd::DOUBLE];
    if !numeric_types.contains(&lit.datatype.as_str()) {
        return None;
    }
    if lit.datatype == xsd::INTEGER && !lit.lexical.chars().all(|c| c.is_ascii_digit() || c == '-' || c == '+') {
        return None;
    }
    lit.lexical.parse::<f64>().ok()
}

fn is_plain_string(t: &Term) -> Option<&str> {
    let lit = t.as_literal()?;
    (lit.language.is_none() && lit.datatype == xsd::STRING).then_some(lit.lexical.as_str())
}

fn boolean(t: &Term) -> Option<bool> {
    let lit = t.as_literal()?;
    if lit.datatype != xsd::BOOLEAN {
        return None;
    }
    match lit.lexical.as_str() {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

fn temporal(t: &Term, dt: &str) -> Option<String> {
    let lit = t.as_literal()?;
    // the generator only produces well-formed, zone-free values of these types
    (lit.datatype == dt).then(|| lit.lexical.clone())
}

fn compare(op: &str, a: &Term, b: &Term) -> Result<bool, ()> {
    let ord: Option<Option<Ordering>> = if let (Some(x), Some(y)) = (numeric(a), numeric(b)) {
        Some(x.partial_cmp(&y))
    } else if let (Some(x), Some(y)) = (is_plain_string(a), is_plain_string(b)) {
        Some(Some(x.cmp(y)))
    } else if let (Some(x), Some(y)) = (boolean(a), boolean(b)) {
        Some(Some(x.cmp(&y)))
    } else if let (Some(x), Some(y)) = (temporal(a, xsd::DATE), temporal(b, xsd::DATE)) {
        Some(Some(x.cmp(&y)))
    } else if let (Some(x), Some(y)) = (temporal(a, xsd::DATE_TIME), temporal(b, xsd::DATE_TIME)) {
        Some(Some(x.cmp(&y)))
    } else {
        None
    };
    match ord {
        Some(Some(o)) => Ok(match op {
            "=" => o.is_eq(),
            "!=" => o.is_ne(),
            "<" => o.is_lt(),
            "<=" => o.is_le(),
            ">" => o.is_gt(),
            _ => o.is_ge(),
        }),
        Some(None) => Ok(op == "!="),
        None => match op {
            "=" => Ok(a == b),
            "!=" => Ok(a != b),
            _ => Err(()),
        },
    }
}

fn arg_value(a: &QArg, sol: &Solution) -> V {
    match a {
        QArg::Var(v) => sol.get(v).cloned().ok_or(()),
        QArg::Const(c) => Ok(c.clone()),
    }
}

fn var(v: &str, sol: &Solution) -> V {
    sol.get(v).cloned().ok_or(())
}

fn eval_expr(e: &QExpr, sol: &Solution) -> Result<bool, ()> {
    match e {
        QExpr::Cmp(op, a, b) => compare(op, &arg_value(a, sol)?, &arg_value(b, sol)?),
        QExpr::Bound(v) => Ok(sol.contains_key(v)),
        QExpr::Not(a) => eval_expr(a, sol).map(|b| !b),
        QExpr::And(a, b) => match (eval_expr(a, sol), eval_expr(b, sol)) {
            (Ok(false), _) | (_, Ok(false)) => Ok(false),
            (Ok(true), Ok(true)) => Ok(true),
            _ => Err(()),
        },
        QExpr::Or(a, b) => match (eval_expr(a, sol), eval_expr(b, sol)) {
            (Ok(true), _) | (_, Ok(true)) => Ok(true),
            (Ok(false), Ok(false)) => Ok(false),
            _ => Err(()),
        },
        QExpr::IsIri(v) => Ok(var(v, sol)?.is_iri()),
        QExpr::IsLiteral(v) => Ok(var(v, sol)?.is_literal()),
        QExpr::IsBlank(v) => Ok(var(v, sol)?.is_blank()),
        QExpr::SameTerm(a, b) => Ok(var(a, sol)? == var(b, sol)?),
        QExpr::In(v, list, negated) => {
            let needle = var(v, sol)?;
            let mut err = false;
            for item in list {
                match compare("=", &needle, item) {
                    Ok(true) => return Ok(!negated),
                    Ok(false) => {}
                    Err(()) => err = true,
                }
            }
            if err {
                Err(())
            } else {
                Ok(*negated)
            }
        }
        QExpr::Regex(v, p, i) => {
            let text = match var(v, sol)? {
                Term::Iri(s) => s,
                Term::Literal(l) => l.lexical,
                Term::Blank(_) => return Err(()),
            };
            let re = if *i { format!("(?i){p}") } else { p.clone() };
            Ok(regex::Regex::new(&re).unwrap().is_match(&text))
        }
        QExpr::LangIs(v, l) => match var(v, sol)? {
            Term::Literal(lit) => Ok(lit.language.as_deref().unwrap_or("") == l),
            _ => Err(()),
        },
        QExpr::DatatypeIs(v, d) => match var(v, sol)? {
            Term::Literal(lit) if lit.language.is_some() => Ok(d == rdf::LANG_STRING),
            Term::Literal(lit) => Ok(&lit.datatype == d),
            _ => Err(()),
        },
    }
}

fn filter_true(e: &QExpr, sol: &Solution) -> bool {
    eval_expr(e, sol).unwrap_or(false)
}

/// The ordering the engine promises: unbound, blank nodes, IRIs, then
/// literals (numbers by value, dates, date-times, the rest), with the
/// structural term order breaking ties.
pub fn order_key_cmp(a: &Option<Term>, b: &Option<Term>) -> Ordering {
    fn class(t: &Term) -> (u8, u8) {
        match t {
            Term::Blank(_) => (0, 0),
            Term::Iri(_) => (1, 0),
            Term::Literal(l) => {
                let c = if numeric(t).is_some() {
                    0
                } else if l.datatype == xsd::DATE {
                    1
                } else if l.datatype == xsd::DATE_TIME {
                    2
                } else {
                    3
                };
                (2, c)
            }
        }
    }
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, _) => Ordering::Less,
        (_, None) => Ordering::Greater,
        (Some(x), Some(y)) => {
            let (cx, cy) = (class(x), class(y));
            cx.cmp(&cy)
                .then_with(|| match cx {
                    (2, 0) => numeric(x).unwrap().total_cmp(&numeric(y).unwrap()),
                    (2, 1) | (2, 2) => x.lexical_form().cmp(y.lexical_form()),
                    _ => Ordering::Equal,
                })
                .then_with(|| x.cmp(y))
        }
    }
}

fn sort_and_slice(
    q: &RQuery,
    mut rows: Vec<(Solution, Vec<Option<Term>>)>,
    distinct: bool,
) -> Vec<Vec<Option<Term>>> {
    rows.sort_by(|(sa, pa), (sb, pb)| {
        for (v, desc) in &q.order {
            let o = order_key_cmp(&sa.get(v).cloned(), &sb.get(v).cloned());
            let o = if *desc { o.reverse() } else { o };
            if o.is_ne() {
                return o;
            }
        }
        for (x, y) in pa.iter().zip(pb) {
            let o = order_key_cmp(x, y);
            if o.is_ne() {
                return o;
            }
        }
        Ordering::Equal
    });
    let mut projected: Vec<Vec<Option<Term>>> = rows.into_iter().map(|(_, p)| p).collect();
    if distinct {
        let mut seen = BTreeSet::new();
        projected.retain(|r| seen.insert(r.clone()));
    }
    projected
        .into_iter()
        .skip(q.offset.unwrap_or(0))
        .take(q.limit.unwrap_or(usize::MAX))
        .collect()
}

pub fn reference_evaluate(q: &RQuery, graph: &Graph) -> Answer {
    let solutions = eval_group(graph, &q.pattern);
    match &q.form {
        QForm::Ask => {
            let n = solutions.len().saturating_sub(q.offset.unwrap_or(0)).min(q.limit.unwrap_or(usize::MAX));
            Answer::Boolean(n > 0)
        }
        QForm::Select { vars, distinct } => {
            let vars: Vec<String> = vars.clone().unwrap_or_else(|| pattern_vars(&q.pattern));
            let rows = solutions
                .into_iter()
                .map(|s| {
                    let p = vars.iter().map(|v| s.get(v).cloned()).collect();
                    (s, p)
                })
                .collect();
            let rows = sort_and_slice(q, rows, *distinct);
            Answer::Rows(vars, rows)
        }
        QForm::Count { group, arg, distinct } => {
            let mut groups: BTreeMap<Option<Term>, Vec<Solution>> = BTreeMap::new();
            for s in solutions {
                let key = group.as_ref().and_then(|g| s.get(g).cloned());
                groups.entry(key).or_default().push(s);
            }
            if groups.is_empty() && group.is_none() {
                groups.insert(None, Vec::new());
            }
            let mut vars: Vec<String> = group.iter().cloned().collect();
            vars.push("n".into());
            let rows = groups
                .into_iter()
                .map(|(key, members)| {
                    let n = match (arg, distinct) {
                        (None, false) => members.len(),
                        (None, true) => members.iter().collect::<BTreeSet<_>>().len(),
                        (Some(a), false) => members.iter().filter(|m| m.contains_key(a)).count(),
                        (Some(a), true) => members.iter().filter_map(|m| m.get(a)).collect::<BTreeSet<_>>().len(),
                    };
                    let count = Term::integer(n as i64);
                    let mut sol = Solution::new();
                    if let (Some(g), Some(k)) = (group, &key) {
                        sol.insert(g.clone(), k.clone());
                    }
                    sol.insert("n".into(), count.clone());
                    let mut p: Vec<Option<Term>> = Vec::new();
                    if group.is_some() {
                        p.push(key);
                    }
                    p.push(Some(count));
                    (sol, p)
                })
                .collect();
            let rows = sort_and_slice(q, rows, false);
            Answer::Rows(vars, rows)
        }
        QForm::Construct(template) => {
            let mut g = Graph::new();
            for (i, s) in solutions.iter().enumerate() {
                let inst = |t: &QTerm| -> Option<Term> {
                    match t {
                        QTerm::Const(c) => Some(c.clone()),
                        QTerm::Var(v) if v.starts_with("_:") => Some(Term::blank(format!("s{i}{}", &v[2..]))),
                        QTerm::Var(v) => s.get(v).cloned(),
                    }
                };
                for t in template {
                    if let (Some(a), Some(b), Some(c)) = (inst(&t.0), inst(&t.1), inst(&t.2)) {
                        if !a.is_literal() && b.is_iri() {
                            g.insert(Triple::new(a, b, c).unwrap());
                        }
                    }
                }
            }
            Answer::Graph(g)
        }
    }
}
