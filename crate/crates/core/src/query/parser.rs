use std::collections::HashMap;

use super::ast::*;
use super::QueryError;
use crate::rdf::iri::resolve;
use crate::rdf::lexer::{Lexer, Mode, Tok, Token};
use crate::rdf::vocab::{rdf, xsd};
use crate::rdf::{is_absolute_iri, Term};

const MAX_DEPTH: usize = 64;

/// Keywords that belong to SPARQL features outside the supported fragment.
const UNSUPPORTED_KEYWORDS: &[(&str, &str)] = &[
    ("SERVICE", "SERVICE (federated query)"),
    ("GRAPH", "GRAPH (named graph patterns)"),
    ("FROM", "FROM (dataset clauses)"),
    ("MINUS", "MINUS"),
    ("BIND", "BIND"),
    ("VALUES", "VALUES"),
    ("HAVING", "HAVING"),
    ("EXISTS", "EXISTS"),
    ("DESCRIBE", "DESCRIBE queries"),
    ("INSERT", "SPARQL Update (INSERT)"),
    ("DELETE", "SPARQL Update (DELETE)"),
    ("LOAD", "SPARQL Update (LOAD)"),
    ("CLEAR", "SPARQL Update (CLEAR)"),
    ("DROP", "SPARQL Update (DROP)"),
    ("CREATE", "SPARQL Update (CREATE)"),
    ("COPY", "SPARQL Update (COPY)"),
    ("MOVE", "SPARQL Update (MOVE)"),
    ("ADD", "SPARQL Update (ADD)"),
    ("WITH", "SPARQL Update (WITH)"),
    ("SUM", "aggregate SUM"),
    ("AVG", "aggregate AVG"),
    ("MIN", "aggregate MIN"),
    ("MAX", "aggregate MAX"),
    ("SAMPLE", "aggregate SAMPLE"),
    ("GROUP_CONCAT", "aggregate GROUP_CONCAT"),
];

fn unsupported_keyword(word: &str) -> Option<&'static str> {
    UNSUPPORTED_KEYWORDS
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(word))
        .map(|(_, f)| *f)
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let mut p = Parser {
        lexer: Lexer::new(text, Mode::Sparql),
        peeked: None,
        last_end: (1, 1),
        prefixes: HashMap::new(),
        base: None,
        blank_counter: 0,
        depth: 0,
    };
    let query = p.query()?;
    if let Some(t) = p.peek()? {
        let t = t.clone();
        return Err(p.syntax(&t, format!("unexpected {} after end of query", t.tok.describe())));
    }
    validate(&query)?;
    Ok(query)
}

fn validate(query: &Query) -> Result<(), QueryError> {
    let pattern_vars = query.pattern.pattern_variables();
    let in_pattern = |v: &str| pattern_vars.iter().any(|p| p == v);
    if query.form != QueryForm::Select {
        return Ok(());
    }
    let aggregated = query.has_aggregates();
    match &query.projection {
        Projection::All if aggregated => {
            return Err(QueryError::invalid("SELECT * cannot be combined with GROUP BY"));
        }
        Projection::All => {}
        Projection::Items(items) => {
            let mut seen: Vec<&str> = Vec::new();
            for item in items {
                let name = item.output_name();
                if seen.contains(&name) {
                    return Err(QueryError::invalid(format!("variable ?{name} projected twice")));
                }
                seen.push(name);
                match item {
                    ProjectionItem::Var(v) => {
                        if !in_pattern(v) {
                            return Err(QueryError::invalid(format!(
                                "projected variable ?{v} does not occur in the pattern"
                            )));
                        }
                        if aggregated && !query.group_by.contains(v) {
                            return Err(QueryError::invalid(format!(
                                "?{v} must appear in GROUP BY to be projected with COUNT"
                            )));
                        }
                    }
                    ProjectionItem::Count { argument, alias, .. } => {
                        if let Some(arg) = argument {
                            if !in_pattern(arg) {
                                return Err(QueryError::invalid(format!(
                                    "COUNT argument ?{arg} does not occur in the pattern"
                                )));
                            }
                        }
                        if in_pattern(alias) {
                            return Err(QueryError::invalid(format!(
                                "alias ?{alias} is already used in the pattern"
                            )));
                        }
                    }
                }
            }
        }
    }
    for g in &query.group_by {
        if !in_pattern(g) {
            return Err(QueryError::invalid(format!("GROUP BY variable ?{g} does not occur in the pattern")));
        }
    }
    Ok(())
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<Token>,
    last_end: (usize, usize),
    prefixes: HashMap<String, String>,
    base: Option<String>,
    blank_counter: usize,
    depth: usize,
}

type PResult<T> = Result<T, QueryError>;

impl Parser<'_> {
    fn peek(&mut self) -> PResult<Option<&Token>> {
        if self.peeked.is_none() {
            self.peeked = self.lexer.next_token().map_err(QueryError::from)?;
        }
        Ok(self.peeked.as_ref())
    }

    fn peek_tok(&mut self) -> PResult<Option<Tok>> {
        Ok(self.peek()?.map(|t| t.tok.clone()))
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.peeked.take();
        if let Some(t) = &t {
            self.last_end = (t.end_line, t.end_column);
        }
        t
    }

    fn next(&mut self, what: &str) -> PResult<Token> {
        self.peek()?;
        match self.advance() {
            Some(t) => {
                self.check_supported(&t)?;
                Ok(t)
            }
            None => Err(QueryError::Syntax {
                line: self.last_end.0,
                column: self.last_end.1,
                message: format!("unexpected end of query, expected {what}"),
            }),
        }
    }

    fn check_supported(&self, t: &Token) -> PResult<()> {
        if let Tok::Word(w) = &t.tok {
            if let Some(feature) = unsupported_keyword(w) {
                return Err(QueryError::Unsupported {
                    feature: feature.to_string(),
                    line: t.line,
                    column: t.column,
                });
            }
        }
        Ok(())
    }

    fn syntax(&self, t: &Token, message: impl Into<String>) -> QueryError {
        QueryError::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn unsupported(&self, t: &Token, feature: impl Into<String>) -> QueryError {
        QueryError::Unsupported {
            feature: feature.into(),
            line: t.line,
            column: t.column,
        }
    }

    fn at_word(&mut self, keyword: &str) -> PResult<bool> {
        Ok(matches!(self.peek()?, Some(t) if t.tok.is_word(keyword)))
    }

    fn eat_word(&mut self, keyword: &str) -> PResult<bool> {
        if self.at_word(keyword)? {
            self.advance();
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        let t = self.next(&tok.describe())?;
        if t.tok != tok {
            return Err(self.syntax(&t, format!("expected {}, found {}", tok.describe(), t.tok.describe())));
        }
        Ok(t)
    }

    fn expect_word(&mut self, keyword: &str) -> PResult<()> {
        let t = self.next(keyword)?;
        if !t.tok.is_word(keyword) {
            return Err(self.syntax(&t, format!("expected {keyword}, found {}", t.tok.describe())));
        }
        Ok(())
    }

    fn query(&mut self) -> PResult<Query> {
        self.prologue()?;
        let t = self.next("SELECT, ASK or CONSTRUCT")?;
        match &t.tok {
            Tok::Word(w) if w.eq_ignore_ascii_case("SELECT") => self.select_query(),
            Tok::Word(w) if w.eq_ignore_ascii_case("ASK") => self.ask_query(),
            Tok::Word(w) if w.eq_ignore_ascii_case("CONSTRUCT") => self.construct_query(),
            other => Err(self.syntax(&t, format!("expected SELECT, ASK or CONSTRUCT, found {}", other.describe()))),
        }
    }

    fn prologue(&mut self) -> PResult<()> {
        loop {
            if self.eat_word("PREFIX")? {
                let t = self.next("prefix name")?;
                let Tok::PName { prefix, local } = &t.tok else {
                    return Err(self.syntax(&t, "expected prefix name like 'ex:'"));
                };
                if !local.is_empty() {
                    return Err(self.syntax(&t, "prefix declaration must end with ':'"));
                }
                let prefix = prefix.clone();
                let iri_tok = self.next("namespace IRI")?;
                let Tok::IriRef(iri) = &iri_tok.tok else {
                    return Err(self.syntax(&iri_tok, "expected namespace IRI"));
                };
                let iri = self.resolve(iri, &iri_tok)?;
                self.prefixes.insert(prefix, iri);
            } else if self.eat_word("BASE")? {
                let t = self.next("base IRI")?;
                let Tok::IriRef(iri) = &t.tok else {
                    return Err(self.syntax(&t, "expected base IRI"));
                };
                self.base = Some(self.resolve(iri, &t)?);
            } else {
                return Ok(());
            }
        }
    }

    fn resolve(&self, iri: &str, t: &Token) -> PResult<String> {
        if is_absolute_iri(iri) {
            Ok(iri.to_string())
        } else if let Some(base) = &self.base {
            Ok(resolve(base, iri))
        } else {
            Err(self.syntax(t, format!("relative IRI <{iri}> without BASE")))
        }
    }

    fn iri(&self, t: &Token) -> PResult<String> {
        match &t.tok {
            Tok::IriRef(iri) => self.resolve(iri, t),
            Tok::PName { prefix, local } => match self.prefixes.get(prefix) {
                Some(ns) => Ok(format!("{ns}{local}")),
                None => Err(self.syntax(t, format!("undefined prefix '{prefix}:'"))),
            },
            other => Err(self.syntax(t, format!("expected IRI, found {}", other.describe()))),
        }
    }

    fn select_query(&mut self) -> PResult<Query> {
        let mut modifiers = Modifiers::default();
        if self.eat_word("DISTINCT")? {
            modifiers.distinct = true;
        } else if self.eat_word("REDUCED")? {
            // REDUCED permits but does not require duplicate elimination
        }
        let projection = if self.peek_tok()? == Some(Tok::Op("*")) {
            self.advance();
            Projection::All
        } else {
            let mut items = Vec::new();
            loop {
                match self.peek_tok()? {
                    Some(Tok::Var(v)) => {
                        self.advance();
                        items.push(ProjectionItem::Var(v));
                    }
                    Some(Tok::LParen) => {
                        self.advance();
                        items.push(self.count_item()?);
                    }
                    _ => break,
                }
            }
            if items.is_empty() {
                let t = self.next("projection")?;
                return Err(self.syntax(&t, format!("expected variables or '*', found {}", t.tok.describe())));
            }
            Projection::Items(items)
        };
        self.eat_word("WHERE")?;
        let pattern = self.group_pattern()?;
        let group_by = self.group_by()?;
        self.solution_modifiers(&mut modifiers)?;
        Ok(Query {
            form: QueryForm::Select,
            projection,
            pattern,
            construct_template: Vec::new(),
            group_by,
            modifiers,
        })
    }

    fn count_item(&mut self) -> PResult<ProjectionItem> {
        let t = self.next("COUNT")?;
        if !t.tok.is_word("COUNT") {
            return Err(match &t.tok {
                Tok::Word(_) | Tok::IriRef(_) | Tok::PName { .. } => {
                    self.unsupported(&t, format!("expression {} in SELECT", t.tok.describe()))
                }
                _ => self.syntax(&t, format!("expected COUNT, found {}", t.tok.describe())),
            });
        }
        self.expect(Tok::LParen)?;
        let distinct = self.eat_word("DISTINCT")?;
        let t = self.next("'*' or variable")?;
        let argument = match t.tok {
            Tok::Op("*") => None,
            Tok::Var(v) => Some(v),
            ref other => return Err(self.syntax(&t, format!("COUNT expects '*' or a variable, found {}", other.describe()))),
        };
        self.expect(Tok::RParen)?;
        self.expect_word("AS")?;
        let t = self.next("alias variable")?;
        let Tok::Var(alias) = t.tok else {
            return Err(self.syntax(&t, "expected alias variable after AS"));
        };
        self.expect(Tok::RParen)?;
        Ok(ProjectionItem::Count {
            distinct,
            argument,
            alias,
        })
    }

    fn ask_query(&mut self) -> PResult<Query> {
        self.eat_word("WHERE")?;
        let pattern = self.group_pattern()?;
        let mut modifiers = Modifiers::default();
        self.solution_modifiers(&mut modifiers)?;
        Ok(Query {
            form: QueryForm::Ask,
            projection: Projection::All,
            pattern,
            construct_template: Vec::new(),
            group_by: Vec::new(),
            modifiers,
        })
    }

    fn construct_query(&mut self) -> PResult<Query> {
        let (template, pattern) = if self.at_word("WHERE")? {
            // CONSTRUCT WHERE { bgp }
            self.advance();
            let pattern = self.group_pattern()?;
            let mut template = Vec::new();
            for e in &pattern.elements {
                match e {
                    GroupElement::Triples(ts) => template.extend(ts.iter().cloned()),
                    _ => {
                        return Err(QueryError::invalid(
                            "CONSTRUCT WHERE requires a pattern made only of triples",
                        ))
                    }
                }
            }
            (template, pattern)
        } else {
            self.expect(Tok::LBrace)?;
            let mut template = Vec::new();
            while self.peek_tok()? != Some(Tok::RBrace) {
                if self.peek()?.is_none() {
                    return Err(QueryError::Syntax {
                        line: self.last_end.0,
                        column: self.last_end.1,
                        message: "unterminated CONSTRUCT template".into(),
                    });
                }
                self.triples_same_subject(&mut template)?;
                if self.peek_tok()? == Some(Tok::Dot) {
                    self.advance();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
            self.eat_word("WHERE")?;
            (template, self.group_pattern()?)
        };
        let mut modifiers = Modifiers::default();
        self.solution_modifiers(&mut modifiers)?;
        Ok(Query {
            form: QueryForm::Construct,
            projection: Projection::All,
            pattern,
            construct_template: template,
            group_by: Vec::new(),
            modifiers,
        })
    }

    fn group_by(&mut self) -> PResult<Vec<String>> {
        let mut vars = Vec::new();
        if self.eat_word("GROUP")? {
            self.expect_word("BY")?;
            while let Some(Tok::Var(v)) = self.peek_tok()? {
                self.advance();
                vars.push(v);
            }
            if vars.is_empty() {
                let t = self.next("GROUP BY variable")?;
                return Err(self.syntax(&t, "GROUP BY expects one or more variables"));
            }
        }
        Ok(vars)
    }

    fn solution_modifiers(&mut self, modifiers: &mut Modifiers) -> PResult<()> {
        if self.eat_word("ORDER")? {
            self.expect_word("BY")?;
            loop {
                let descending;
                let expression;
                if self.at_word("ASC")? || self.at_word("DESC")? {
                    descending = self.at_word("DESC")?;
                    self.advance();
                    self.expect(Tok::LParen)?;
                    expression = self.expression()?;
                    self.expect(Tok::RParen)?;
                } else {
                    match self.peek_tok()? {
                        Some(Tok::Var(v)) => {
                            self.advance();
                            descending = false;
                            expression = Expression::Var(v);
                        }
                        Some(Tok::LParen) => {
                            self.advance();
                            descending = false;
                            expression = self.expression()?;
                            self.expect(Tok::RParen)?;
                        }
                        _ => break,
                    }
                }
                modifiers.order_by.push(OrderCondition {
                    expression,
                    descending,
                });
            }
            if modifiers.order_by.is_empty() {
                let t = self.next("order condition")?;
                return Err(self.syntax(&t, "ORDER BY expects at least one condition"));
            }
        }
        loop {
            if self.eat_word("LIMIT")? {
                modifiers.limit = Some(self.non_negative()?);
            } else if self.eat_word("OFFSET")? {
                modifiers.offset = Some(self.non_negative()?);
            } else {
                return Ok(());
            }
        }
    }

    fn non_negative(&mut self) -> PResult<usize> {
        let t = self.next("integer")?;
        match &t.tok {
            Tok::Integer(n) => n
                .parse::<usize>()
                .map_err(|_| self.syntax(&t, format!("invalid non-negative integer {n}"))),
            other => Err(self.syntax(&t, format!("expected non-negative integer, found {}", other.describe()))),
        }
    }

    fn group_pattern(&mut self) -> PResult<GroupPattern> {
        let open = self.expect(Tok::LBrace)?;
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.syntax(&open, format!("group nesting deeper than {MAX_DEPTH} levels")));
        }
        if self.at_word("SELECT")? {
            let t = self.advance().unwrap();
            return Err(self.unsupported(&t, "subqueries"));
        }
        let mut elements: Vec<GroupElement> = Vec::new();
        loop {
            let Some(tok) = self.peek_tok()? else {
                return Err(QueryError::Syntax {
                    line: self.last_end.0,
                    column: self.last_end.1,
                    message: "unterminated group, expected '}'".into(),
                });
            };
            match tok {
                Tok::RBrace => {
                    self.advance();
                    break;
                }
                Tok::Dot => {
                    self.advance();
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("OPTIONAL") => {
                    self.advance();
                    let g = self.group_pattern()?;
                    elements.push(GroupElement::Optional(g));
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("FILTER") => {
                    self.advance();
                    let e = self.constraint()?;
                    elements.push(GroupElement::Filter(e));
                }
                Tok::LBrace => {
                    let first = self.group_pattern()?;
                    let mut alternatives = vec![first];
                    while self.eat_word("UNION")? {
                        alternatives.push(self.group_pattern()?);
                    }
                    if alternatives.len() == 1 {
                        elements.push(GroupElement::Group(alternatives.pop().unwrap()));
                    } else {
                        elements.push(GroupElement::Union(alternatives));
                    }
                }
                Tok::Word(ref w) => {
                    let t = self.advance().unwrap();
                    self.check_supported(&t)?;
                    if w == "a" || w == "true" || w == "false" {
                        return Err(self.syntax(&t, format!("unexpected {w} at start of triple pattern")));
                    }
                    return Err(self.syntax(&t, format!("unexpected keyword {w}")));
                }
                _ => {
                    let mut triples = Vec::new();
                    self.triples_same_subject(&mut triples)?;
                    match elements.last_mut() {
                        Some(GroupElement::Triples(existing)) => existing.extend(triples),
                        _ => elements.push(GroupElement::Triples(triples)),
                    }
                    match self.peek_tok()? {
                        Some(Tok::Dot) => {
                            self.advance();
                        }
                        Some(Tok::RBrace) => {}
                        Some(Tok::Word(_)) | Some(Tok::LBrace) => {}
                        Some(_) => {
                            let t = self.next("'.'")?;
                            return Err(self.syntax(&t, format!("expected '.' or '}}', found {}", t.tok.describe())));
                        }
                        None => {}
                    }
                }
            }
        }
        self.depth -= 1;
        Ok(GroupPattern { elements })
    }

    fn fresh_hidden_var(&mut self) -> VarOrTerm {
        let v = format!("_:anon{}", self.blank_counter);
        self.blank_counter += 1;
        VarOrTerm::Var(v)
    }

    fn triples_same_subject(&mut self, out: &mut Vec<PatternTriple>) -> PResult<()> {
        let t = self.next("subject")?;
        let subject = match &t.tok {
            Tok::LBracket => {
                let node = self.blank_property_list(&t, out)?;
                if matches!(self.peek_tok()?, Some(Tok::Dot) | Some(Tok::RBrace) | None) {
                    return Ok(());
                }
                node
            }
            _ => self.var_or_term(&t, out)?,
        };
        if let VarOrTerm::Term(Term::Literal(_)) = subject {
            return Err(self.syntax(&t, "a literal cannot be a subject"));
        }
        self.property_list(&subject, out)
    }

    fn property_list(&mut self, subject: &VarOrTerm, out: &mut Vec<PatternTriple>) -> PResult<()> {
        loop {
            let t = self.next("predicate")?;
            let predicate = match &t.tok {
                Tok::Word(w) if w == "a" => VarOrTerm::Term(Term::iri(rdf::TYPE)),
                Tok::Var(v) => VarOrTerm::Var(v.clone()),
                Tok::IriRef(_) | Tok::PName { .. } => VarOrTerm::Term(Term::Iri(self.iri(&t)?)),
                Tok::Op("^") | Tok::Carets => return Err(self.unsupported(&t, "property paths")),
                Tok::LParen => return Err(self.unsupported(&t, "property paths")),
                other => return Err(self.syntax(&t, format!("expected predicate, found {}", other.describe()))),
            };
            if let Some(Tok::Op(op @ ("/" | "|" | "*" | "+"))) = self.peek_tok()? {
                let t = self.advance().unwrap();
                return Err(self.unsupported(&t, format!("property paths ('{op}')")));
            }
            if let Some(Tok::Var(_)) = self.peek_tok()? {
                // `?` directly after an IRI predicate would lex as a variable; a
                // path modifier `p?` always touches the IRI.
                let next = self.peek()?.unwrap().clone();
                if matches!(predicate, VarOrTerm::Term(_)) && next.line == self.last_end.0 && next.column == self.last_end.1 {
                    return Err(self.unsupported(&next, "property paths ('?')"));
                }
            }
            loop {
                let ot = self.next("object")?;
                let object = match &ot.tok {
                    Tok::LBracket => self.blank_property_list(&ot, out)?,
                    _ => self.var_or_term(&ot, out)?,
                };
                out.push(PatternTriple {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.peek_tok()? == Some(Tok::Comma) {
                    self.advance();
                } else {
                    break;
                }
            }
            if self.peek_tok()? != Some(Tok::Semi) {
                return Ok(());
            }
            while self.peek_tok()? == Some(Tok::Semi) {
                self.advance();
            }
            if matches!(
                self.peek_tok()?,
                Some(Tok::Dot) | Some(Tok::RBrace) | Some(Tok::RBracket) | None
            ) {
                return Ok(());
            }
        }
    }

    fn blank_property_list(&mut self, open: &Token, out: &mut Vec<PatternTriple>) -> PResult<VarOrTerm> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.syntax(open, "blank node nesting too deep"));
        }
        let node = self.fresh_hidden_var();
        if self.peek_tok()? != Some(Tok::RBracket) {
            self.property_list(&node, out)?;
        }
        self.expect(Tok::RBracket)?;
        self.depth -= 1;
        Ok(node)
    }

    fn var_or_term(&mut self, t: &Token, _out: &mut [PatternTriple]) -> PResult<VarOrTerm> {
        Ok(match &t.tok {
            Tok::Var(v) => VarOrTerm::Var(v.clone()),
            Tok::Blank(label) => VarOrTerm::Var(format!("_:{label}")),
            Tok::LParen => return Err(self.unsupported(t, "RDF collections in query patterns")),
            Tok::Op("-") | Tok::Op("+") => {
                let negative = t.tok == Tok::Op("-");
                let n = self.next("number")?;
                VarOrTerm::Term(self.numeric(&n, negative)?)
            }
            _ => VarOrTerm::Term(self.term(t)?),
        })
    }

    fn numeric(&self, t: &Token, negative: bool) -> PResult<Term> {
        let sign = if negative { "-" } else { "" };
        match &t.tok {
            Tok::Integer(n) => Ok(Term::typed(format!("{sign}{n}"), xsd::INTEGER)),
            Tok::Decimal(n) => Ok(Term::typed(format!("{sign}{n}"), xsd::DECIMAL)),
            Tok::Double(n) => Ok(Term::typed(format!("{sign}{n}"), xsd::DOUBLE)),
            other => Err(self.syntax(t, format!("expected number, found {}", other.describe()))),
        }
    }

    /// IRIs, literals, numbers and booleans.
    fn term(&mut self, t: &Token) -> PResult<Term> {
        match &t.tok {
            Tok::IriRef(_) | Tok::PName { .. } => Ok(Term::Iri(self.iri(t)?)),
            Tok::Str(s) => {
                let s = s.clone();
                match self.peek_tok()? {
                    Some(Tok::LangTag(lang)) => {
                        self.advance();
                        Ok(Term::lang(s, lang))
                    }
                    Some(Tok::Carets) => {
                        self.advance();
                        let dt = self.next("datatype IRI")?;
                        Ok(Term::typed(s, self.iri(&dt)?))
                    }
                    _ => Ok(Term::string(s)),
                }
            }
            Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_) => self.numeric(t, false),
            Tok::Word(w) if w == "true" || w == "false" => Ok(Term::typed(w.clone(), xsd::BOOLEAN)),
            other => Err(self.syntax(t, format!("expected term, found {}", other.describe()))),
        }
    }

    fn constraint(&mut self) -> PResult<Expression> {
        match self.peek_tok()? {
            Some(Tok::LParen) => {
                self.advance();
                let e = self.expression()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Word(_)) => {
                let t = self.next("built-in call")?;
                self.builtin_call(&t)
            }
            _ => {
                let t = self.next("constraint")?;
                Err(self.syntax(&t, format!("expected '(' or built-in call after FILTER, found {}", t.tok.describe())))
            }
        }
    }

    fn expression(&mut self) -> PResult<Expression> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let t = self.next("expression")?;
            return Err(self.syntax(&t, "expression nesting too deep"));
        }
        let mut left = self.and_expression()?;
        while self.peek_tok()? == Some(Tok::Op("||")) {
            self.advance();
            let right = self.and_expression()?;
            left = Expression::Or(Box::new(left), Box::new(right));
        }
        self.depth -= 1;
        Ok(left)
    }

    fn and_expression(&mut self) -> PResult<Expression> {
        let mut left = self.relational()?;
        while self.peek_tok()? == Some(Tok::Op("&&")) {
            self.advance();
            let right = self.relational()?;
            left = Expression::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn relational(&mut self) -> PResult<Expression> {
        let left = self.additive()?;
        let op = match self.peek_tok()? {
            Some(Tok::Op("=")) => CompareOp::Eq,
            Some(Tok::Op("!=")) => CompareOp::Ne,
            Some(Tok::Op("<")) => CompareOp::Lt,
            Some(Tok::Op("<=")) => CompareOp::Le,
            Some(Tok::Op(">")) => CompareOp::Gt,
            Some(Tok::Op(">=")) => CompareOp::Ge,
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("IN") => {
                self.advance();
                let list = self.expression_list()?;
                return Ok(Expression::In {
                    needle: Box::new(left),
                    list,
                    negated: false,
                });
            }
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("NOT") => {
                self.advance();
                let t = self.next("IN")?;
                if !t.tok.is_word("IN") {
                    return Err(self.syntax(&t, "expected IN after NOT"));
                }
                let list = self.expression_list()?;
                return Ok(Expression::In {
                    needle: Box::new(left),
                    list,
                    negated: true,
                });
            }
            _ => return Ok(left),
        };
        self.advance();
        let right = self.additive()?;
        Ok(Expression::Compare(op, Box::new(left), Box::new(right)))
    }

    fn expression_list(&mut self) -> PResult<Vec<Expression>> {
        self.expect(Tok::LParen)?;
        let mut list = Vec::new();
        if self.peek_tok()? == Some(Tok::RParen) {
            self.advance();
            return Ok(list);
        }
        loop {
            list.push(self.expression()?);
            let t = self.next("',' or ')'")?;
            match t.tok {
                Tok::Comma => {}
                Tok::RParen => return Ok(list),
                ref other => return Err(self.syntax(&t, format!("expected ',' or ')', found {}", other.describe()))),
            }
        }
    }

    fn additive(&mut self) -> PResult<Expression> {
        let e = self.unary()?;
        if let Some(Tok::Op(op @ ("+" | "-" | "*" | "/"))) = self.peek_tok()? {
            let t = self.advance().unwrap();
            return Err(self.unsupported(&t, format!("arithmetic ('{op}')")));
        }
        // a signed number directly after an operand is binary arithmetic too
        if let Some(Tok::Integer(n) | Tok::Decimal(n) | Tok::Double(n)) = self.peek_tok()? {
            if n.starts_with('+') || n.starts_with('-') {
                let t = self.advance().unwrap();
                return Err(self.unsupported(&t, "arithmetic"));
            }
        }
        Ok(e)
    }

    fn unary(&mut self) -> PResult<Expression> {
        match self.peek_tok()? {
            Some(Tok::Op("!")) => {
                self.advance();
                Ok(Expression::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Op(sign @ ("-" | "+"))) => {
                self.advance();
                let t = self.next("number")?;
                match t.tok {
                    Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_) => {
                        Ok(Expression::Const(self.numeric(&t, sign == "-")?))
                    }
                    _ => Err(self.unsupported(&t, "arithmetic (unary minus on non-constants)")),
                }
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> PResult<Expression> {
        let t = self.next("expression")?;
        match &t.tok {
            Tok::LParen => {
                let e = self.expression()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Var(v) => Ok(Expression::Var(v.clone())),
            Tok::Word(w) if w == "true" || w == "false" => Ok(Expression::Const(self.term(&t)?)),
            Tok::Word(_) => self.builtin_call(&t),
            Tok::IriRef(_) | Tok::PName { .. } => {
                let iri = self.iri(&t)?;
                if self.peek_tok()? == Some(Tok::LParen) {
                    return Err(self.unsupported(&t, format!("function <{iri}>")));
                }
                Ok(Expression::Const(Term::Iri(iri)))
            }
            _ => Ok(Expression::Const(self.term(&t)?)),
        }
    }

    fn arguments(&mut self, n: usize) -> PResult<Vec<Expression>> {
        let open = self.expect(Tok::LParen)?;
        let args = if self.peek_tok()? == Some(Tok::RParen) {
            self.advance();
            Vec::new()
        } else {
            let mut args = vec![self.expression()?];
            loop {
                let t = self.next("',' or ')'")?;
                match t.tok {
                    Tok::Comma => args.push(self.expression()?),
                    Tok::RParen => break,
                    ref other => return Err(self.syntax(&t, format!("expected ',' or ')', found {}", other.describe()))),
                }
            }
            args
        };
        if args.len() != n {
            return Err(self.syntax(&open, format!("expected {n} argument(s), found {}", args.len())));
        }
        Ok(args)
    }

    fn builtin_call(&mut self, t: &Token) -> PResult<Expression> {
        let Tok::Word(name) = &t.tok else {
            return Err(self.syntax(t, "expected built-in call"));
        };
        let upper = name.to_ascii_uppercase();
        let one = |p: &mut Self| -> PResult<Box<Expression>> {
            Ok(Box::new(p.arguments(1)?.pop().unwrap()))
        };
        match upper.as_str() {
            "BOUND" => {
                self.expect(Tok::LParen)?;
                let v = self.next("variable")?;
                let Tok::Var(name) = v.tok else {
                    return Err(self.syntax(&v, "BOUND expects a variable"));
                };
                self.expect(Tok::RParen)?;
                Ok(Expression::Bound(name))
            }
            "REGEX" => {
                self.expect(Tok::LParen)?;
                let text = self.expression()?;
                self.expect(Tok::Comma)?;
                let pattern = self.expression()?;
                let flags = if self.peek_tok()? == Some(Tok::Comma) {
                    self.advance();
                    Some(Box::new(self.expression()?))
                } else {
                    None
                };
                self.expect(Tok::RParen)?;
                Ok(Expression::Regex {
                    text: Box::new(text),
                    pattern: Box::new(pattern),
                    flags,
                })
            }
            "STR" => Ok(Expression::Str(one(self)?)),
            "LANG" => Ok(Expression::Lang(one(self)?)),
            "DATATYPE" => Ok(Expression::Datatype(one(self)?)),
            "ISIRI" | "ISURI" => Ok(Expression::IsIri(one(self)?)),
            "ISBLANK" => Ok(Expression::IsBlank(one(self)?)),
            "ISLITERAL" => Ok(Expression::IsLiteral(one(self)?)),
            "SAMETERM" => {
                let mut args = self.arguments(2)?;
                let b = args.pop().unwrap();
                let a = args.pop().unwrap();
                Ok(Expression::SameTerm(Box::new(a), Box::new(b)))
            }
            "NOT" if self.at_word("EXISTS")? => Err(self.unsupported(t, "NOT EXISTS")),
            "COUNT" => Err(self.unsupported(t, "COUNT outside the SELECT clause")),
            _ => {
                if let Some(feature) = unsupported_keyword(name) {
                    return Err(self.unsupported(t, feature));
                }
                Err(self.unsupported(t, format!("function {name}")))
            }
        }
    }
}
