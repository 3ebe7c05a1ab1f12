use std::collections::HashMap;

use super::iri::resolve;
use super::lexer::{Lexer, Mode, Tok, Token};
use super::term::{is_absolute_iri, Term, Triple};
use super::vocab::{rdf, xsd};
use super::{Graph, SyntaxError};

/// Maximum nesting of `[ ... ]` and `( ... )` before the parser gives up.
const MAX_DEPTH: usize = 64;

/// Parses a Turtle document into a graph.
///
/// Blank nodes are relabelled `b0`, `b1`, ... in order of first
/// appearance so labels never collide with generated anonymous nodes.
pub fn parse_turtle(text: &str, base: Option<&str>) -> Result<Graph, SyntaxError> {
    let mut parser = TurtleParser::new(text, base);
    parser.stop_at_first = true;
    parser.run();
    match parser.errors.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(parser.graph),
    }
}

/// Parses as much as possible, skipping malformed statements.
pub fn parse_turtle_lenient(text: &str, base: Option<&str>) -> (Graph, Vec<SyntaxError>) {
    let mut parser = TurtleParser::new(text, base);
    parser.run();
    (parser.graph, parser.errors)
}

struct TurtleParser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<Token>,
    /// End position of the last consumed token.
    last_end: (usize, usize),
    last_line: usize,
    base: Option<String>,
    prefixes: HashMap<String, String>,
    blanks: HashMap<String, String>,
    blank_counter: usize,
    depth: usize,
    pending: Vec<Triple>,
    graph: Graph,
    errors: Vec<SyntaxError>,
    stop_at_first: bool,
    lexer_failed: bool,
}

type PResult<T> = Result<T, SyntaxError>;

impl<'a> TurtleParser<'a> {
    fn new(text: &'a str, base: Option<&str>) -> TurtleParser<'a> {
        TurtleParser {
            lexer: Lexer::new(text, Mode::Turtle),
            peeked: None,
            last_end: (1, 1),
            last_line: 0,
            base: base.map(str::to_string),
            prefixes: HashMap::new(),
            blanks: HashMap::new(),
            blank_counter: 0,
            depth: 0,
            pending: Vec::new(),
            graph: Graph::new(),
            errors: Vec::new(),
            stop_at_first: false,
            lexer_failed: false,
        }
    }

    fn run(&mut self) {
        loop {
            match self.peek() {
                Ok(None) => break,
                Ok(Some(_)) => {}
                Err(e) => {
                    self.fail(e);
                    if self.stop_at_first {
                        return;
                    }
                    self.recover();
                    continue;
                }
            }
            match self.statement() {
                Ok(()) => {
                    for t in self.pending.drain(..) {
                        self.graph.insert(t);
                    }
                }
                Err(e) => {
                    self.pending.clear();
                    self.fail(e);
                    if self.stop_at_first {
                        return;
                    }
                    self.recover();
                }
            }
        }
    }

    fn fail(&mut self, e: SyntaxError) {
        self.errors.push(e);
        self.depth = 0;
    }

    /// Discards input until a plausible statement boundary: a consumed
    /// '.', or a token that starts a new line in column 1.
    fn recover(&mut self) {
        if self.lexer_failed {
            self.lexer_failed = false;
            self.peeked = None;
            self.lexer.skip_line();
            self.last_line = self.lexer.line().saturating_sub(1);
        }
        loop {
            let tok = match self.peek() {
                Ok(Some(t)) => t.clone(),
                Ok(None) => return,
                Err(_) => {
                    self.lexer_failed = false;
                    self.peeked = None;
                    self.lexer.skip_line();
                    self.last_line = self.lexer.line().saturating_sub(1);
                    continue;
                }
            };
            if tok.column == 1 && tok.line > self.last_line {
                return;
            }
            self.advance();
            if tok.tok == Tok::Dot {
                return;
            }
        }
    }

    fn peek(&mut self) -> PResult<Option<&Token>> {
        if self.peeked.is_none() {
            match self.lexer.next_token() {
                Ok(t) => self.peeked = t,
                Err(e) => {
                    self.lexer_failed = true;
                    return Err(e);
                }
            }
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
            self.last_line = t.line;
        }
        t
    }

    fn next(&mut self, what: &str) -> PResult<Token> {
        self.peek()?;
        match self.advance() {
            Some(t) => Ok(t),
            None => Err(self.error_after(format!("unexpected end of input, expected {what}"))),
        }
    }

    /// Error located just after the last consumed token.
    fn error_after(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.last_end.0, self.last_end.1, message)
    }

    fn error_at(&self, t: &Token, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(t.line, t.column, message)
    }

    fn expect_dot(&mut self) -> PResult<()> {
        match self.peek_tok()? {
            Some(Tok::Dot) => {
                self.advance();
                Ok(())
            }
            Some(other) => Err(self.error_after(format!(
                "expected '.' to end the statement, found {}",
                other.describe()
            ))),
            None => Err(self.error_after("expected '.' to end the statement")),
        }
    }

    fn statement(&mut self) -> PResult<()> {
        let tok = self.peek_tok()?.expect("statement called at end of input");
        match tok {
            Tok::AtPrefix => {
                self.advance();
                self.prefix_decl()?;
                self.expect_dot()
            }
            Tok::AtBase => {
                self.advance();
                self.base_decl()?;
                self.expect_dot()
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("prefix") => {
                self.advance();
                self.prefix_decl()
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("base") => {
                self.advance();
                self.base_decl()
            }
            _ => {
                self.triples()?;
                self.expect_dot()
            }
        }
    }

    fn prefix_decl(&mut self) -> PResult<()> {
        let t = self.next("prefix name")?;
        let Tok::PName { prefix, local } = &t.tok else {
            return Err(self.error_at(&t, "expected prefix name like 'ex:'"));
        };
        if !local.is_empty() {
            return Err(self.error_at(&t, "prefix declaration must end with ':'"));
        }
        let prefix = prefix.clone();
        let iri_tok = self.next("namespace IRI")?;
        let Tok::IriRef(iri) = &iri_tok.tok else {
            return Err(self.error_at(&iri_tok, "expected namespace IRI"));
        };
        let iri = self.resolve_iri(iri, &iri_tok)?;
        self.prefixes.insert(prefix, iri);
        Ok(())
    }

    fn base_decl(&mut self) -> PResult<()> {
        let t = self.next("base IRI")?;
        let Tok::IriRef(iri) = &t.tok else {
            return Err(self.error_at(&t, "expected base IRI"));
        };
        let iri = self.resolve_iri(iri, &t)?;
        self.base = Some(iri);
        Ok(())
    }

    fn resolve_iri(&self, iri: &str, t: &Token) -> PResult<String> {
        if is_absolute_iri(iri) {
            return Ok(iri.to_string());
        }
        match &self.base {
            Some(base) => Ok(resolve(base, iri)),
            None => Err(self.error_at(t, format!("relative IRI <{iri}> without a base"))),
        }
    }

    fn fresh_blank(&mut self) -> Term {
        let label = format!("b{}", self.blank_counter);
        self.blank_counter += 1;
        Term::Blank(label)
    }

    fn labelled_blank(&mut self, label: &str) -> Term {
        if let Some(mapped) = self.blanks.get(label) {
            return Term::Blank(mapped.clone());
        }
        let term = self.fresh_blank();
        if let Term::Blank(mapped) = &term {
            self.blanks.insert(label.to_string(), mapped.clone());
        }
        term
    }

    fn enter(&mut self, t: &Token) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error_at(t, format!("nesting deeper than {MAX_DEPTH} levels")));
        }
        Ok(())
    }

    fn triples(&mut self) -> PResult<()> {
        let t = self.next("subject")?;
        match &t.tok {
            Tok::LBracket => {
                let subject = self.blank_property_list(&t)?;
                if !matches!(self.peek_tok()?, Some(Tok::Dot) | None) {
                    self.predicate_object_list(&subject)?;
                }
                Ok(())
            }
            _ => {
                let subject = self.subject(t)?;
                self.predicate_object_list(&subject)
            }
        }
    }

    fn subject(&mut self, t: Token) -> PResult<Term> {
        match &t.tok {
            Tok::IriRef(_) | Tok::PName { .. } => self.iri(&t),
            Tok::Blank(label) => Ok(self.labelled_blank(label)),
            Tok::LParen => self.collection(&t),
            _ => Err(self.error_at(&t, format!("expected subject, found {}", t.tok.describe()))),
        }
    }

    fn iri(&self, t: &Token) -> PResult<Term> {
        match &t.tok {
            Tok::IriRef(iri) => Ok(Term::Iri(self.resolve_iri(iri, t)?)),
            Tok::PName { prefix, local } => match self.prefixes.get(prefix) {
                Some(ns) => Ok(Term::Iri(format!("{ns}{local}"))),
                None => Err(self.error_at(t, format!("undefined prefix '{prefix}:'"))),
            },
            _ => Err(self.error_at(t, format!("expected IRI, found {}", t.tok.describe()))),
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> PResult<()> {
        loop {
            let t = self.next("predicate")?;
            let predicate = match &t.tok {
                Tok::Word(w) if w == "a" => Term::iri(rdf::TYPE),
                Tok::IriRef(_) | Tok::PName { .. } => self.iri(&t)?,
                _ => {
                    return Err(
                        self.error_at(&t, format!("expected predicate, found {}", t.tok.describe()))
                    )
                }
            };
            loop {
                let object = self.object()?;
                self.pending
                    .push(Triple::new_unchecked(subject.clone(), predicate.clone(), object));
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
            if matches!(self.peek_tok()?, Some(Tok::Dot) | Some(Tok::RBracket) | None) {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> PResult<Term> {
        let t = self.next("object")?;
        match &t.tok {
            Tok::IriRef(_) | Tok::PName { .. } => self.iri(&t),
            Tok::Blank(label) => Ok(self.labelled_blank(label)),
            Tok::LBracket => self.blank_property_list(&t),
            Tok::LParen => self.collection(&t),
            Tok::Str(s) => {
                let s = s.clone();
                self.literal_suffix(s)
            }
            Tok::Integer(n) => Ok(Term::typed(n.clone(), xsd::INTEGER)),
            Tok::Decimal(n) => Ok(Term::typed(n.clone(), xsd::DECIMAL)),
            Tok::Double(n) => Ok(Term::typed(n.clone(), xsd::DOUBLE)),
            Tok::Word(w) if w == "true" || w == "false" => Ok(Term::typed(w.clone(), xsd::BOOLEAN)),
            _ => Err(self.error_at(&t, format!("expected object, found {}", t.tok.describe()))),
        }
    }

    fn literal_suffix(&mut self, lexical: String) -> PResult<Term> {
        match self.peek_tok()? {
            Some(Tok::LangTag(lang)) => {
                self.advance();
                Ok(Term::lang(lexical, lang))
            }
            Some(Tok::Carets) => {
                self.advance();
                let t = self.next("datatype IRI")?;
                match self.iri(&t)? {
                    Term::Iri(dt) => Ok(Term::typed(lexical, dt)),
                    _ => unreachable!(),
                }
            }
            _ => Ok(Term::string(lexical)),
        }
    }

    fn blank_property_list(&mut self, open: &Token) -> PResult<Term> {
        self.enter(open)?;
        let node = self.fresh_blank();
        if self.peek_tok()? == Some(Tok::RBracket) {
            self.advance();
            self.depth -= 1;
            return Ok(node);
        }
        self.predicate_object_list(&node)?;
        let t = self.next("']'")?;
        if t.tok != Tok::RBracket {
            return Err(self.error_at(&t, format!("expected ']', found {}", t.tok.describe())));
        }
        self.depth -= 1;
        Ok(node)
    }

    fn collection(&mut self, open: &Token) -> PResult<Term> {
        self.enter(open)?;
        let mut items = Vec::new();
        loop {
            if self.peek_tok()? == Some(Tok::RParen) {
                self.advance();
                break;
            }
            if self.peek()?.is_none() {
                return Err(self.error_after("unterminated collection, expected ')'"));
            }
            items.push(self.object()?);
        }
        self.depth -= 1;
        let mut head = Term::iri(rdf::NIL);
        let nodes: Vec<Term> = items.iter().map(|_| self.fresh_blank()).collect();
        for (i, item) in items.into_iter().enumerate().rev() {
            let node = nodes[i].clone();
            self.pending
                .push(Triple::new_unchecked(node.clone(), Term::iri(rdf::FIRST), item));
            self.pending
                .push(Triple::new_unchecked(node.clone(), Term::iri(rdf::REST), head));
            head = node;
        }
        Ok(head)
    }
}
