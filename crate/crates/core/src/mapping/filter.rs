//! Row filter expressions.
//!
//! Comparisons with a null operand are false. Two operands that both read
//! as numbers compare numerically, anything else compares as text.

use std::cmp::Ordering;

use serde::Serialize;

use super::MappingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Operand {
    Column(String),
    Text(String),
    Number(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FilterExpr {
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
    Not(Box<FilterExpr>),
    Bound(String),
    Compare(Operand, CompareOp, Operand),
}

impl FilterExpr {
    pub fn columns(&self) -> Vec<&str> {
        match self {
            FilterExpr::And(a, b) | FilterExpr::Or(a, b) => {
                let mut v = a.columns();
                v.extend(b.columns());
                v
            }
            FilterExpr::Not(e) => e.columns(),
            FilterExpr::Bound(c) => vec![c.as_str()],
            FilterExpr::Compare(a, _, b) => [a, b]
                .into_iter()
                .filter_map(|o| match o {
                    Operand::Column(c) => Some(c.as_str()),
                    _ => None,
                })
                .collect(),
        }
    }

    pub fn eval<'a>(&self, cell: &impl Fn(&str) -> Option<&'a str>) -> bool {
        match self {
            FilterExpr::And(a, b) => a.eval(cell) && b.eval(cell),
            FilterExpr::Or(a, b) => a.eval(cell) || b.eval(cell),
            FilterExpr::Not(e) => !e.eval(cell),
            FilterExpr::Bound(c) => cell(c).is_some(),
            FilterExpr::Compare(a, op, b) => {
                let value = |o: &Operand| -> Option<String> {
                    match o {
                        Operand::Column(c) => cell(c).map(str::to_string),
                        Operand::Text(t) => Some(t.clone()),
                        Operand::Number(n) => Some(n.to_string()),
                    }
                };
                let (Some(x), Some(y)) = (value(a), value(b)) else {
                    return false;
                };
                let ord = match (x.trim().parse::<f64>(), y.trim().parse::<f64>()) {
                    (Ok(p), Ok(q)) if p.is_finite() && q.is_finite() => p.partial_cmp(&q),
                    _ => Some(x.cmp(&y)),
                };
                let Some(ord) = ord else { return false };
                match op {
                    CompareOp::Eq => ord == Ordering::Equal,
                    CompareOp::Ne => ord != Ordering::Equal,
                    CompareOp::Lt => ord == Ordering::Less,
                    CompareOp::Le => ord != Ordering::Greater,
                    CompareOp::Gt => ord == Ordering::Greater,
                    CompareOp::Ge => ord != Ordering::Less,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Column(String),
    Text(String),
    Number(f64),
    Ident(String),
    Op(CompareOp),
    And,
    Or,
    Not,
    Open,
    Close,
}

fn tokenize(src: &str, line: usize) -> Result<Vec<Tok>, MappingError> {
    let err = |message: String| MappingError::Syntax { line, message };
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            c if c.is_whitespace() => i += 1,
            '{' => {
                let end = chars[i..].iter().position(|&c| c == '}').ok_or_else(|| err("unclosed '{' in filter".into()))?;
                let name: String = chars[i + 1..i + end].iter().collect();
                if name.trim().is_empty() {
                    return Err(err("empty column reference in filter".into()));
                }
                out.push(Tok::Column(name.trim().to_string()));
                i += end + 1;
            }
            '"' => {
                let mut text = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(err("unterminated string in filter".into())),
                        Some('"') => break,
                        Some('\\') => {
                            text.push(*chars.get(i + 1).ok_or_else(|| err("dangling escape".into()))?);
                            i += 2;
                        }
                        Some(&c) => {
                            text.push(c);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push(Tok::Text(text));
            }
            '&' if next == Some('&') => {
                out.push(Tok::And);
                i += 2;
            }
            '|' if next == Some('|') => {
                out.push(Tok::Or);
                i += 2;
            }
            '!' if next == Some('=') => {
                out.push(Tok::Op(CompareOp::Ne));
                i += 2;
            }
            '!' => {
                out.push(Tok::Not);
                i += 1;
            }
            '=' => {
                out.push(Tok::Op(CompareOp::Eq));
                i += if next == Some('=') { 2 } else { 1 };
            }
            '<' | '>' => {
                let op = match (c, next == Some('=')) {
                    ('<', false) => CompareOp::Lt,
                    ('<', true) => CompareOp::Le,
                    ('>', false) => CompareOp::Gt,
                    _ => CompareOp::Ge,
                };
                out.push(Tok::Op(op));
                i += if next == Some('=') { 2 } else { 1 };
            }
            '(' => {
                out.push(Tok::Open);
                i += 1;
            }
            ')' => {
                out.push(Tok::Close);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let start = i;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_digit() || matches!(chars[i], '.' | 'e' | 'E')) {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Tok::Number(s.parse().map_err(|_| err(format!("bad number '{s}'")))?));
            }
            c if c.is_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(err(format!("unexpected '{other}' in filter"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    line: usize,
}

impl Parser {
    fn err(&self, message: impl Into<String>) -> MappingError {
        MappingError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn or(&mut self) -> Result<FilterExpr, MappingError> {
        let mut e = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            e = FilterExpr::Or(Box::new(e), Box::new(self.and()?));
        }
        Ok(e)
    }

    fn and(&mut self) -> Result<FilterExpr, MappingError> {
        let mut e = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            e = FilterExpr::And(Box::new(e), Box::new(self.unary()?));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<FilterExpr, MappingError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(FilterExpr::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let e = self.or()?;
                match self.next() {
                    Some(Tok::Close) => Ok(e),
                    _ => Err(self.err("expected ')' in filter")),
                }
            }
            Some(Tok::Ident(name)) if name.eq_ignore_ascii_case("bound") => {
                self.pos += 1;
                match (self.next(), self.next(), self.next()) {
                    (Some(Tok::Open), Some(Tok::Column(c)), Some(Tok::Close)) => Ok(FilterExpr::Bound(c)),
                    _ => Err(self.err("expected bound({column})")),
                }
            }
            _ => {
                let a = self.operand()?;
                match self.next() {
                    Some(Tok::Op(op)) => Ok(FilterExpr::Compare(a, op, self.operand()?)),
                    _ => Err(self.err("expected a comparison operator in filter")),
                }
            }
        }
    }

    fn operand(&mut self) -> Result<Operand, MappingError> {
        match self.next() {
            Some(Tok::Column(c)) => Ok(Operand::Column(c)),
            Some(Tok::Text(t)) => Ok(Operand::Text(t)),
            Some(Tok::Number(n)) => Ok(Operand::Number(n)),
            _ => Err(self.err("expected {column}, string or number in filter")),
        }
    }
}

pub(crate) fn parse_filter(src: &str, line: usize) -> Result<FilterExpr, MappingError> {
    let mut p = Parser {
        toks: tokenize(src, line)?,
        pos: 0,
        line,
    };
    let e = p.or()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing tokens in filter"));
    }
    Ok(e)
}
