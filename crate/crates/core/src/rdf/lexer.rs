//! Tokenizer shared by the Turtle, N-Triples/N-Quads and SPARQL parsers.
//!
//! Positions are 1-based line/column pairs counted in characters.

use super::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    IriRef(String),
    PName { prefix: String, local: String },
    Blank(String),
    Str(String),
    LangTag(String),
    Integer(String),
    Decimal(String),
    Double(String),
    Var(String),
    Word(String),
    AtPrefix,
    AtBase,
    Dot,
    Semi,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Carets,
    Op(&'static str),
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::IriRef(i) => format!("<{i}>"),
            Tok::PName { prefix, local } => format!("{prefix}:{local}"),
            Tok::Blank(b) => format!("_:{b}"),
            Tok::Str(_) => "string literal".into(),
            Tok::LangTag(l) => format!("@{l}"),
            Tok::Integer(n) | Tok::Decimal(n) | Tok::Double(n) => n.clone(),
            Tok::Var(v) => format!("?{v}"),
            Tok::Word(w) => w.clone(),
            Tok::AtPrefix => "@prefix".into(),
            Tok::AtBase => "@base".into(),
            Tok::Dot => "'.'".into(),
            Tok::Semi => "';'".into(),
            Tok::Comma => "','".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Carets => "'^^'".into(),
            Tok::Op(o) => format!("'{o}'"),
        }
    }

    pub(crate) fn is_word(&self, keyword: &str) -> bool {
        matches!(self, Tok::Word(w) if w.eq_ignore_ascii_case(keyword))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
    pub end_line: usize,
    pub end_column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    Turtle,
    Sparql,
}

pub(crate) struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
    mode: Mode,
}

fn is_pn_chars_base(c: char) -> bool {
    c.is_ascii_alphabetic()
        || matches!(c as u32,
            0xC0..=0xD6 | 0xD8..=0xF6 | 0xF8..=0x2FF | 0x370..=0x37D | 0x37F..=0x1FFF
            | 0x200C..=0x200D | 0x2070..=0x218F | 0x2C00..=0x2FEF | 0x3001..=0xD7FF
            | 0xF900..=0xFDCF | 0xFDF0..=0xFFFD | 0x10000..=0xEFFFF)
}

fn is_pn_chars_u(c: char) -> bool {
    is_pn_chars_base(c) || c == '_'
}

fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c)
        || c == '-'
        || c.is_ascii_digit()
        || c as u32 == 0xB7
        || matches!(c as u32, 0x300..=0x36F | 0x203F..=0x2040)
}

fn is_iri_char(c: char) -> bool {
    !matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') && (c as u32) > 0x20
}

impl<'a> Lexer<'a> {
    pub(crate) fn new(src: &'a str, mode: Mode) -> Lexer<'a> {
        let src = src.strip_prefix('\u{feff}').unwrap_or(src);
        Lexer {
            src,
            pos: 0,
            line: 1,
            column: 1,
            mode,
        }
    }

    pub(crate) fn line(&self) -> usize {
        self.line
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.line, self.column, message)
    }

    fn error_at(&self, line: usize, column: usize, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(line, column, message)
    }

    /// Skips to the start of the next line; used for error recovery.
    pub(crate) fn skip_line(&mut self) {
        while let Some(c) = self.bump() {
            if c == '\n' {
                break;
            }
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    /// Returns the next token, `Ok(None)` at end of input.
    pub(crate) fn next_token(&mut self) -> Result<Option<Token>, SyntaxError> {
        self.skip_ws();
        let (line, column) = (self.line, self.column);
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let tok = match c {
            '<' => self.lex_angle()?,
            '"' | '\'' => Tok::Str(self.lex_string()?),
            '_' if self.peek_at(1) == Some(':') => self.lex_blank()?,
            '@' => self.lex_at()?,
            '.' if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => self.lex_number()?,
            '0'..='9' => self.lex_number()?,
            '+' | '-'
                if self.mode == Mode::Turtle
                    && self
                        .peek_at(1)
                        .is_some_and(|c| c.is_ascii_digit() || c == '.') =>
            {
                self.lex_number()?
            }
            '?' | '$' if self.mode == Mode::Sparql => self.lex_var()?,
            '^' => {
                self.bump();
                if self.peek() == Some('^') {
                    self.bump();
                    Tok::Carets
                } else {
                    return Err(self.error_at(line, column, "expected '^^'"));
                }
            }
            '.' => self.single(Tok::Dot),
            ';' => self.single(Tok::Semi),
            ',' => self.single(Tok::Comma),
            '[' => self.single(Tok::LBracket),
            ']' => self.single(Tok::RBracket),
            '(' => self.single(Tok::LParen),
            ')' => self.single(Tok::RParen),
            '{' if self.mode == Mode::Sparql => self.single(Tok::LBrace),
            '}' if self.mode == Mode::Sparql => self.single(Tok::RBrace),
            '=' | '!' | '>' | '&' | '|' | '+' | '-' | '*' | '/' if self.mode == Mode::Sparql => {
                self.lex_op()?
            }
            c if is_pn_chars_base(c) || c == ':' || c == '_' => self.lex_word()?,
            c => {
                self.bump();
                return Err(self.error_at(line, column, format!("unexpected character {c:?}")));
            }
        };
        Ok(Some(Token {
            tok,
            line,
            column,
            end_line: self.line,
            end_column: self.column,
        }))
    }

    fn single(&mut self, tok: Tok) -> Tok {
        self.bump();
        tok
    }

    fn lex_op(&mut self) -> Result<Tok, SyntaxError> {
        let (line, column) = (self.line, self.column);
        let c = self.bump().unwrap();
        let next = self.peek();
        let op = match (c, next) {
            ('=', _) => "=",
            ('!', Some('=')) => {
                self.bump();
                "!="
            }
            ('!', _) => "!",
            ('>', Some('=')) => {
                self.bump();
                ">="
            }
            ('>', _) => ">",
            ('&', Some('&')) => {
                self.bump();
                "&&"
            }
            ('|', Some('|')) => {
                self.bump();
                "||"
            }
            ('+', _) => "+",
            ('-', _) => "-",
            ('*', _) => "*",
            ('/', _) => "/",
            _ => return Err(self.error_at(line, column, format!("unexpected character {c:?}"))),
        };
        Ok(Tok::Op(op))
    }

    fn lex_angle(&mut self) -> Result<Tok, SyntaxError> {
        let (line, column) = (self.line, self.column);
        if self.mode == Mode::Sparql {
            // An IRI reference only if a closing '>' follows without
            // characters that cannot occur in an IRI.
            let rest = &self.src[self.pos + 1..];
            let mut is_iri = false;
            let mut escaped = false;
            for c in rest.chars() {
                if escaped {
                    escaped = false;
                    continue;
                }
                if c == '>' {
                    is_iri = true;
                    break;
                }
                if c == '\\' {
                    escaped = true;
                    continue;
                }
                if !is_iri_char(c) {
                    break;
                }
            }
            if !is_iri {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    return Ok(Tok::Op("<="));
                }
                return Ok(Tok::Op("<"));
            }
        }
        self.bump();
        let mut iri = String::new();
        loop {
            match self.peek() {
                Some(c) if c != '>' && c != '\\' && !is_iri_char(c) => {
                    return Err(self.error(format!("character {c:?} not allowed in IRI")));
                }
                _ => {}
            }
            match self.bump() {
                None => return Err(self.error_at(line, column, "unterminated IRI")),
                Some('>') => break,
                Some('\\') => {
                    let c = self.lex_unicode_escape()?;
                    if !is_iri_char(c) {
                        return Err(self.error(format!("escaped character {c:?} not allowed in IRI")));
                    }
                    iri.push(c);
                }
                Some(c) if is_iri_char(c) => iri.push(c),
                Some(c) => {
                    return Err(self.error(format!("character {c:?} not allowed in IRI")));
                }
            }
        }
        Ok(Tok::IriRef(iri))
    }

    fn lex_unicode_escape(&mut self) -> Result<char, SyntaxError> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid escape sequence")),
        };
        let mut value = 0u32;
        for _ in 0..len {
            let digit = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.error("invalid hexadecimal escape"))?;
            value = value * 16 + digit;
        }
        char::from_u32(value).ok_or_else(|| self.error("escape is not a valid code point"))
    }

    fn lex_string(&mut self) -> Result<String, SyntaxError> {
        let (line, column) = (self.line, self.column);
        let quote = self.bump().unwrap();
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        }
        let mut out = String::new();
        loop {
            if !long && matches!(self.peek(), Some('\n' | '\r')) {
                return Err(self.error_at(line, column, "unterminated string literal"));
            }
            let Some(c) = self.bump() else {
                return Err(self.error_at(line, column, "unterminated string literal"));
            };
            if c == quote {
                if !long {
                    break;
                }
                let mut run = 0;
                while self.peek_at(run) == Some(quote) {
                    run += 1;
                }
                if run >= 2 {
                    // in a run of quotes the last three close the string
                    for _ in 0..run - 2 {
                        out.push(quote);
                    }
                    for _ in 0..run {
                        self.bump();
                    }
                    break;
                }
                out.push(c);
            } else if c == '\\' {
                let escaped = match self.peek() {
                    Some('t') => '\t',
                    Some('b') => '\u{8}',
                    Some('n') => '\n',
                    Some('r') => '\r',
                    Some('f') => '\u{c}',
                    Some('"') => '"',
                    Some('\'') => '\'',
                    Some('\\') => '\\',
                    Some('u') | Some('U') => {
                        out.push(self.lex_unicode_escape()?);
                        continue;
                    }
                    _ => return Err(self.error("invalid escape sequence in string")),
                };
                self.bump();
                out.push(escaped);
            } else if !long && (c == '\n' || c == '\r') {
                return Err(self.error_at(line, column, "unterminated string literal"));
            } else {
                out.push(c);
            }
        }
        Ok(out)
    }

    fn lex_blank(&mut self) -> Result<Tok, SyntaxError> {
        self.bump();
        self.bump();
        let mut label = String::new();
        match self.peek() {
            Some(c) if is_pn_chars_u(c) || c.is_ascii_digit() => {
                label.push(c);
                self.bump();
            }
            _ => return Err(self.error("invalid blank node label")),
        }
        while let Some(c) = self.peek() {
            if is_pn_chars(c) {
                label.push(c);
                self.bump();
            } else if c == '.' && self.peek_at(1).is_some_and(|n| is_pn_chars(n) || n == '.') {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        // a trailing run of dots belongs to the statement, not the label
        while label.ends_with('.') {
            label.pop();
        }
        Ok(Tok::Blank(label))
    }

    fn lex_at(&mut self) -> Result<Tok, SyntaxError> {
        let (line, column) = (self.line, self.column);
        self.bump();
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphabetic() {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if word.is_empty() {
            return Err(self.error_at(line, column, "expected language tag or directive after '@'"));
        }
        if self.mode == Mode::Turtle && self.peek() != Some('-') {
            if word == "prefix" {
                return Ok(Tok::AtPrefix);
            }
            if word == "base" {
                return Ok(Tok::AtBase);
            }
        }
        while self.peek() == Some('-') {
            let mut sub = String::from("-");
            self.bump();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() {
                    sub.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            if sub.len() == 1 {
                return Err(self.error("malformed language tag"));
            }
            word.push_str(&sub);
        }
        Ok(Tok::LangTag(word))
    }

    fn lex_number(&mut self) -> Result<Tok, SyntaxError> {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        let mut int_digits = 0;
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.bump();
            int_digits += 1;
        }
        let mut frac_digits = 0;
        let mut has_dot = false;
        if self.peek() == Some('.') {
            let after = self.peek_at(1);
            let exp_follows = matches!(after, Some('e' | 'E')) && int_digits > 0;
            if after.is_some_and(|c| c.is_ascii_digit()) || exp_follows {
                has_dot = true;
                s.push('.');
                self.bump();
                while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                    s.push(c);
                    self.bump();
                    frac_digits += 1;
                }
            }
        }
        if int_digits == 0 && frac_digits == 0 {
            return Err(self.error("malformed number"));
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            s.push(e);
            self.bump();
            if let Some(c @ ('+' | '-')) = self.peek() {
                s.push(c);
                self.bump();
            }
            let mut exp_digits = 0;
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                s.push(c);
                self.bump();
                exp_digits += 1;
            }
            if exp_digits == 0 {
                return Err(self.error("malformed exponent"));
            }
            return Ok(Tok::Double(s));
        }
        if has_dot {
            Ok(Tok::Decimal(s))
        } else {
            Ok(Tok::Integer(s))
        }
    }

    fn lex_var(&mut self) -> Result<Tok, SyntaxError> {
        self.bump();
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if is_pn_chars_u(c) || c.is_ascii_digit() || c as u32 == 0xB7 {
                name.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if name.is_empty() {
            return Err(self.error("empty variable name"));
        }
        Ok(Tok::Var(name))
    }

    fn lex_word(&mut self) -> Result<Tok, SyntaxError> {
        let mut prefix = String::new();
        if self.peek() != Some(':') {
            while let Some(c) = self.peek() {
                if is_pn_chars(c) || (c == '.' && self.peek_at(1).is_some_and(|n| is_pn_chars(n) || n == '.' || n == ':')) {
                    prefix.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
        }
        if self.peek() != Some(':') {
            if prefix.ends_with('.') || prefix.is_empty() {
                return Err(self.error(format!("unexpected token {prefix:?}")));
            }
            return Ok(Tok::Word(prefix));
        }
        if prefix.ends_with('.') {
            return Err(self.error("prefix may not end with '.'"));
        }
        self.bump();
        let local = self.lex_local()?;
        Ok(Tok::PName { prefix, local })
    }

    fn lex_local(&mut self) -> Result<String, SyntaxError> {
        let mut local = String::new();
        let mut first = true;
        loop {
            let Some(c) = self.peek() else { break };
            let accepted = if c == '%' {
                let h1 = self.peek_at(1).filter(char::is_ascii_hexdigit);
                let h2 = self.peek_at(2).filter(char::is_ascii_hexdigit);
                match (h1, h2) {
                    (Some(a), Some(b)) => {
                        self.bump();
                        self.bump();
                        self.bump();
                        local.push('%');
                        local.push(a);
                        local.push(b);
                        first = false;
                        continue;
                    }
                    _ => return Err(self.error("malformed percent escape in local name")),
                }
            } else if c == '\\' {
                let Some(e) = self.peek_at(1) else {
                    return Err(self.error("dangling escape in local name"));
                };
                if "_~.-!$&'()*+,;=/?#@%".contains(e) {
                    self.bump();
                    self.bump();
                    local.push(e);
                    first = false;
                    continue;
                }
                return Err(self.error("invalid escape in local name"));
            } else if first {
                is_pn_chars_u(c) || c == ':' || c.is_ascii_digit()
            } else if c == '.' {
                // only inside the name, never as the last character
                let mut n = 1;
                while self.peek_at(n) == Some('.') {
                    n += 1;
                }
                self.peek_at(n)
                    .is_some_and(|d| is_pn_chars(d) || d == ':' || d == '%' || d == '\\')
            } else {
                is_pn_chars(c) || c == ':'
            };
            if !accepted {
                break;
            }
            local.push(c);
            self.bump();
            first = false;
        }
        Ok(local)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str, mode: Mode) -> Vec<Tok> {
        let mut lx = Lexer::new(src, mode);
        let mut out = vec![];
        while let Some(t) = lx.next_token().unwrap() {
            out.push(t.tok);
        }
        out
    }

    #[test]
    fn prefixed_name_trailing_dot() {
        assert_eq!(
            toks("ex:a.", Mode::Turtle),
            vec![
                Tok::PName {
                    prefix: "ex".into(),
                    local: "a".into()
                },
                Tok::Dot
            ]
        );
        assert_eq!(
            toks("ex:a.b .", Mode::Turtle)[0],
            Tok::PName {
                prefix: "ex".into(),
                local: "a.b".into()
            }
        );
    }

    #[test]
    fn numbers_versus_dots() {
        assert_eq!(
            toks("1. 2.5 -3 4e1 .5", Mode::Turtle),
            vec![
                Tok::Integer("1".into()),
                Tok::Dot,
                Tok::Decimal("2.5".into()),
                Tok::Integer("-3".into()),
                Tok::Double("4e1".into()),
                Tok::Decimal(".5".into()),
            ]
        );
    }

    #[test]
    fn strings_and_escapes() {
        assert_eq!(
            toks(r#""a\tb" 'c' """multi
line""" "é""#, Mode::Turtle),
            vec![
                Tok::Str("a\tb".into()),
                Tok::Str("c".into()),
                Tok::Str("multi\nline".into()),
                Tok::Str("é".into()),
            ]
        );
    }

    #[test]
    fn long_string_with_inner_quotes() {
        assert_eq!(toks(r#""""a""b"""""#, Mode::Turtle), vec![Tok::Str("a\"\"b\"".into())]);
    }

    #[test]
    fn sparql_less_than_vs_iri() {
        assert_eq!(
            toks("?x < 3 && <http://a> <= ?y", Mode::Sparql),
            vec![
                Tok::Var("x".into()),
                Tok::Op("<"),
                Tok::Integer("3".into()),
                Tok::Op("&&"),
                Tok::IriRef("http://a".into()),
                Tok::Op("<="),
                Tok::Var("y".into()),
            ]
        );
    }

    #[test]
    fn unterminated_string_reports_start() {
        let mut lx = Lexer::new("\n  \"abc\n", Mode::Turtle);
        let err = lx.next_token().unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
    }

    #[test]
    fn language_tags_and_directives() {
        assert_eq!(
            toks("@prefix @base \"x\"@en-GB", Mode::Turtle),
            vec![
                Tok::AtPrefix,
                Tok::AtBase,
                Tok::Str("x".into()),
                Tok::LangTag("en-GB".into())
            ]
        );
    }
}
