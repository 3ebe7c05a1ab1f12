use std::collections::BTreeMap;

use super::filter::parse_filter;
use super::{MappingError, MappingPlan, MappingRule, Segment, Statement, Template, TermTemplate};
use crate::rdf::is_absolute_iri;
use crate::rdf::vocab::{rdf, well_known_prefixes};

pub(crate) fn parse_template(text: &str, line: usize) -> Result<Template, MappingError> {
    let err = |message: &str| MappingError::MalformedTemplate {
        line,
        message: format!("{message} in '{text}'"),
    };
    let mut segments = Vec::new();
    let mut buf = String::new();
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(e @ ('{' | '}' | '\\')) => buf.push(e),
                _ => return Err(err("bad escape")),
            },
            '{' => {
                let mut name = String::new();
                loop {
                    match chars.next() {
                        None => return Err(err("unclosed '{'")),
                        Some('}') => break,
                        Some('{') => return Err(err("nested '{'")),
                        Some(c) => name.push(c),
                    }
                }
                let name = name.trim();
                if name.is_empty() {
                    return Err(err("empty placeholder"));
                }
                if !buf.is_empty() {
                    segments.push(Segment::Text(std::mem::take(&mut buf)));
                }
                segments.push(Segment::Column(name.to_string()));
            }
            '}' => return Err(err("unmatched '}'")),
            c => buf.push(c),
        }
    }
    if !buf.is_empty() {
        segments.push(Segment::Text(buf));
    }
    Ok(Template { segments })
}

struct Ctx<'a> {
    prefixes: &'a BTreeMap<String, String>,
    line: usize,
}

impl Ctx<'_> {
    fn syntax(&self, message: impl Into<String>) -> MappingError {
        MappingError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn expand(&self, name: &str) -> Result<String, MappingError> {
        let Some((prefix, local)) = name.split_once(':') else {
            return Err(self.syntax(format!("expected <iri> or prefix:name, found '{name}'")));
        };
        let ns = self.prefixes.get(prefix).ok_or_else(|| MappingError::UnknownPrefix {
            line: self.line,
            prefix: prefix.to_string(),
        })?;
        Ok(format!("{ns}{local}"))
    }

    /// A constant IRI written as `<iri>` or `prefix:local`.
    fn constant_iri(&self, text: &str) -> Result<String, MappingError> {
        let iri = match text.strip_prefix('<') {
            Some(rest) => rest
                .strip_suffix('>')
                .ok_or_else(|| self.syntax(format!("unclosed IRI '{text}'")))?
                .to_string(),
            None => self.expand(text)?,
        };
        if iri.contains(['{', '}']) {
            return Err(self.syntax(format!("'{text}' must be a constant IRI")));
        }
        if !is_absolute_iri(&iri) {
            return Err(self.syntax(format!("'{iri}' is not an absolute IRI")));
        }
        Ok(iri)
    }

    /// Parses `^^datatype` or `@lang` after a literal.
    fn literal_suffix(&self, rest: &str) -> Result<(Option<String>, Option<String>), MappingError> {
        let rest = rest.trim();
        if rest.is_empty() {
            Ok((None, None))
        } else if let Some(dt) = rest.strip_prefix("^^") {
            Ok((Some(self.constant_iri(dt)?), None))
        } else if let Some(lang) = rest.strip_prefix('@') {
            let ok = !lang.is_empty() && lang.split('-').all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()));
            if !ok {
                return Err(self.syntax(format!("bad language tag '{lang}'")));
            }
            Ok((None, Some(lang.to_ascii_lowercase())))
        } else {
            Err(self.syntax(format!("unexpected '{rest}' after literal")))
        }
    }

    fn term(&self, text: &str) -> Result<TermTemplate, MappingError> {
        let text = text.trim();
        if let Some(label) = text.strip_prefix("_:") {
            if label.is_empty() || !label.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
                return Err(self.syntax(format!("bad blank node label '{text}'")));
            }
            return Ok(TermTemplate::RowBlankNode { label: label.to_string() });
        }
        if let Some(rest) = text.strip_prefix('"') {
            let mut lexical = String::new();
            let mut chars = rest.char_indices();
            let end = loop {
                match chars.next() {
                    None => return Err(self.syntax("unterminated string")),
                    Some((i, '"')) => break i + 1,
                    Some((_, '\\')) => match chars.next() {
                        Some((_, 'n')) => lexical.push('\n'),
                        Some((_, 't')) => lexical.push('\t'),
                        Some((_, c @ ('"' | '\\'))) => lexical.push(c),
                        _ => return Err(self.syntax("bad escape in string")),
                    },
                    Some((_, c)) => lexical.push(c),
                }
            };
            let (datatype, language) = self.literal_suffix(&rest[end..])?;
            return Ok(TermTemplate::ConstantLiteral {
                lexical,
                datatype,
                language,
            });
        }
        if text.starts_with('{') {
            let end = text
                .find('}')
                .ok_or_else(|| MappingError::MalformedTemplate {
                    line: self.line,
                    message: format!("unclosed '{{' in '{text}'"),
                })?;
            let column = text[1..end].trim();
            if column.is_empty() || column.contains('{') {
                return Err(MappingError::MalformedTemplate {
                    line: self.line,
                    message: format!("bad column reference in '{text}'"),
                });
            }
            let (datatype, language) = self.literal_suffix(&text[end + 1..])?;
            return Ok(TermTemplate::ColumnLiteral {
                column: column.to_string(),
                datatype,
                language,
            });
        }
        let raw = match text.strip_prefix('<') {
            Some(rest) => rest
                .strip_suffix('>')
                .ok_or_else(|| self.syntax(format!("unclosed IRI '{text}'")))?
                .to_string(),
            None => {
                if text.contains(char::is_whitespace) {
                    return Err(self.syntax(format!("unexpected whitespace in '{text}'")));
                }
                self.expand(text)?
            }
        };
        let template = parse_template(&raw, self.line)?;
        if template.is_constant() {
            if !is_absolute_iri(&raw) {
                return Err(self.syntax(format!("'{raw}' is not an absolute IRI")));
            }
            return Ok(TermTemplate::ConstantIri { iri: raw });
        }
        Ok(TermTemplate::IriTemplate { template })
    }
}

#[derive(Default)]
struct Draft {
    name: String,
    line: usize,
    source: Option<String>,
    subject: Option<TermTemplate>,
    filter: Option<super::FilterExpr>,
    statements: Vec<Statement>,
}

fn keyword<'a>(line: &'a str, kw: &str) -> Option<&'a str> {
    let head = line.get(..kw.len())?;
    if !head.eq_ignore_ascii_case(kw) {
        return None;
    }
    let rest = &line[kw.len()..];
    if rest.is_empty() {
        Some("")
    } else if rest.starts_with(char::is_whitespace) {
        Some(rest.trim())
    } else {
        None
    }
}

pub fn compile_mapping(document: &str) -> Result<MappingPlan, MappingError> {
    let mut prefixes: BTreeMap<String, String> =
        well_known_prefixes().into_iter().map(|(p, ns)| (p.to_string(), ns.to_string())).collect();
    let mut rules = Vec::new();
    let mut current: Option<Draft> = None;

    for (i, raw) in document.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ctx = Ctx {
            prefixes: &prefixes,
            line: line_no,
        };
        if let Some(rest) = keyword(line, "PREFIX").or_else(|| keyword(line, "@prefix")) {
            let rest = rest.trim_end_matches('.').trim();
            let (name, iri) = rest
                .split_once(char::is_whitespace)
                .ok_or_else(|| ctx.syntax("expected PREFIX name: <iri>"))?;
            let name = name
                .strip_suffix(':')
                .ok_or_else(|| ctx.syntax(format!("prefix name '{name}' must end with ':'")))?;
            let iri = iri
                .trim()
                .strip_prefix('<')
                .and_then(|s| s.strip_suffix('>'))
                .ok_or_else(|| ctx.syntax("prefix namespace must be written <iri>"))?;
            if !is_absolute_iri(iri) {
                return Err(ctx.syntax(format!("prefix namespace '{iri}' is not absolute")));
            }
            prefixes.insert(name.to_string(), iri.to_string());
            continue;
        }
        if let Some(name) = keyword(line, "RULE") {
            if let Some(open) = &current {
                return Err(ctx.syntax(format!("rule '{}' is not closed with END", open.name)));
            }
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(ctx.syntax("RULE needs a single-word name"));
            }
            if rules.iter().any(|r: &MappingRule| r.name == name) {
                return Err(ctx.syntax(format!("duplicate rule name '{name}'")));
            }
            current = Some(Draft {
                name: name.to_string(),
                line: line_no,
                ..Draft::default()
            });
            continue;
        }
        let Some(draft) = current.as_mut() else {
            return Err(ctx.syntax(format!("'{line}' outside of a RULE block")));
        };
        if keyword(line, "END").is_some_and(str::is_empty) {
            let d = current.take().unwrap();
            let source = d.source.ok_or_else(|| MappingError::Syntax {
                line: d.line,
                message: format!("rule '{}' has no SOURCE", d.name),
            })?;
            let subject = d.subject.ok_or_else(|| MappingError::Syntax {
                line: d.line,
                message: format!("rule '{}' has no SUBJECT", d.name),
            })?;
            rules.push(MappingRule {
                name: d.name,
                source,
                subject,
                statements: d.statements,
                row_filter: d.filter,
                line: d.line,
            });
        } else if let Some(source) = keyword(line, "SOURCE") {
            if source.is_empty() || draft.source.is_some() {
                return Err(ctx.syntax("a rule needs exactly one SOURCE table name"));
            }
            draft.source = Some(source.to_string());
        } else if let Some(subject) = keyword(line, "SUBJECT") {
            if draft.subject.is_some() {
                return Err(ctx.syntax("a rule has exactly one SUBJECT"));
            }
            let t = ctx.term(subject)?;
            if t.is_literal() {
                return Err(ctx.syntax("SUBJECT must be an IRI or a blank node"));
            }
            draft.subject = Some(t);
        } else if let Some(expr) = keyword(line, "FILTER") {
            if draft.filter.is_some() {
                return Err(ctx.syntax("a rule has at most one FILTER"));
            }
            draft.filter = Some(parse_filter(expr, line_no)?);
        } else {
            let (p, o) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| ctx.syntax(format!("expected 'predicate object', found '{line}'")))?;
            let predicate = if p == "a" { rdf::TYPE.to_string() } else { ctx.constant_iri(p)? };
            let object = ctx.term(o)?;
            draft.statements.push(Statement {
                predicate,
                object,
                line: line_no,
            });
        }
    }
    if let Some(open) = current {
        return Err(MappingError::Syntax {
            line: open.line,
            message: format!("rule '{}' is not closed with END", open.name),
        });
    }
    if rules.is_empty() {
        return Err(MappingError::EmptyRuleSet);
    }
    Ok(MappingPlan { rules, prefixes })
}
