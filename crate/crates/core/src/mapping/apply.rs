use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::Serialize;

use super::{MappingError, MappingPlan, MappingRule, Segment, Template, TermTemplate};
use crate::prep::format::normalize;
use crate::prep::{ColumnType, Table};
use crate::rdf::values::is_valid_lexical;
use crate::rdf::vocab::xsd;
use crate::rdf::{is_absolute_iri, Graph, Term, Triple};

/// Everything except RFC 3986 unreserved characters.
const IRI_VALUE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedStatement {
    pub rule: String,
    /// Zero-based data row index in the source table.
    pub row: usize,
    pub column: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MappingLog {
    pub rows_processed: usize,
    pub rows_filtered: usize,
    /// Instantiated statements, duplicates included.
    pub triples_emitted: usize,
    pub duplicates_collapsed: usize,
    pub skipped_statements: Vec<SkippedStatement>,
}

struct Skip {
    column: Option<String>,
    reason: String,
}

fn null_skip(column: &str) -> Skip {
    Skip {
        column: Some(column.to_string()),
        reason: format!("null value in column '{column}'"),
    }
}

fn cell<'a>(table: &'a Table, row: &'a [Option<String>], column: &str) -> Option<&'a str> {
    let i = table.column_index(column).expect("columns checked before mapping");
    row[i].as_deref()
}

/// Substituted values are percent-encoded, except when the template is a
/// single placeholder: then the cell must hold a whole IRI.
fn expand_template(template: &Template, table: &Table, row: &[Option<String>]) -> Result<String, Skip> {
    let mut out = String::new();
    if let [Segment::Column(c)] = template.segments.as_slice() {
        let v = cell(table, row, c).ok_or_else(|| null_skip(c))?.trim();
        if !is_absolute_iri(v) || v.contains(|ch: char| ch.is_whitespace() || "<>\"{}|^`\\".contains(ch)) {
            return Err(Skip {
                column: Some(c.clone()),
                reason: format!("'{v}' is not an absolute IRI"),
            });
        }
        return Ok(v.to_string());
    }
    for seg in &template.segments {
        match seg {
            Segment::Text(t) => out.push_str(t),
            Segment::Column(c) => {
                let v = cell(table, row, c).ok_or_else(|| null_skip(c))?;
                out.extend(utf8_percent_encode(v, IRI_VALUE));
            }
        }
    }
    if !is_absolute_iri(&out) {
        return Err(Skip {
            column: template.columns().next().map(str::to_string),
            reason: format!("'{out}' is not an absolute IRI"),
        });
    }
    Ok(out)
}

fn column_type(datatype: &str) -> Option<ColumnType> {
    match datatype {
        xsd::DECIMAL => Some(ColumnType::Decimal),
        xsd::DATE => Some(ColumnType::Date),
        xsd::DATE_TIME => Some(ColumnType::Datetime),
        xsd::BOOLEAN => Some(ColumnType::Boolean),
        _ => None,
    }
}

/// Casts a cell to `datatype`: known formats are normalized (decimal commas,
/// dotted dates, yes/no) and the result must be a valid lexical form.
fn typed_value(value: &str, datatype: &str) -> Option<String> {
    let v = value.trim();
    let v = match column_type(datatype) {
        Some(ty) => normalize(v, ty)?,
        None if datatype == xsd::DOUBLE || datatype == xsd::FLOAT => v.replacen(',', ".", 1),
        None => value.to_string(),
    };
    is_valid_lexical(datatype, &v).then_some(v)
}

fn instantiate(
    template: &TermTemplate,
    rule: &MappingRule,
    row_index: usize,
    table: &Table,
    row: &[Option<String>],
) -> Result<Term, Skip> {
    Ok(match template {
        TermTemplate::ConstantIri { iri } => Term::iri(iri.clone()),
        TermTemplate::IriTemplate { template } => Term::iri(expand_template(template, table, row)?),
        TermTemplate::RowBlankNode { label } => Term::blank(format!("{}_r{row_index}_{label}", rule.name)),
        TermTemplate::ConstantLiteral {
            lexical,
            datatype,
            language,
        } => literal(lexical.clone(), datatype.as_deref(), language.as_deref()),
        TermTemplate::ColumnLiteral {
            column,
            datatype,
            language,
        } => {
            let v = cell(table, row, column).ok_or_else(|| null_skip(column))?;
            match datatype {
                Some(dt) => {
                    let lexical = typed_value(v, dt).ok_or_else(|| Skip {
                        column: Some(column.clone()),
                        reason: format!("'{v}' is not a valid <{dt}> value"),
                    })?;
                    Term::typed(lexical, dt.clone())
                }
                None => literal(v.to_string(), None, language.as_deref()),
            }
        }
    })
}

fn literal(lexical: String, datatype: Option<&str>, language: Option<&str>) -> Term {
    match (datatype, language) {
        (_, Some(lang)) => Term::lang(lexical, lang),
        (Some(dt), None) => Term::typed(lexical, dt),
        (None, None) => Term::string(lexical),
    }
}

/// Runs every rule over its source table.
///
/// Source tables and referenced columns are checked before any row is
/// processed. Statements whose templates hit a null cell or produce an
/// invalid term are skipped and logged.
pub fn apply_mapping(plan: &MappingPlan, tables: &[Table]) -> Result<(Graph, MappingLog), MappingError> {
    let mut sources = Vec::with_capacity(plan.rules.len());
    for rule in &plan.rules {
        let table = tables
            .iter()
            .find(|t| t.name == rule.source)
            .ok_or_else(|| MappingError::MissingTable {
                rule: rule.name.clone(),
                table: rule.source.clone(),
            })?;
        if let Some(missing) = rule.columns().into_iter().find(|c| table.column_index(c).is_none()) {
            return Err(MappingError::MissingColumn {
                rule: rule.name.clone(),
                table: table.name.clone(),
                column: missing.to_string(),
            });
        }
        sources.push(table);
    }

    let mut graph = Graph::new();
    let mut log = MappingLog::default();
    for (rule, table) in plan.rules.iter().zip(sources) {
        for (r, row) in table.rows.iter().enumerate() {
            log.rows_processed += 1;
            if let Some(filter) = &rule.row_filter {
                if !filter.eval(&|c| cell(table, row, c)) {
                    log.rows_filtered += 1;
                    continue;
                }
            }
            let subject = instantiate(&rule.subject, rule, r, table, row);
            for st in &rule.statements {
                let object = match &subject {
                    Ok(s) => instantiate(&st.object, rule, r, table, row).map(|o| (s.clone(), o)),
                    Err(skip) => Err(Skip {
                        column: skip.column.clone(),
                        reason: format!("subject: {}", skip.reason),
                    }),
                };
                match object {
                    Ok((s, o)) => {
                        let t = Triple::new(s, Term::iri(st.predicate.clone()), o)
                            .expect("subjects are IRIs or blank nodes, predicates IRIs");
                        log.triples_emitted += 1;
                        if !graph.insert(t) {
                            log.duplicates_collapsed += 1;
                        }
                    }
                    Err(skip) => log.skipped_statements.push(SkippedStatement {
                        rule: rule.name.clone(),
                        row: r,
                        column: skip.column,
                        reason: skip.reason,
                    }),
                }
            }
        }
    }
    Ok((graph, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::compile_mapping;
    use crate::prep::{ingest_csv_bytes, CsvOptions};

    fn table(name: &str, text: &str) -> Table {
        ingest_csv_bytes(name, text.as_bytes(), &CsvOptions::default()).unwrap()
    }

    const DOC: &str = "PREFIX ex: <http://ex.org/>\nRULE item\nSOURCE items\nSUBJECT <http://ex.org/item/{id}>\n  a ex:Item\n  ex:name {name}\n  ex:qty {qty}^^xsd:integer\nEND\n";

    #[test]
    fn empty_table() {
        let plan = compile_mapping(DOC).unwrap();
        let (g, log) = apply_mapping(&plan, &[table("items", "id,name,qty\n")]).unwrap();
        assert!(g.is_empty());
        assert_eq!(log.rows_processed, 0);
    }

    #[test]
    fn subject_substitution() {
        let plan = compile_mapping(DOC).unwrap();
        let (g, log) = apply_mapping(&plan, &[table("items", "id,name,qty\n42,Bolt,3\n")]).unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.iter().all(|t| t.subject == Term::iri("http://ex.org/item/42")));
        assert_eq!(log.triples_emitted, 3);
    }

    #[test]
    fn null_cell_skips_statement() {
        let plan = compile_mapping(DOC).unwrap();
        let (g, log) = apply_mapping(&plan, &[table("items", "id,name,qty\n1,,3\n")]).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(log.skipped_statements.len(), 1);
        assert_eq!(log.skipped_statements[0].column.as_deref(), Some("name"));
    }

    #[test]
    fn reserved_characters_are_encoded() {
        let plan = compile_mapping(DOC).unwrap();
        let (g, _) = apply_mapping(&plan, &[table("items", "id,name,qty\na b/c?é,x,1\n")]).unwrap();
        let s = &g.iter().next().unwrap().subject;
        assert_eq!(s, &Term::iri("http://ex.org/item/a%20b%2Fc%3F%C3%A9"));
    }

    #[test]
    fn bad_typed_value_and_relative_iri_are_logged() {
        let doc = "RULE r\nSOURCE t\nSUBJECT {u}\nEND\n";
        assert!(compile_mapping(doc).is_err());
        let doc = "PREFIX ex: <http://ex.org/>\nRULE r\nSOURCE t\nSUBJECT <{u}>\n  ex:v {v}^^xsd:integer\n  ex:d {d}^^xsd:date\nEND\n";
        let plan = compile_mapping(doc).unwrap();
        let (g, log) = apply_mapping(&plan, &[table("t", "u,v,d\nhttp://x/1,zz,02.01.2021\nnot-absolute,1,2021-01-01\n")]).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.iter().next().unwrap().object, Term::typed("2021-01-02", xsd::DATE));
        assert_eq!(log.skipped_statements.len(), 3);
        assert!(log.skipped_statements[1].reason.starts_with("subject:"));
    }

    #[test]
    fn filter_and_duplicates() {
        let doc = "PREFIX ex: <http://ex.org/>\nRULE r\nSOURCE t\nSUBJECT ex:k/{k}\nFILTER {n} >= 2\n  ex:p \"c\"\n  ex:b _:x\nEND\n";
        let plan = compile_mapping(doc).unwrap();
        let (g, log) = apply_mapping(&plan, &[table("t", "k,n\na,1\na,2\na,3\n")]).unwrap();
        assert_eq!(log.rows_filtered, 1);
        assert_eq!(log.triples_emitted, 4);
        assert_eq!(log.duplicates_collapsed, 1);
        assert_eq!(g.len(), 3);
        assert_eq!(log.triples_emitted, g.len() + log.duplicates_collapsed);
    }

    #[test]
    fn missing_column_fails_up_front() {
        let plan = compile_mapping(DOC).unwrap();
        let err = apply_mapping(&plan, &[table("items", "id,name\n1,a\n")]).unwrap_err();
        assert_eq!(
            err,
            MappingError::MissingColumn {
                rule: "item".into(),
                table: "items".into(),
                column: "qty".into()
            }
        );
        assert!(matches!(apply_mapping(&plan, &[]), Err(MappingError::MissingTable { .. })));
    }
}
