//! Lexical validation and value extraction for the XSD datatypes the
//! workbench interprets.

use std::cmp::Ordering;
use std::sync::LazyLock;

use chrono::{DateTime, FixedOffset, NaiveDate, NaiveDateTime, TimeZone};
use regex::Regex;

use super::term::{Literal, Term};
use super::vocab::xsd;

static INTEGER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[+-]?[0-9]+$").unwrap());
static DECIMAL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)$").unwrap());
static DOUBLE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^([+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?|[+-]?INF|NaN)$").unwrap()
});
static TZ_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(Z|[+-][0-9]{2}:[0-9]{2})$").unwrap());

const INTEGER_TYPES: &[&str] = &[
    xsd::INTEGER,
    xsd::INT,
    xsd::LONG,
    xsd::SHORT,
    xsd::NON_NEGATIVE_INTEGER,
    xsd::POSITIVE_INTEGER,
];

pub fn is_integer_datatype(datatype: &str) -> bool {
    INTEGER_TYPES.contains(&datatype)
}

pub fn is_numeric_datatype(datatype: &str) -> bool {
    is_integer_datatype(datatype)
        || datatype == xsd::DECIMAL
        || datatype == xsd::DOUBLE
        || datatype == xsd::FLOAT
}

/// Whether the workbench knows how to check lexical forms of `datatype`.
pub fn is_known_datatype(datatype: &str) -> bool {
    is_numeric_datatype(datatype)
        || [xsd::STRING, xsd::BOOLEAN, xsd::DATE, xsd::DATE_TIME].contains(&datatype)
}

/// Lexical-space check. Unknown datatypes are accepted.
pub fn is_valid_lexical(datatype: &str, lexical: &str) -> bool {
    match datatype {
        xsd::BOOLEAN => matches!(lexical, "true" | "false" | "1" | "0"),
        xsd::DECIMAL => DECIMAL_RE.is_match(lexical),
        xsd::DOUBLE | xsd::FLOAT => DOUBLE_RE.is_match(lexical),
        xsd::DATE => parse_date(lexical).is_some(),
        xsd::DATE_TIME => parse_date_time(lexical).is_some(),
        dt if is_integer_datatype(dt) => {
            if !INTEGER_RE.is_match(lexical) {
                return false;
            }
            let Ok(v) = lexical.parse::<i128>() else {
                // out of i128 range is still a valid xsd:integer
                return dt == xsd::INTEGER;
            };
            match dt {
                xsd::INT => i32::try_from(v).is_ok(),
                xsd::LONG => i64::try_from(v).is_ok(),
                xsd::SHORT => i16::try_from(v).is_ok(),
                xsd::NON_NEGATIVE_INTEGER => v >= 0,
                xsd::POSITIVE_INTEGER => v > 0,
                _ => true,
            }
        }
        _ => true,
    }
}

/// Numeric value of a well-formed numeric literal, promoted to f64.
pub fn numeric_value(lit: &Literal) -> Option<f64> {
    if !is_numeric_datatype(&lit.datatype) || !is_valid_lexical(&lit.datatype, &lit.lexical) {
        return None;
    }
    match lit.lexical.as_str() {
        "INF" | "+INF" => Some(f64::INFINITY),
        "-INF" => Some(f64::NEG_INFINITY),
        "NaN" => Some(f64::NAN),
        s => s.parse::<f64>().ok(),
    }
}

pub fn term_numeric_value(term: &Term) -> Option<f64> {
    term.as_literal().and_then(numeric_value)
}

pub fn boolean_value(lit: &Literal) -> Option<bool> {
    if lit.datatype != xsd::BOOLEAN {
        return None;
    }
    match lit.lexical.as_str() {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

fn split_tz(s: &str) -> (&str, Option<&str>) {
    match TZ_RE.find(s) {
        Some(m) if m.start() >= 10 => (&s[..m.start()], Some(m.as_str())),
        _ => (s, None),
    }
}

fn offset_of(tz: Option<&str>) -> Option<FixedOffset> {
    match tz {
        None | Some("Z") => FixedOffset::east_opt(0),
        Some(tz) => {
            let sign = if tz.starts_with('-') { -1 } else { 1 };
            let hours: i32 = tz[1..3].parse().ok()?;
            let minutes: i32 = tz[4..6].parse().ok()?;
            FixedOffset::east_opt(sign * (hours * 3600 + minutes * 60))
        }
    }
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let (date, tz) = split_tz(s);
    if date.len() != 10 {
        return None;
    }
    offset_of(tz)?;
    NaiveDate::parse_from_str(date, "%Y-%m-%d").ok()
}

pub fn parse_date_time(s: &str) -> Option<DateTime<FixedOffset>> {
    let (dt, tz) = split_tz(s);
    let naive = NaiveDateTime::parse_from_str(dt, "%Y-%m-%dT%H:%M:%S%.f")
        .or_else(|_| NaiveDateTime::parse_from_str(dt, "%Y-%m-%dT%H:%M:%S"))
        .ok()?;
    offset_of(tz)?.from_local_datetime(&naive).single()
}

/// Orders two date or dateTime literals of the same datatype.
pub fn compare_temporal(a: &Literal, b: &Literal) -> Option<Ordering> {
    match (a.datatype.as_str(), b.datatype.as_str()) {
        (xsd::DATE, xsd::DATE) => Some(parse_date(&a.lexical)?.cmp(&parse_date(&b.lexical)?)),
        (xsd::DATE_TIME, xsd::DATE_TIME) => {
            Some(parse_date_time(&a.lexical)?.cmp(&parse_date_time(&b.lexical)?))
        }
        _ => None,
    }
}
