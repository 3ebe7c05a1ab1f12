//! Cell format classes and typed parsing.

use std::sync::LazyLock;

use chrono::{NaiveDate, NaiveDateTime};
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::table::ColumnType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatClass {
    IsoDate,
    DottedDate,
    SlashedDate,
    Integer,
    DecimalDot,
    DecimalComma,
    Boolean,
    Other,
}

impl FormatClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FormatClass::IsoDate => "iso_date",
            FormatClass::DottedDate => "dotted_date",
            FormatClass::SlashedDate => "slashed_date",
            FormatClass::Integer => "integer",
            FormatClass::DecimalDot => "decimal_dot",
            FormatClass::DecimalComma => "decimal_comma",
            FormatClass::Boolean => "boolean",
            FormatClass::Other => "other",
        }
    }
}

static CLASSES: LazyLock<Vec<(FormatClass, Regex)>> = LazyLock::new(|| {
    [
        (
            FormatClass::IsoDate,
            r"^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:\d{2})?)?$",
        ),
        (FormatClass::DottedDate, r"^\d{1,2}\.\d{1,2}\.\d{4}$"),
        (FormatClass::SlashedDate, r"^\d{1,2}/\d{1,2}/(\d{2}|\d{4})$"),
        (FormatClass::Integer, r"^[+-]?\d+$"),
        (FormatClass::DecimalDot, r"^[+-]?(\d+\.\d*|\.\d+)$"),
        (FormatClass::DecimalComma, r"^[+-]?(\d+,\d*|,\d+)$"),
        (FormatClass::Boolean, r"(?i)^(true|false|yes|no)$"),
    ]
    .into_iter()
    .map(|(c, re)| (c, Regex::new(re).unwrap()))
    .collect()
});

/// First matching class in declaration order.
pub fn classify(cell: &str) -> FormatClass {
    CLASSES
        .iter()
        .find(|(_, re)| re.is_match(cell))
        .map_or(FormatClass::Other, |(c, _)| *c)
}

static INTEGER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[+-]?\d+$").unwrap());
static DECIMAL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[+-]?(\d+([.,]\d*)?|[.,]\d+)$").unwrap());
static DOTTED_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\d{1,2})\.(\d{1,2})\.(\d{4})$").unwrap());

const DATETIME_FORMATS: &[&str] = &["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"];

pub fn parse_date(cell: &str) -> Option<NaiveDate> {
    if let Some(c) = DOTTED_RE.captures(cell) {
        return NaiveDate::from_ymd_opt(c[3].parse().ok()?, c[2].parse().ok()?, c[1].parse().ok()?);
    }
    if cell.len() != 10 {
        return None;
    }
    NaiveDate::parse_from_str(cell, "%Y-%m-%d").ok()
}

/// Returns the local date-time and the zone suffix (`Z`, `+01:00` or empty).
fn parse_datetime(cell: &str) -> Option<(NaiveDateTime, &str)> {
    let (body, zone) = if let Some(b) = cell.strip_suffix('Z') {
        (b, "Z")
    } else if cell.len() > 6 && matches!(cell.as_bytes()[cell.len() - 6], b'+' | b'-') && cell.as_bytes()[cell.len() - 3] == b':' {
        cell.split_at(cell.len() - 6)
    } else {
        (cell, "")
    };
    if !zone.is_empty() && zone != "Z" {
        let h: u32 = zone[1..3].parse().ok()?;
        let m: u32 = zone[4..6].parse().ok()?;
        if h > 14 || m > 59 {
            return None;
        }
    }
    DATETIME_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(body, f).ok())
        .map(|dt| (dt, zone))
}

fn parse_boolean(cell: &str) -> Option<bool> {
    match cell.to_ascii_lowercase().as_str() {
        "true" | "yes" => Some(true),
        "false" | "no" => Some(false),
        _ => None,
    }
}

/// Parses `cell` as `ty`, returning the normalized lexical form: decimal
/// commas become dots, dotted dates become ISO, date-times use `T`.
pub fn normalize(cell: &str, ty: ColumnType) -> Option<String> {
    match ty {
        ColumnType::String => Some(cell.to_string()),
        ColumnType::Integer => INTEGER_RE.is_match(cell).then(|| cell.to_string()),
        ColumnType::Decimal => DECIMAL_RE.is_match(cell).then(|| cell.replace(',', ".")),
        ColumnType::Date => parse_date(cell).map(|d| d.format("%Y-%m-%d").to_string()),
        ColumnType::Datetime => parse_datetime(cell).map(|(dt, zone)| {
            let mut s = dt.format("%Y-%m-%dT%H:%M:%S%.f").to_string();
            s.push_str(zone);
            s
        }),
        ColumnType::Boolean => parse_boolean(cell).map(|b| b.to_string()),
    }
}

pub fn parses_as(cell: &str, ty: ColumnType) -> bool {
    normalize(cell, ty).is_some()
}

/// Share of cells needed for a type to be inferred.
pub const INFERENCE_THRESHOLD: f64 = 0.95;

/// The first type in preference order that at least 95% of the non-null
/// cells parse as. An all-null column is a string column.
pub fn infer_type<'a>(cells: impl IntoIterator<Item = &'a str> + Clone) -> ColumnType {
    let total = cells.clone().into_iter().count();
    if total == 0 {
        return ColumnType::String;
    }
    ColumnType::ALL
        .into_iter()
        .find(|ty| {
            let ok = cells.clone().into_iter().filter(|c| parses_as(c, *ty)).count();
            ok as f64 >= INFERENCE_THRESHOLD * total as f64
        })
        .unwrap_or(ColumnType::String)
}

/// Year of a cell that parses as a date or date-time.
pub fn year_of(cell: &str) -> Option<i32> {
    use chrono::Datelike;
    parse_date(cell)
        .map(|d| d.year())
        .or_else(|| parse_datetime(cell).map(|(dt, _)| dt.year()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_in_order() {
        let cases = [
            ("2021-01-02", FormatClass::IsoDate),
            ("2021-01-02T10:00:00Z", FormatClass::IsoDate),
            ("02.01.2021", FormatClass::DottedDate),
            ("1/2/21", FormatClass::SlashedDate),
            ("-42", FormatClass::Integer),
            ("3.14", FormatClass::DecimalDot),
            ("3,14", FormatClass::DecimalComma),
            ("Yes", FormatClass::Boolean),
            ("abc", FormatClass::Other),
            ("", FormatClass::Other),
        ];
        for (cell, class) in cases {
            assert_eq!(classify(cell), class, "{cell}");
        }
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize("02.01.2021", ColumnType::Date).as_deref(), Some("2021-01-02"));
        assert_eq!(normalize("31.02.2021", ColumnType::Date), None);
        assert_eq!(normalize("3,5", ColumnType::Decimal).as_deref(), Some("3.5"));
        assert_eq!(normalize("abc", ColumnType::Integer), None);
        assert_eq!(
            normalize("2021-01-02 10:30:00+01:00", ColumnType::Datetime).as_deref(),
            Some("2021-01-02T10:30:00+01:00")
        );
        assert_eq!(normalize("NO", ColumnType::Boolean).as_deref(), Some("false"));
    }

    #[test]
    fn inference_prefers_narrow_types() {
        assert_eq!(infer_type(["1", "2", "3"]), ColumnType::Integer);
        assert_eq!(infer_type(["1", "2.5"]), ColumnType::Decimal);
        assert_eq!(infer_type(["2021-01-01", "01.02.2020"]), ColumnType::Date);
        assert_eq!(infer_type(["true", "no"]), ColumnType::Boolean);
        assert_eq!(infer_type(["a", "1"]), ColumnType::String);
        assert_eq!(infer_type(std::iter::empty::<&str>()), ColumnType::String);
    }

    #[test]
    fn inference_tolerates_five_percent() {
        let mut cells = vec!["7"; 19];
        cells.push("x");
        assert_eq!(infer_type(cells.iter().copied()), ColumnType::Integer);
        cells.push("y");
        assert_eq!(infer_type(cells.iter().copied()), ColumnType::String);
    }
}
