use std::collections::{BTreeMap, BTreeSet};

use regex::Regex;

use super::{NodeConstraint, NodeKind, Path, PropertyConstraint, Shape, ShapesError, Target};
use crate::rdf::values::{is_integer_datatype, numeric_value};
use crate::rdf::vocab::{rdf, sh, SH};
use crate::rdf::{parse_turtle, Graph, Term};

type Outgoing<'a> = BTreeMap<&'a Term, Vec<(&'a str, &'a Term)>>;

/// Predicates on shapes that carry no constraint.
const ANNOTATIONS: &[&str] = &[sh::NAME, sh::DESCRIPTION, sh::MESSAGE];

fn shape_name(t: &Term) -> String {
    match t {
        Term::Iri(iri) => iri.clone(),
        other => other.to_string(),
    }
}

struct Ctx<'a> {
    out: Outgoing<'a>,
}

impl<'a> Ctx<'a> {
    fn values(&self, node: &Term) -> &[(&'a str, &'a Term)] {
        self.out.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `rdf:first`/`rdf:rest` list starting at `head`.
    fn list(&self, head: &Term, shape: &str) -> Result<Vec<Term>, ShapesError> {
        let bad = |message: &str| ShapesError::InvalidParameter {
            shape: shape.to_string(),
            parameter: "sh:in".into(),
            message: message.into(),
        };
        let mut items = Vec::new();
        let mut seen = BTreeSet::new();
        let mut node = head.clone();
        while node.as_iri() != Some(rdf::NIL) {
            if !seen.insert(node.clone()) {
                return Err(bad("cyclic list"));
            }
            let vals = self.values(&node);
            let first = vals.iter().filter(|(p, _)| *p == rdf::FIRST).collect::<Vec<_>>();
            let rest = vals.iter().filter(|(p, _)| *p == rdf::REST).collect::<Vec<_>>();
            if first.len() != 1 || rest.len() != 1 {
                return Err(bad("not a well-formed list"));
            }
            items.push(first[0].1.clone());
            node = rest[0].1.clone();
        }
        Ok(items)
    }
}

fn single<'a>(shape: &str, param: &str, values: &[&'a Term]) -> Result<&'a Term, ShapesError> {
    match values {
        [one] => Ok(one),
        _ => Err(ShapesError::InvalidParameter {
            shape: shape.to_string(),
            parameter: short(param),
            message: format!("expected one value, found {}", values.len()),
        }),
    }
}

fn short(param: &str) -> String {
    match param.strip_prefix(SH) {
        Some(local) => format!("sh:{local}"),
        None => format!("<{param}>"),
    }
}

fn invalid(shape: &str, param: &str, message: impl Into<String>) -> ShapesError {
    ShapesError::InvalidParameter {
        shape: shape.to_string(),
        parameter: short(param),
        message: message.into(),
    }
}

fn iri_value(shape: &str, param: &str, t: &Term) -> Result<String, ShapesError> {
    t.as_iri()
        .map(str::to_string)
        .ok_or_else(|| invalid(shape, param, format!("{t} is not an IRI")))
}

fn count_value(shape: &str, param: &str, t: &Term) -> Result<u64, ShapesError> {
    t.as_literal()
        .filter(|l| is_integer_datatype(&l.datatype))
        .and_then(|l| l.lexical.trim_start_matches('+').parse::<u64>().ok())
        .ok_or_else(|| invalid(shape, param, format!("{t} is not a non-negative integer")))
}

fn numeric(shape: &str, param: &str, t: &Term) -> Result<f64, ShapesError> {
    t.as_literal()
        .and_then(numeric_value)
        .ok_or_else(|| invalid(shape, param, format!("{t} is not numeric")))
}

fn node_kind(shape: &str, param: &str, t: &Term) -> Result<NodeKind, ShapesError> {
    match t.as_iri() {
        Some(sh::IRI) => Ok(NodeKind::Iri),
        Some(sh::LITERAL) => Ok(NodeKind::Literal),
        Some(sh::BLANK_NODE) => Ok(NodeKind::BlankNode),
        _ => Err(ShapesError::UnsupportedParameter {
            shape: shape.to_string(),
            parameter: format!("{} {t}", short(param)),
        }),
    }
}

/// Groups values by predicate, rejecting SHACL predicates not in `allowed`.
fn params<'a>(
    ctx: &Ctx<'a>,
    node: &Term,
    shape: &str,
    allowed: &[&str],
) -> Result<BTreeMap<&'a str, Vec<&'a Term>>, ShapesError> {
    let mut map: BTreeMap<&str, Vec<&Term>> = BTreeMap::new();
    for &(p, o) in ctx.values(node) {
        if allowed.contains(&p) {
            map.entry(p).or_default().push(o);
        } else if p.starts_with(SH) && !ANNOTATIONS.contains(&p) {
            return Err(ShapesError::UnsupportedParameter {
                shape: shape.to_string(),
                parameter: short(p),
            });
        }
    }
    Ok(map)
}

fn parse_path(ctx: &Ctx, shape: &str, t: &Term) -> Result<Path, ShapesError> {
    if let Some(iri) = t.as_iri() {
        return Ok(Path::Direct(iri.to_string()));
    }
    if let [(sh::INVERSE_PATH, inner)] = ctx.values(t) {
        if let Some(iri) = inner.as_iri() {
            return Ok(Path::Inverse(iri.to_string()));
        }
    }
    Err(ShapesError::UnsupportedParameter {
        shape: shape.to_string(),
        parameter: format!("sh:path {t}"),
    })
}

const PROPERTY_PARAMS: &[&str] = &[
    rdf::TYPE,
    sh::PATH,
    sh::MIN_COUNT,
    sh::MAX_COUNT,
    sh::DATATYPE,
    sh::CLASS,
    sh::NODE_KIND,
    sh::PATTERN,
    sh::IN,
    sh::MIN_INCLUSIVE,
    sh::MAX_INCLUSIVE,
];

fn parse_property(ctx: &Ctx, shape: &str, node: &Term) -> Result<PropertyConstraint, ShapesError> {
    let map = params(ctx, node, shape, PROPERTY_PARAMS)?;
    let one = |p: &str| map.get(p).map(|v| single(shape, p, v)).transpose();
    let path = one(sh::PATH)?.ok_or_else(|| invalid(shape, sh::PROPERTY, "property shape without sh:path"))?;
    let mut c = PropertyConstraint::new(parse_path(ctx, shape, path)?);
    if let Some(t) = one(sh::MIN_COUNT)? {
        c.min_count = Some(count_value(shape, sh::MIN_COUNT, t)?);
    }
    if let Some(t) = one(sh::MAX_COUNT)? {
        c.max_count = Some(count_value(shape, sh::MAX_COUNT, t)?);
    }
    if let (Some(min), Some(max)) = (c.min_count, c.max_count) {
        if min > max {
            return Err(invalid(shape, sh::MIN_COUNT, format!("minCount {min} exceeds maxCount {max}")));
        }
    }
    if let Some(t) = one(sh::DATATYPE)? {
        c.datatype = Some(iri_value(shape, sh::DATATYPE, t)?);
    }
    if let Some(t) = one(sh::CLASS)? {
        c.class = Some(iri_value(shape, sh::CLASS, t)?);
    }
    if let Some(t) = one(sh::NODE_KIND)? {
        c.node_kind = Some(node_kind(shape, sh::NODE_KIND, t)?);
    }
    if let Some(t) = one(sh::PATTERN)? {
        let src = t
            .as_literal()
            .ok_or_else(|| invalid(shape, sh::PATTERN, "pattern must be a literal"))?;
        let re = Regex::new(&src.lexical).map_err(|e| invalid(shape, sh::PATTERN, e.to_string()))?;
        c.pattern = Some(re);
    }
    if let Some(t) = one(sh::IN)? {
        c.in_list = Some(ctx.list(t, shape)?);
    }
    if let Some(t) = one(sh::MIN_INCLUSIVE)? {
        c.min_inclusive = Some(numeric(shape, sh::MIN_INCLUSIVE, t)?);
    }
    if let Some(t) = one(sh::MAX_INCLUSIVE)? {
        c.max_inclusive = Some(numeric(shape, sh::MAX_INCLUSIVE, t)?);
    }
    Ok(c)
}

const NODE_PARAMS: &[&str] = &[
    rdf::TYPE,
    sh::TARGET_CLASS,
    sh::TARGET_NODE,
    sh::TARGET_SUBJECTS_OF,
    sh::PROPERTY,
    sh::NODE_KIND,
    sh::CLASS,
    sh::IN,
];

fn parse_shape(ctx: &Ctx, node: &Term) -> Result<Shape, ShapesError> {
    let id = shape_name(node);
    let map = params(ctx, node, &id, NODE_PARAMS)?;
    let all = |p: &str| map.get(p).cloned().unwrap_or_default();
    let mut targets = Vec::new();
    for t in all(sh::TARGET_CLASS) {
        targets.push(Target::Class(iri_value(&id, sh::TARGET_CLASS, t)?));
    }
    for t in all(sh::TARGET_NODE) {
        targets.push(Target::Node(t.clone()));
    }
    for t in all(sh::TARGET_SUBJECTS_OF) {
        targets.push(Target::SubjectsOf(iri_value(&id, sh::TARGET_SUBJECTS_OF, t)?));
    }
    if targets.is_empty() {
        return Err(ShapesError::MissingTarget { shape: id });
    }
    let mut constraints = Vec::new();
    for p in all(sh::PROPERTY) {
        constraints.push(parse_property(ctx, &id, p)?);
    }
    let mut node_constraints = Vec::new();
    for t in all(sh::NODE_KIND) {
        node_constraints.push(NodeConstraint::NodeKind(node_kind(&id, sh::NODE_KIND, t)?));
    }
    for t in all(sh::CLASS) {
        node_constraints.push(NodeConstraint::Class(iri_value(&id, sh::CLASS, t)?));
    }
    for t in all(sh::IN) {
        node_constraints.push(NodeConstraint::In(ctx.list(t, &id)?));
    }
    Ok(Shape {
        id,
        targets,
        constraints,
        node_constraints,
    })
}

/// Shapes of a shapes graph, ordered by shape term. A shape is any node
/// typed `sh:NodeShape` or carrying a target.
pub fn parse_shapes(graph: &Graph) -> Result<Vec<Shape>, ShapesError> {
    let mut out: Outgoing = BTreeMap::new();
    let mut roots = BTreeSet::new();
    for t in graph.iter() {
        let Some(p) = t.predicate.as_iri() else { continue };
        out.entry(&t.subject).or_default().push((p, &t.object));
        let is_root = match p {
            rdf::TYPE => t.object.as_iri() == Some(sh::NODE_SHAPE),
            _ => [sh::TARGET_CLASS, sh::TARGET_NODE, sh::TARGET_SUBJECTS_OF].contains(&p),
        };
        if is_root {
            roots.insert(&t.subject);
        }
    }
    let ctx = Ctx { out };
    roots.into_iter().map(|node| parse_shape(&ctx, node)).collect()
}

pub fn parse_shapes_str(turtle: &str) -> Result<Vec<Shape>, ShapesError> {
    parse_shapes(&parse_turtle(turtle, None)?)
}
