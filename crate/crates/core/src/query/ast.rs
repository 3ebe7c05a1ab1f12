use crate::rdf::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryForm {
    Select,
    Ask,
    Construct,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VarOrTerm {
    Var(String),
    Term(Term),
}

impl VarOrTerm {
    pub fn as_var(&self) -> Option<&str> {
        match self {
            VarOrTerm::Var(v) => Some(v),
            VarOrTerm::Term(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTriple {
    pub subject: VarOrTerm,
    pub predicate: VarOrTerm,
    pub object: VarOrTerm,
}

impl PatternTriple {
    pub fn positions(&self) -> [&VarOrTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

/// One element of a `{ ... }` group, kept in source order because
/// OPTIONAL is order-sensitive.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Triples(Vec<PatternTriple>),
    Optional(GroupPattern),
    /// Two or more alternatives.
    Union(Vec<GroupPattern>),
    Group(GroupPattern),
    Filter(Expression),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupPattern {
    pub elements: Vec<GroupElement>,
}

impl GroupPattern {
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn triple_patterns(&self) -> impl Iterator<Item = &PatternTriple> {
        self.elements.iter().flat_map(|e| match e {
            GroupElement::Triples(ts) => ts.as_slice(),
            _ => &[],
        })
    }

    pub fn optionals(&self) -> impl Iterator<Item = &GroupPattern> {
        self.elements.iter().filter_map(|e| match e {
            GroupElement::Optional(g) => Some(g),
            _ => None,
        })
    }

    pub fn filters(&self) -> impl Iterator<Item = &Expression> {
        self.elements.iter().filter_map(|e| match e {
            GroupElement::Filter(f) => Some(f),
            _ => None,
        })
    }

    pub fn unions(&self) -> impl Iterator<Item = &[GroupPattern]> {
        self.elements.iter().filter_map(|e| match e {
            GroupElement::Union(alts) => Some(alts.as_slice()),
            _ => None,
        })
    }

    /// Variables that occur in triple patterns anywhere inside the group,
    /// in order of first appearance.
    pub fn pattern_variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        for e in &self.elements {
            match e {
                GroupElement::Triples(ts) => {
                    for t in ts {
                        for v in t.positions().into_iter().filter_map(VarOrTerm::as_var) {
                            if !out.iter().any(|o| o == v) {
                                out.push(v.to_string());
                            }
                        }
                    }
                }
                GroupElement::Optional(g) | GroupElement::Group(g) => g.collect_vars(out),
                GroupElement::Union(alts) => {
                    for g in alts {
                        g.collect_vars(out);
                    }
                }
                GroupElement::Filter(_) => {}
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Var(String),
    Const(Term),
    Or(Box<Expression>, Box<Expression>),
    And(Box<Expression>, Box<Expression>),
    Not(Box<Expression>),
    Compare(CompareOp, Box<Expression>, Box<Expression>),
    In {
        needle: Box<Expression>,
        list: Vec<Expression>,
        negated: bool,
    },
    Bound(String),
    Regex {
        text: Box<Expression>,
        pattern: Box<Expression>,
        flags: Option<Box<Expression>>,
    },
    Str(Box<Expression>),
    Lang(Box<Expression>),
    Datatype(Box<Expression>),
    IsIri(Box<Expression>),
    IsBlank(Box<Expression>),
    IsLiteral(Box<Expression>),
    SameTerm(Box<Expression>, Box<Expression>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderCondition {
    pub expression: Expression,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProjectionItem {
    Var(String),
    Count {
        distinct: bool,
        /// `None` means `COUNT(*)`.
        argument: Option<String>,
        alias: String,
    },
}

impl ProjectionItem {
    pub fn output_name(&self) -> &str {
        match self {
            ProjectionItem::Var(v) => v,
            ProjectionItem::Count { alias, .. } => alias,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Items(Vec<ProjectionItem>),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Modifiers {
    pub order_by: Vec<OrderCondition>,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
    pub distinct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub form: QueryForm,
    pub projection: Projection,
    pub pattern: GroupPattern,
    pub construct_template: Vec<PatternTriple>,
    pub group_by: Vec<String>,
    pub modifiers: Modifiers,
}

impl Query {
    pub fn has_aggregates(&self) -> bool {
        !self.group_by.is_empty()
            || matches!(&self.projection, Projection::Items(items)
                if items.iter().any(|i| matches!(i, ProjectionItem::Count { .. })))
    }

    /// Names of the result columns for SELECT queries.
    pub fn result_variables(&self) -> Vec<String> {
        match &self.projection {
            Projection::All => self
                .pattern
                .pattern_variables()
                .into_iter()
                .filter(|v| !is_hidden_var(v))
                .collect(),
            Projection::Items(items) => items.iter().map(|i| i.output_name().to_string()).collect(),
        }
    }
}

/// Blank nodes in query patterns become variables that are never projected.
pub(crate) fn is_hidden_var(name: &str) -> bool {
    name.starts_with("_:")
}
