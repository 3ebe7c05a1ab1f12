use std::collections::{BTreeSet, HashMap};

use super::{Component, NodeConstraint, Path, PropertyConstraint, Shape, Target, ValidationReport, Violation};
use crate::rdf::values::{is_known_datatype, is_valid_lexical, term_numeric_value};
use crate::rdf::vocab::{rdf, rdfs};
use crate::rdf::Term;
use crate::store::{Store, TermId};

struct Validator<'a> {
    store: &'a Store,
    rdf_type: Option<TermId>,
    sub_class_of: Option<TermId>,
    /// Class id to the ids of it and all its subclasses.
    subclasses: HashMap<TermId, BTreeSet<TermId>>,
}

impl<'a> Validator<'a> {
    fn new(store: &'a Store) -> Validator<'a> {
        Validator {
            store,
            rdf_type: store.id(&Term::iri(rdf::TYPE)),
            sub_class_of: store.id(&Term::iri(rdfs::SUB_CLASS_OF)),
            subclasses: HashMap::new(),
        }
    }

    fn subclasses(&mut self, class: TermId) -> &BTreeSet<TermId> {
        let (store, sc) = (self.store, self.sub_class_of);
        self.subclasses.entry(class).or_insert_with(|| {
            let mut seen = BTreeSet::from([class]);
            let mut stack = vec![class];
            while let (Some(c), Some(sc)) = (stack.pop(), sc) {
                for [s, _, _] in store.match_ids([None, Some(sc), Some(c)], None) {
                    if seen.insert(s) {
                        stack.push(s);
                    }
                }
            }
            seen
        })
    }

    /// Instances of `class` or of any of its subclasses.
    fn instances(&mut self, class: &str) -> BTreeSet<TermId> {
        let (Some(c), Some(ty)) = (self.store.id(&Term::iri(class)), self.rdf_type) else {
            return BTreeSet::new();
        };
        let store = self.store;
        self.subclasses(c)
            .iter()
            .flat_map(|&k| store.match_ids([None, Some(ty), Some(k)], None).map(|t| t[0]))
            .collect()
    }

    fn is_instance(&mut self, node: &Term, class: &str) -> bool {
        let (Some(n), Some(c), Some(ty)) = (self.store.id(node), self.store.id(&Term::iri(class)), self.rdf_type) else {
            return false;
        };
        let types: Vec<TermId> = self.store.match_ids([Some(n), Some(ty), None], None).map(|t| t[2]).collect();
        let subs = self.subclasses(c);
        types.iter().any(|t| subs.contains(t))
    }

    fn focus_nodes(&mut self, shape: &Shape) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for target in &shape.targets {
            match target {
                Target::Node(t) => {
                    out.insert(t.clone());
                }
                Target::Class(c) => {
                    for id in self.instances(c) {
                        out.insert(self.store.term(id).clone());
                    }
                }
                Target::SubjectsOf(p) => {
                    if let Some(p) = self.store.id(&Term::iri(p.as_str())) {
                        out.extend(self.store.match_ids([None, Some(p), None], None).map(|t| self.store.term(t[0]).clone()));
                    }
                }
            }
        }
        out
    }

    fn values(&self, focus: &Term, path: &Path) -> BTreeSet<Term> {
        let (p, inverse) = match path {
            Path::Direct(p) => (p, false),
            Path::Inverse(p) => (p, true),
        };
        let (Some(f), Some(p)) = (self.store.id(focus), self.store.id(&Term::iri(p.as_str()))) else {
            return BTreeSet::new();
        };
        let pattern = if inverse { [None, Some(p), Some(f)] } else { [Some(f), Some(p), None] };
        self.store
            .match_ids(pattern, None)
            .map(|t| self.store.term(if inverse { t[0] } else { t[2] }).clone())
            .collect()
    }

    fn check_property(&mut self, shape: &Shape, focus: &Term, c: &PropertyConstraint, out: &mut Vec<Violation>) {
        let values = self.values(focus, &c.path);
        let mut report = |constraint: Component, value: Option<&Term>, message: String| {
            out.push(Violation {
                shape: shape.id.clone(),
                focus_node: Some(focus.clone()),
                constraint,
                path: Some(c.path.clone()),
                value: value.cloned(),
                message,
            })
        };
        let n = values.len() as u64;
        if let Some(min) = c.min_count {
            if n < min {
                report(Component::MinCount, None, format!("{n} values for {}, at least {min} required", c.path));
            }
        }
        if let Some(max) = c.max_count {
            if n > max {
                report(Component::MaxCount, None, format!("{n} values for {}, at most {max} allowed", c.path));
            }
        }
        for v in &values {
            if let Some(dt) = &c.datatype {
                let ok = v
                    .as_literal()
                    .is_some_and(|l| &l.datatype == dt && (!is_known_datatype(dt) || is_valid_lexical(dt, &l.lexical)));
                if !ok {
                    report(Component::Datatype, Some(v), format!("{v} is not a valid literal of datatype <{dt}>"));
                }
            }
            if let Some(class) = &c.class {
                if !self.is_instance(v, class) {
                    report(Component::Class, Some(v), format!("{v} is not an instance of <{class}>"));
                }
            }
            if let Some(kind) = c.node_kind {
                if !kind.matches(v) {
                    report(Component::NodeKind, Some(v), format!("{v} is not a {}", kind.as_str()));
                }
            }
            if let Some(re) = &c.pattern {
                if v.is_blank() || !re.is_match(v.lexical_form()) {
                    report(Component::Pattern, Some(v), format!("{v} does not match /{}/", re.as_str()));
                }
            }
            if let Some(list) = &c.in_list {
                if !list.contains(v) {
                    report(Component::In, Some(v), format!("{v} is not one of the allowed values"));
                }
            }
            let x = term_numeric_value(v);
            if let Some(min) = c.min_inclusive {
                if !x.is_some_and(|x| x >= min) {
                    report(Component::MinInclusive, Some(v), format!("{v} is not a number >= {min}"));
                }
            }
            if let Some(max) = c.max_inclusive {
                if !x.is_some_and(|x| x <= max) {
                    report(Component::MaxInclusive, Some(v), format!("{v} is not a number <= {max}"));
                }
            }
        }
    }

    fn check_node(&mut self, shape: &Shape, focus: &Term, c: &NodeConstraint) -> Option<Violation> {
        let (component, message) = match c {
            NodeConstraint::NodeKind(kind) if !kind.matches(focus) => {
                (Component::NodeKind, format!("{focus} is not a {}", kind.as_str()))
            }
            NodeConstraint::Class(class) if !self.is_instance(focus, class) => {
                (Component::Class, format!("{focus} is not an instance of <{class}>"))
            }
            NodeConstraint::In(list) if !list.contains(focus) => {
                (Component::In, format!("{focus} is not one of the allowed values"))
            }
            _ => return None,
        };
        Some(Violation {
            shape: shape.id.clone(),
            focus_node: Some(focus.clone()),
            constraint: component,
            path: None,
            value: Some(focus.clone()),
            message,
        })
    }
}

/// Focus nodes of `shape` in the default graph of `store`.
pub fn focus_nodes(store: &Store, shape: &Shape) -> BTreeSet<Term> {
    Validator::new(store).focus_nodes(shape)
}

/// Checks every shape against the default graph of `store`.
pub fn validate(store: &Store, shapes: &[Shape]) -> ValidationReport {
    let mut v = Validator::new(store);
    let mut violations = Vec::new();
    for shape in shapes {
        for focus in v.focus_nodes(shape) {
            for c in &shape.node_constraints {
                violations.extend(v.check_node(shape, &focus, c));
            }
            for c in &shape.constraints {
                v.check_property(shape, &focus, c, &mut violations);
            }
        }
    }
    ValidationReport::from_violations(violations)
}
