use super::{Guard, Rule};
use crate::rdf::vocab::{owl, rdf, rdfs};

/// subClassOf/subPropertyOf transitivity and propagation, domain, range.
pub fn rdfs_rules() -> Vec<Rule> {
    vec![
        Rule::triple(
            "subclass-transitive",
            &[["?a", rdfs::SUB_CLASS_OF, "?b"], ["?b", rdfs::SUB_CLASS_OF, "?c"]],
            ["?a", rdfs::SUB_CLASS_OF, "?c"],
        ),
        Rule::triple(
            "subclass-instance",
            &[["?a", rdfs::SUB_CLASS_OF, "?b"], ["?x", rdf::TYPE, "?a"]],
            ["?x", rdf::TYPE, "?b"],
        ),
        Rule::triple(
            "subproperty-transitive",
            &[["?p", rdfs::SUB_PROPERTY_OF, "?q"], ["?q", rdfs::SUB_PROPERTY_OF, "?r"]],
            ["?p", rdfs::SUB_PROPERTY_OF, "?r"],
        ),
        Rule::triple(
            "subproperty-triple",
            &[["?p", rdfs::SUB_PROPERTY_OF, "?q"], ["?s", "?p", "?o"]],
            ["?s", "?q", "?o"],
        ),
        Rule::triple("domain", &[["?p", rdfs::DOMAIN, "?c"], ["?s", "?p", "?o"]], ["?s", rdf::TYPE, "?c"]),
        Rule::triple("range", &[["?p", rdfs::RANGE, "?c"], ["?s", "?p", "?o"]], ["?o", rdf::TYPE, "?c"]),
    ]
}

/// The RDFS rules plus inverse, symmetric and transitive properties,
/// sameAs symmetry and transitivity, and three inconsistency rules.
pub fn default_rules() -> Vec<Rule> {
    let mut rules = rdfs_rules();
    rules.extend([
        Rule::triple("inverse-of", &[["?p", owl::INVERSE_OF, "?q"], ["?s", "?p", "?o"]], ["?o", "?q", "?s"]),
        Rule::triple("inverse-of-reverse", &[["?p", owl::INVERSE_OF, "?q"], ["?s", "?q", "?o"]], ["?o", "?p", "?s"]),
        Rule::triple(
            "symmetric",
            &[["?p", rdf::TYPE, owl::SYMMETRIC_PROPERTY], ["?s", "?p", "?o"]],
            ["?o", "?p", "?s"],
        ),
        Rule::triple(
            "transitive",
            &[["?p", rdf::TYPE, owl::TRANSITIVE_PROPERTY], ["?x", "?p", "?y"], ["?y", "?p", "?z"]],
            ["?x", "?p", "?z"],
        ),
        Rule::triple("same-as-symmetric", &[["?x", owl::SAME_AS, "?y"]], ["?y", owl::SAME_AS, "?x"]),
        Rule::triple(
            "same-as-transitive",
            &[["?x", owl::SAME_AS, "?y"], ["?y", owl::SAME_AS, "?z"]],
            ["?x", owl::SAME_AS, "?z"],
        ),
        Rule::bottom(
            "disjoint-instance",
            &[["?a", owl::DISJOINT_WITH, "?b"], ["?x", rdf::TYPE, "?a"], ["?x", rdf::TYPE, "?b"]],
            vec![],
            "{x} is an instance of disjoint classes {a} and {b}",
        ),
        Rule::bottom(
            "same-and-different",
            &[["?x", owl::DIFFERENT_FROM, "?y"], ["?x", owl::SAME_AS, "?y"]],
            vec![],
            "{x} and {y} are declared both same and different",
        ),
        Rule::bottom(
            "ill-typed-value",
            &[["?p", rdfs::RANGE, "?d"], ["?s", "?p", "?v"]],
            vec![Guard::IllTyped {
                value: "v".into(),
                datatype: "d".into(),
            }],
            "{s} {p} has value {v}, which is not a valid {d}",
        ),
    ]);
    rules
}
