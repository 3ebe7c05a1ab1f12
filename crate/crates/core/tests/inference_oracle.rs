mod support;

use std::collections::BTreeSet;

use kgf_core::inference::{check_consistency, default_rules, materialize, materialize_with_stats};
use kgf_core::rdf::Graph;
use kgf_core::store::Store;
use proptest::prelude::*;
use rand::Rng;
use support::closure::{naive_closure, naive_violations, random_schema_graph};
use support::gen::rng;

#[test]
fn default_closure_matches_naive_fixpoint() {
    let mut r = rng(0x5eed_0301);
    let rules = default_rules();
    let mut grew = 0;
    for case in 0..200 {
        let g = random_schema_graph(&mut r, 500);
        let expected = naive_closure(&g);
        let mut store = Store::from_graph(&g);
        let stats = materialize_with_stats(&mut store, &rules);
        assert!(!stats.capped, "case {case}");
        let got = store.graph(None);
        assert_eq!(got.len(), expected.len(), "case {case}: size");
        assert!(got == expected, "case {case}: closure differs");
        assert_eq!(stats.added, expected.len() - g.len(), "case {case}");
        assert_eq!(materialize(&mut store, &rules), 0, "case {case}: not idempotent");
        grew += usize::from(stats.added > 0);
    }
    assert!(grew > 150, "only {grew} graphs gained triples");
}

#[test]
fn violations_match_naive_scan() {
    let mut r = rng(0x5eed_0302);
    let rules = default_rules();
    let mut inconsistent = 0;
    for case in 0..100 {
        let g = random_schema_graph(&mut r, 300);
        let expected = naive_violations(&naive_closure(&g));
        let report = check_consistency(&mut Store::from_graph(&g), &rules);
        let got: BTreeSet<_> = report.violations.iter().map(|v| (v.rule_name.clone(), v.bindings.clone())).collect();
        assert_eq!(got.len(), report.violations.len(), "case {case}: duplicate violations");
        assert_eq!(got, expected, "case {case}");
        assert_eq!(report.consistent, expected.is_empty());
        inconsistent += usize::from(!expected.is_empty());
    }
    assert!(inconsistent > 20, "only {inconsistent} inconsistent graphs");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// A subgraph never entails more than the whole graph.
    #[test]
    fn closure_is_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_schema_graph(&mut r, 200);
        let sub: Graph = g.iter().filter(|_| r.gen_bool(0.7)).cloned().collect();
        let rules = default_rules();
        let mut big = Store::from_graph(&g);
        materialize(&mut big, &rules);
        let mut small = Store::from_graph(&sub);
        materialize(&mut small, &rules);
        let big = big.graph(None);
        prop_assert!(small.graph(None).iter().all(|t| big.contains(t)));
    }
}

