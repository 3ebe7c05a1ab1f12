mod support;

use kgf_core::query::{evaluate, parse_query, QueryResult};
use kgf_core::rdf::are_isomorphic;
use kgf_core::store::Store;
use support::gen::{random_query_graph, rng};
use support::sparql::{random_query, reference_evaluate, Answer};

fn engine_answer(result: QueryResult) -> Answer {
    match result {
        QueryResult::Solutions(s) => Answer::Rows(s.variables, s.rows),
        QueryResult::Boolean(b) => Answer::Boolean(b),
        QueryResult::Graph(g) => Answer::Graph(g),
    }
}

#[test]
fn random_queries_match_reference_evaluator() {
    let mut r = rng(0x5eed_0001);
    let mut nonempty = 0;
    for case in 0..200 {
        let (graph, vocab) = random_query_graph(&mut r, 400);
        let store = Store::from_graph(&graph);
        let q = random_query(&mut r, &vocab);
        let text = q.to_sparql();
        let parsed = parse_query(&text).unwrap_or_else(|e| panic!("case {case}: {e}\n{text}"));
        let got = engine_answer(evaluate(&parsed, &store));
        let want = reference_evaluate(&q, &graph);
        if match &want {
            Answer::Rows(_, rows) => !rows.is_empty(),
            Answer::Boolean(b) => *b,
            Answer::Graph(g) => !g.is_empty(),
        } {
            nonempty += 1;
        }
        match (&got, &want) {
            (Answer::Graph(a), Answer::Graph(b)) => {
                assert!(are_isomorphic(a, b), "case {case}: CONSTRUCT differs\n{text}")
            }
            _ => assert_eq!(got, want, "case {case}\n{text}"),
        }
    }
    // guards against a generator that only produces trivially empty answers
    assert!(nonempty >= 50, "only {nonempty} non-empty answers");
}

#[test]
fn ask_agrees_with_select() {
    let mut r = rng(0x5eed_0002);
    for _ in 0..100 {
        let (graph, vocab) = random_query_graph(&mut r, 200);
        let store = Store::from_graph(&graph);
        let q = random_query(&mut r, &vocab);
        let body = q.to_sparql();
        let Some(start) = body.find('{') else { continue };
        // the WHERE group of a query is the first '{' unless it is a CONSTRUCT template
        if body.starts_with("CONSTRUCT") {
            continue;
        }
        let end = ["} GROUP", "} ORDER", "} LIMIT", "} OFFSET"]
            .iter()
            .filter_map(|m| body.find(m))
            .min()
            .map_or(body.len(), |i| i + 1);
        let group = &body[start..end];
        let ask = parse_query(&format!("ASK {group}")).unwrap();
        let select = parse_query(&format!("SELECT * {group}")).unwrap();
        let QueryResult::Boolean(b) = evaluate(&ask, &store) else { panic!() };
        let QueryResult::Solutions(s) = evaluate(&select, &store) else { panic!() };
        assert_eq!(b, !s.is_empty(), "{group}");
    }
}


mod properties {
    use super::*;
    use proptest::prelude::*;
    use support::sparql::QForm;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn order_by_limit_is_prefix(seed in any::<u64>(), k in 0usize..6) {
            let mut r = rng(seed);
            let (graph, vocab) = random_query_graph(&mut r, 150);
            let store = Store::from_graph(&graph);
            let mut q = random_query(&mut r, &vocab);
            if matches!(q.form, QForm::Ask | QForm::Construct(_)) {
                return Ok(());
            }
            q.limit = None;
            q.offset = None;
            let full = evaluate(&parse_query(&q.to_sparql()).unwrap(), &store);
            q.limit = Some(k);
            let limited = evaluate(&parse_query(&q.to_sparql()).unwrap(), &store);
            let (QueryResult::Solutions(full), QueryResult::Solutions(limited)) = (full, limited) else {
                panic!("select expected");
            };
            let n = k.min(full.rows.len());
            prop_assert_eq!(&limited.rows[..], &full.rows[..n]);
        }

        #[test]
        fn construct_has_no_holes(seed in any::<u64>()) {
            let mut r = rng(seed);
            let (graph, vocab) = random_query_graph(&mut r, 150);
            let store = Store::from_graph(&graph);
            let q = random_query(&mut r, &vocab);
            let QForm::Construct(_) = q.form else { return Ok(()) };
            let QueryResult::Graph(g) = evaluate(&parse_query(&q.to_sparql()).unwrap(), &store) else {
                panic!("construct expected");
            };
            for t in g.iter() {
                prop_assert!(!t.subject.is_literal());
                prop_assert!(t.predicate.is_iri());
            }
        }
    }
}
