mod support;

use kgf_core::inference::{default_rules, Violation as Clash};
use kgf_core::quality::{run_levels_2_and_3, FileSyntax, Level1, OverallStatus, QualityReport};
use kgf_core::rdf::{SyntaxError, SyntaxReport};
use kgf_core::shapes::{parse_shapes_str, Component, Violation};
use kgf_core::store::Store;
use proptest::prelude::*;
use rand::Rng;
use support::closure::random_schema_graph;
use support::gen::rng;
use support::shapes::{random_shapes, shapes_turtle};

fn report(seed: u64) -> QualityReport {
    let mut r = rng(seed);
    let g = random_schema_graph(&mut r, 150);
    let shapes = parse_shapes_str(&shapes_turtle(&random_shapes(&mut r))).unwrap();
    let level1 = Level1::from_files(vec![FileSyntax::from_report(
        "in.ttl",
        SyntaxReport { ok: true, errors: vec![], triple_count: g.len() },
    )]);
    run_levels_2_and_3(level1, &mut Store::from_graph(&g), &default_rules(), &shapes, &[])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adding_a_violation_never_passes(seed in any::<u64>(), level in 0..4usize) {
        let mut rep = report(seed);
        let before = rep.overall_status();
        match level {
            0 => {
                rep.level1.files[0].errors.push(SyntaxError::new(3, 1, "bad"));
                rep.level1.files[0].ok = false;
            }
            1 => rep.level2.report.violations.push(Clash {
                rule_name: "r".into(),
                bindings: Default::default(),
                message: "m".into(),
            }),
            2 => rep.level3.shapes.violations.push(Violation {
                shape: "s".into(), focus_node: None, constraint: Component::MinCount, path: None, value: None, message: "m".into(),
            }),
            _ => rep.level3.queries.violations.push(Violation {
                shape: "q".into(), focus_node: None, constraint: Component::Sparql, path: None, value: None, message: "m".into(),
            }),
        }
        prop_assert_eq!(rep.overall_status(), OverallStatus::Fail);
        if before == OverallStatus::Fail {
            prop_assert_eq!(rep.overall_status(), OverallStatus::Fail);
        }
    }

    #[test]
    fn reruns_are_identical(seed in any::<u64>()) {
        let a = report(seed);
        let b = report(seed);
        prop_assert_eq!(a.to_json().to_string(), b.to_json().to_string());
        prop_assert_eq!(a.dimensions.len(), 6);
        let failing = !a.level2.report.violations.is_empty() || !a.level3.shapes.violations.is_empty();
        prop_assert_eq!(a.overall_status() == OverallStatus::Fail, failing);
    }
}

#[test]
fn some_generated_reports_fail_and_some_pass() {
    let statuses: Vec<OverallStatus> = (0..40u64).map(|s| report(s * 7919 + rng(s).gen_range(0..10)).overall_status()).collect();
    assert!(statuses.contains(&OverallStatus::Pass) && statuses.contains(&OverallStatus::Fail));
}
