use kobex_core::scenarios::{list_scenarios, parse_jsonl, run_scenario, Line, RunOptions};

#[test]
fn catalog_matches_the_advertised_names() {
    let names: Vec<_> = list_scenarios().iter().map(|s| s.name).collect();
    for want in [
        "example21",
        "example22",
        "ball-sandwich",
        "extension-oracle",
        "dini-suite",
        "embedding-suite",
        "dichotomy-demo",
    ] {
        assert!(names.contains(&want), "{want}");
    }
}

#[test]
fn reports_are_reproducible_per_seed() {
    let opts = RunOptions { seed: 11, tol: None };
    let a = run_scenario("ball-sandwich", opts).unwrap().to_jsonl();
    let b = run_scenario("ball-sandwich", opts).unwrap().to_jsonl();
    assert_eq!(a, b);
    let c = run_scenario("ball-sandwich", RunOptions { seed: 12, tol: None }).unwrap().to_jsonl();
    assert_ne!(a, c);
    for line in parse_jsonl(&a).unwrap() {
        if let Line::Verdict(v) = line {
            assert_eq!(v.recompute(), v.pass);
        }
    }
}

#[test]
fn tightening_the_tolerance_flips_a_verdict() {
    let loose = run_scenario("dini-suite", RunOptions::default()).unwrap();
    assert!(loose.passed());
    let tight = run_scenario("dini-suite", RunOptions { seed: 1, tol: Some(1e-300) }).unwrap();
    assert!(!tight.passed());
}
