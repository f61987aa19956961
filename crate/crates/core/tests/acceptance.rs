//! One PASS/FAIL line per acceptance criterion, computed from the bundled
//! scenario reports and their stage timings.  Runs without the libtest
//! harness so the lines are always printed.

use std::collections::BTreeMap;
use std::time::Duration;

use kobex_core::scenarios::{explain, run_scenario, Report, RunOptions, Verdict};

struct Criterion {
    id: u32,
    title: &'static str,
    scenario: &'static str,
    stages: &'static [&'static str],
    /// Verdicts that must be present, as `stage/name`.
    required: &'static [&'static str],
    limit: Option<Duration>,
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "Graham sandwich on the unit ball, 100 samples, rel tol 1e-6",
        scenario: "ball-sandwich",
        stages: &["graham"],
        required: &["graham/violations"],
        limit: secs(10),
    },
    Criterion {
        id: 2,
        title: "Ex21 step 1: min S >= (9/26)|x0^2 + y0 - 1| on the 100x100 grid",
        scenario: "example21",
        stages: &["step1"],
        required: &["step1/violations", "step1/worst_ratio"],
        limit: secs(5),
    },
    Criterion {
        id: 3,
        title: "Ex21 boundary distance (1 - |z| - |w|)/sqrt(2) within 1e-6",
        scenario: "example21",
        stages: &["tdist"],
        required: &["tdist/max_abs_error"],
        limit: None,
    },
    Criterion {
        id: 4,
        title: "Ex21 step 2: Levi form of u at least |v|^2/4",
        scenario: "example21",
        stages: &["levi"],
        required: &["levi/min_levi_minus_quarter"],
        limit: None,
    },
    Criterion {
        id: 5,
        title: "Ex22: Levi closed form, psh, infinite type, Hopf fit",
        scenario: "example22",
        stages: &["levi_closed_form", "psh", "infinite_type", "hopf"],
        required: &[
            "levi_closed_form/max_relative_error",
            "levi_closed_form/samples",
            "psh/violations",
            "infinite_type/failing_orders",
            "hopf/residual",
        ],
        limit: None,
    },
    Criterion {
        id: 6,
        title: "Extension of (z^2, w) on the Ex21 chart, 20x20 grid",
        scenario: "extension-oracle",
        stages: &["extend", "t_prime", "certificate"],
        required: &["extend/max_deviation", "t_prime/max_spread", "certificate/max_excess_over_tail"],
        limit: secs(60),
    },
    Criterion {
        id: 7,
        title: "Dini suite: closed forms, divergence, composition",
        scenario: "dini-suite",
        stages: &["closed_forms", "divergent", "composite"],
        required: &[
            "closed_forms/sqrt_error",
            "closed_forms/linear_error",
            "divergent/declared_divergent",
            "composite/lost_dini",
        ],
        limit: None,
    },
    Criterion {
        id: 8,
        title: "Cone embedding on the Ex22 chart, 10^4 pairs, doubled eps fails",
        scenario: "embedding-suite",
        stages: &["embedding"],
        required: &["embedding/pairs", "embedding/violations", "embedding/doubled_violations"],
        limit: secs(30),
    },
    Criterion {
        id: 9,
        title: "Dichotomy on ball sequences with distinct limits",
        scenario: "dichotomy-demo",
        stages: &["distinct_limits"],
        required: &["distinct_limits/l_nondecreasing", "distinct_limits/l_growth", "distinct_limits/failure_from"],
        limit: None,
    },
    Criterion {
        id: 10,
        title: "Lipschitz sandwich on the bundled charts",
        scenario: "embedding-suite",
        stages: &["lipschitz_sandwich"],
        required: &[],
        limit: None,
    },
];

fn stage_time(rep: &Report, stages: &[&str]) -> Duration {
    stages.iter().filter_map(|s| rep.stage_time(s)).sum()
}

fn evaluate(c: &Criterion, rep: &Report) -> (bool, String) {
    let mut notes = Vec::new();
    let relevant: Vec<&Verdict> = rep.verdicts.iter().filter(|v| c.stages.contains(&v.stage.as_str())).collect();
    if relevant.is_empty() {
        notes.push("no verdicts".to_string());
    }
    for req in c.required {
        let (stage, name) = req.split_once('/').unwrap();
        if !relevant.iter().any(|v| v.stage == stage && v.name == name) {
            notes.push(format!("missing {req}"));
        }
    }
    for v in relevant.iter().filter(|v| !v.pass || !v.recompute()) {
        notes.push(format!(
            "{}/{}: {:e} {} {:e}",
            v.stage,
            v.name,
            v.observed,
            v.relation.symbol(),
            v.threshold
        ));
    }
    let took = stage_time(rep, c.stages);
    if let Some(limit) = c.limit {
        if took > limit {
            notes.push(format!("took {took:.2?}, limit {limit:.0?}"));
        }
    }
    let detail = if notes.is_empty() {
        format!("{} verdicts, {took:.2?}", relevant.len())
    } else {
        notes.join("; ")
    };
    (notes.is_empty(), detail)
}

fn main() -> std::process::ExitCode {
    let mut reports: BTreeMap<&str, Report> = BTreeMap::new();
    for c in CRITERIA {
        if !reports.contains_key(c.scenario) {
            let rep = run_scenario(c.scenario, RunOptions::default()).unwrap_or_else(|e| panic!("{}: {e}", c.scenario));
            for st in explain(c.scenario).unwrap().stages {
                assert!(rep.verdicts.iter().any(|v| v.stage == st.name), "{}: stage {} silent", c.scenario, st.name);
            }
            reports.insert(c.scenario, rep);
        }
    }
    let mut failed = Vec::new();
    for c in CRITERIA {
        let (pass, detail) = evaluate(c, &reports[c.scenario]);
        println!("{} criterion {:>2}: {} ({detail})", if pass { "PASS" } else { "FAIL" }, c.id, c.title);
        if !pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria pass", CRITERIA.len(), CRITERIA.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
