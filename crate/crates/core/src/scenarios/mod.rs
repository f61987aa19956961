//! Named verification pipelines and their reports.

mod builtin;
pub mod checks;
pub mod config;
pub mod report;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use checks::{infinite_type_check, InfiniteTypeReport, OrderCheck};
pub use config::{load_config, run_config, ScenarioConfig};
pub use report::{parse_jsonl, Line, Record, Relation, Report, Table, Verdict, REPORT_SCHEMA};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageInfo {
    pub name: &'static str,
    pub op: &'static str,
    pub formula: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub default_tol: f64,
    pub stages: &'static [StageInfo],
}

const fn st(name: &'static str, op: &'static str, formula: &'static str) -> StageInfo {
    StageInfo { name, op, formula }
}

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "example21",
        summary: "Ex21 domain: boundary distance, Levi lower bound, Sibony rate, psh witness",
        default_tol: 1e-6,
        stages: &[
            st("step1", "lagrange", "min over the parabola of s(x0,y0) >= (9/26)(1 - x0^2 - y0)"),
            st("tdist", "boundary_distance", "delta(z,w) = (1 - |z| - |w|)/sqrt(2) on Omega"),
            st("levi", "levi_form", "L(u; v) >= 1/4 for u = (|z| + |w|)^2 - 1"),
            st("rate", "sibony", "kappa >= sqrt(c/alpha)|v|/sqrt|u|, below the Graham upper bound"),
            st("psh", "psh_check", "rho = -(-r)^beta psh on D"),
        ],
    },
    ScenarioInfo {
        name: "example22",
        summary: "Ex22 domain: flat boundary, Hopf constant, cluster set, failure of log-type convexity",
        default_tol: 1e-4,
        stages: &[
            st("levi_closed_form", "levi_form_fd", "d2rho/dw dwbar = closed form for |w| >= 1/2"),
            st("psh", "psh_check", "Levi form of rho nonnegative on samples"),
            st("infinite_type", "flatness", "phi(x)/x^k -> 0 for k = 1..20, phi(x) = exp(-1/x^4)"),
            st("hopf", "hopf_fit", "-phi(z) >= c dist(z)^alpha on s-bands 2^-k"),
            st("cluster", "cluster_set", "F(z_k) -> q along three approach directions"),
            st("log_type", "ltc_fit", "no (C, nu) with delta(z;v) <= C |log delta(z)|^-nu"),
        ],
    },
    ScenarioInfo {
        name: "ball-sandwich",
        summary: "Unit ball in C^2: every bound against the exact Kobayashi metric and distance",
        default_tol: 1e-6,
        stages: &[
            st("graham", "graham", "1/(2 delta(z;v)) <= kappa(z;v) <= 1/delta(z;v)"),
            st("inscribed_sibony", "inscribed_ball,sibony", "Sibony lower <= exact <= inscribed-ball upper"),
            st("distance", "path,convex_lower", "convex lower <= K(a,b) <= polyline length"),
            st("log_type", "ltc_fit", "delta(z;v) <= C |log delta(z)|^-nu on the approach samples"),
        ],
    },
    ScenarioInfo {
        name: "extension-oracle",
        summary: "Boundary extension of F(z,w) = (z^2, w) on Ex21 checked against the direct formula",
        default_tol: 1e-7,
        stages: &[
            st("cauchy_riemann", "cr_defect", "|dF/dzbar| / |dF| on interior chart points"),
            st("extend", "extend_map", "F~(xi) = F~(xi + t'e) - int_0^t' dF/dy dy"),
            st("t_prime", "boundary_value", "value independent of the starting height t'"),
            st("certificate", "tail_bound", "|F~(xi) - F~(xi + t'e)| <= tail bound"),
            st("continuity", "continuity_modulus", "|F~(a) - F~(b)| <= modulus(|a - b|)"),
            st("cluster", "cluster_set", "single cluster point at p = (1,0)"),
        ],
    },
    ScenarioInfo {
        name: "dini-suite",
        summary: "Dini integrals: closed forms, divergence detection, stability under composition",
        default_tol: 1e-6,
        stages: &[
            st("closed_forms", "dini", "int_0^1 sqrt(r)/r dr = 2, int_0^1 r/r dr = 1"),
            st("divergent", "dini", "int_0 dr/(r(1 + |log r|)) = infinity"),
            st("composite", "dini", "kappa omega(r)^m stays Dini"),
            st("h_function", "h_function", "h(t) = int_0^t omega(r) dr and its inverse"),
        ],
    },
    ScenarioInfo {
        name: "embedding-suite",
        summary: "Lipschitz charts: distance sandwich and cone embeddings",
        default_tol: 1e-6,
        stages: &[
            st("lipschitz_sandwich", "sandwich", "Y(z) - x <= delta(z) sqrt(1 + L^2), ratio in [1, sqrt(1+L^2)]"),
            st("embedding", "verify_embedding", "xi + cone(beta, eps) inside D; doubling eps breaks it"),
        ],
    },
    ScenarioInfo {
        name: "dichotomy-demo",
        summary: "Distance comparison along approach sequences: distinct versus shared limits",
        default_tol: 1e-6,
        stages: &[
            st("distinct_limits", "dichotomy", "min(U - L, K + C - log C0 - l) turns negative"),
            st("same_limit", "dichotomy", "U - L stays nonnegative when the limits agree"),
            st("degenerate", "dichotomy", "constant inputs give a flat table"),
        ],
    },
];

pub fn list_scenarios() -> &'static [ScenarioInfo] {
    SCENARIOS
}

pub fn explain(name: &str) -> Result<&'static ScenarioInfo> {
    SCENARIOS
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Config(format!("unknown scenario '{name}'")))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub tol: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: DEFAULT_SEED,
            tol: None,
        }
    }
}

fn check_tol(tol: f64) -> Result<f64> {
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(Error::Config(format!("tolerance must be positive, got {tol}")))
    }
}

/// Runs a bundled scenario.  A numerical error inside a stage aborts the run.
pub fn run_scenario(name: &str, opts: RunOptions) -> Result<Report> {
    let info = explain(name)?;
    let tol = check_tol(opts.tol.unwrap_or(info.default_tol))?;
    let mut cx = builtin::Ctx {
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        tol,
        report: Report::new(name, opts.seed, tol),
    };
    match name {
        "example21" => builtin::example21(&mut cx)?,
        "example22" => builtin::example22(&mut cx)?,
        "ball-sandwich" => builtin::ball_sandwich(&mut cx)?,
        "extension-oracle" => builtin::extension_oracle(&mut cx)?,
        "dini-suite" => builtin::dini_suite(&mut cx)?,
        "embedding-suite" => builtin::embedding_suite(&mut cx)?,
        "dichotomy-demo" => builtin::dichotomy_demo(&mut cx)?,
        _ => unreachable!("catalog and dispatch disagree"),
    }
    cx.report.end_stage();
    Ok(cx.report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_scenario_is_config_error() {
        assert!(matches!(explain("nope"), Err(Error::Config(_))));
        assert!(matches!(run_scenario("nope", RunOptions::default()), Err(Error::Config(_))));
        let bad = RunOptions { seed: 1, tol: Some(-1.0) };
        assert!(matches!(run_scenario("dini-suite", bad), Err(Error::Config(_))));
    }

    #[test]
    fn catalog_names_are_unique() {
        let mut names: Vec<_> = SCENARIOS.iter().map(|s| s.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), SCENARIOS.len());
    }
}
