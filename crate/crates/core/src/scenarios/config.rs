//! TOML scenario files.
//!
//! ```toml
//! name = "my-run"
//! seed = 7
//! tol = 1e-6
//!
//! [domain]
//! bundled = "ball"               # or: dim + constraints (+ convex, bound)
//!
//! [[stage]]
//! op = "boundary_distance"
//! points = [[0.1, 0.0, 0.2, 0.0]]  # re/im pairs per coordinate
//! expect = [0.7763932022500211]
//! ```

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::checks::{infinite_type_check, sample_in_domain, unit_direction};
use super::report::{Record, Relation, Report};
use super::DEFAULT_SEED;
use crate::domains::{boundary_distance, bundled, Constraint, DomainSpec};
use crate::error::{Error, Result};
use crate::expr::{complex_var_names, Expr};
use crate::metrics::{graham_bounds, inscribed_ball_upper_bound};
use crate::point::{c, CPoint};
use crate::psh::{check_psh, PshWitness};
use crate::regularity::{dini_integral, ModulusOfContinuity};

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub domain: DomainConfig,
    #[serde(default, rename = "stage")]
    pub stages: Vec<StageConfig>,
}

fn default_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default)]
    pub bundled: Option<String>,
    #[serde(default)]
    pub dim: Option<usize>,
    /// Expressions in `z1..zn`; the domain is where all of them are negative.
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub convex: bool,
    #[serde(default)]
    pub bound: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiniExpect {
    Finite,
    Divergent,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum StageConfig {
    BoundaryDistance {
        points: Vec<Vec<f64>>,
        #[serde(default)]
        expect: Option<Vec<f64>>,
    },
    Graham {
        samples: usize,
    },
    Psh {
        /// Real expression in `z1..zn`; `re`, `im`, `abs` are available.
        witness: String,
        samples: usize,
    },
    Dini {
        /// Expression in `r`.
        modulus: String,
        #[serde(default = "one")]
        eps: f64,
        expect: DiniExpect,
        #[serde(default)]
        value: Option<f64>,
    },
    InfiniteType {
        /// Expression in `x`, vanishing at 0.
        phi: String,
        max_order: u32,
    },
}

fn one() -> f64 {
    1.0
}

impl StageConfig {
    pub fn op(&self) -> &'static str {
        match self {
            StageConfig::BoundaryDistance { .. } => "boundary_distance",
            StageConfig::Graham { .. } => "graham",
            StageConfig::Psh { .. } => "psh",
            StageConfig::Dini { .. } => "dini",
            StageConfig::InfiniteType { .. } => "infinite_type",
        }
    }
}

fn cfg_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(cfg_err)?;
    if !(cfg.tol.is_finite() && cfg.tol > 0.0) {
        return Err(Error::Config(format!("tol must be positive, got {}", cfg.tol)));
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

impl DomainConfig {
    pub fn build(&self) -> Result<DomainSpec> {
        match (&self.bundled, self.dim) {
            (Some(name), None) if self.constraints.is_empty() => bundled(name).map_err(cfg_err),
            (None, Some(dim)) if !self.constraints.is_empty() => {
                let names = complex_var_names(dim);
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let cons = self
                    .constraints
                    .iter()
                    .map(|s| Expr::parse(s, &refs).map(Constraint::from_expr).map_err(cfg_err))
                    .collect::<Result<Vec<_>>>()?;
                let mut d = DomainSpec::new("config", dim, cons).map_err(cfg_err)?.convex(self.convex);
                if let Some(r) = self.bound {
                    d = d.bounded_by(r);
                }
                Ok(d)
            }
            _ => Err(Error::Config(
                "[domain] needs either `bundled` alone or `dim` with `constraints`".into(),
            )),
        }
    }
}

fn parse_point(raw: &[f64], dim: usize) -> Result<CPoint> {
    if raw.len() != 2 * dim {
        return Err(Error::Config(format!("point needs {} reals, got {}", 2 * dim, raw.len())));
    }
    Ok(CPoint(raw.chunks(2).map(|p| c(p[0], p[1])).collect()))
}

/// Runs a parsed config.  `seed` and `tol` override the file when given.
pub fn run_config(cfg: &ScenarioConfig, seed: Option<u64>, tol: Option<f64>) -> Result<Report> {
    let d = cfg.domain.build()?;
    let seed = seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let tol = tol.unwrap_or(cfg.tol);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new(&cfg.name, seed, tol);
    let sample_radius = if d.bounding_radius.is_finite() { d.bounding_radius } else { 1.0 };

    for (i, st) in cfg.stages.iter().enumerate() {
        let stage = format!("{}_{}", i, st.op());
        report.stage(&stage);
        match st {
            StageConfig::BoundaryDistance { points, expect } => {
                let pts = points.iter().map(|p| parse_point(p, d.dim)).collect::<Result<Vec<_>>>()?;
                if let Some(e) = expect {
                    if e.len() != pts.len() {
                        return Err(Error::Config(format!("{stage}: expect has {} values for {} points", e.len(), pts.len())));
                    }
                }
                for (k, z) in pts.iter().enumerate() {
                    let got = boundary_distance(&d, z)?;
                    report.record(Record::new(&stage, "boundary_distance", got).input("index", k as f64));
                    if let Some(e) = expect {
                        report.check(&stage, &format!("point_{k}"), (got - e[k]).abs(), Relation::Le, tol);
                    }
                }
            }
            StageConfig::Graham { samples } => {
                let pts = sample_in_domain(&d, *samples, sample_radius, &mut rng)?;
                let mut worst = f64::NEG_INFINITY;
                for z in &pts {
                    let v = unit_direction(d.dim, &mut rng);
                    let (lo, hi) = graham_bounds(&d, z, &v)?;
                    let ins = inscribed_ball_upper_bound(&d, z, &v)?;
                    report.record(Record::from_bound(&stage, "graham_lower", &lo));
                    worst = worst.max((hi.value - ins.value) / ins.value);
                }
                report.check(&stage, "upper_over_inscribed", worst, Relation::Le, tol);
            }
            StageConfig::Psh { witness, samples } => {
                let names = complex_var_names(d.dim);
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let e = Expr::parse(witness, &refs).map_err(cfg_err)?;
                let u = PshWitness::new(witness.clone(), move |z: &CPoint| e.eval(&z.0).re);
                let pts = sample_in_domain(&d, *samples, sample_radius, &mut rng)?;
                let dirs: Vec<CPoint> = (0..4).map(|_| unit_direction(d.dim, &mut rng)).collect();
                let rep = check_psh(&u, &d, &pts, &dirs)?;
                report.record(Record::new(&stage, "min_levi", rep.min_levi).input("checked", rep.checked as f64));
                report.check(&stage, "violations", rep.violations as f64, Relation::Eq, 0.0);
            }
            StageConfig::Dini {
                modulus,
                eps,
                expect,
                value,
            } => {
                let w = ModulusOfContinuity::from_expr(modulus, *eps).map_err(cfg_err)?;
                let res = dini_integral(&w, *eps)?;
                report.record(Record::new(&stage, "dini", res.value().unwrap_or(f64::INFINITY)).method(modulus));
                let want = (*expect == DiniExpect::Divergent) as u8 as f64;
                report.check(&stage, "divergent", res.is_divergent() as u8 as f64, Relation::Eq, want);
                if let (Some(v), Some(got)) = (value, res.value()) {
                    report.check(&stage, "value_error", (got - v).abs(), Relation::Le, tol);
                }
            }
            StageConfig::InfiniteType { phi, max_order } => {
                let e = Expr::parse(phi, &["x"]).map_err(cfg_err)?;
                let f = move |x: f64| e.eval_real(&[x]);
                let orders: Vec<u32> = (1..=*max_order).collect();
                let rep = infinite_type_check(&f, &orders).map_err(cfg_err)?;
                let first_fail = rep.finite_type_at_most.map_or(0.0, |k| k as f64);
                report.record(Record::new(&stage, "first_failing_order", first_fail));
                report.check(&stage, "failing_orders", rep.checks.iter().filter(|c| !c.pass).count() as f64, Relation::Eq, 0.0);
            }
        }
    }
    report.end_stage();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BALL: &str = r#"
name = "ball"
seed = 3
[domain]
dim = 2
constraints = ["abs(z1)^2 + abs(z2)^2 - 1"]
convex = true
bound = 1.0

[[stage]]
op = "boundary_distance"
points = [[0.3, 0.0, 0.0, 0.4]]
expect = [0.5]

[[stage]]
op = "dini"
modulus = "r^0.5"
expect = "finite"
value = 2.0

[[stage]]
op = "infinite_type"
phi = "exp(-1/x^2)"
max_order = 8
"#;

    #[test]
    fn inline_domain_runs() {
        let cfg = parse_config(BALL).unwrap();
        assert_eq!(cfg.stages.len(), 3);
        let rep = run_config(&cfg, None, None).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
        assert_eq!(rep.seed, 3);
    }

    #[test]
    fn malformed_configs_are_config_errors() {
        let bad = [
            "name = 1",
            "name = \"x\"\n[domain]\nbundled = \"nope\"\n",
            "name = \"x\"\n[domain]\nbundled = \"ball\"\ndim = 2\n",
            "name = \"x\"\ntol = -1\n[domain]\nbundled = \"ball\"\n",
            "name = \"x\"\n[domain]\nbundled = \"ball\"\n[[stage]]\nop = \"warp\"\n",
        ];
        for text in bad {
            let r = parse_config(text).and_then(|c| run_config(&c, None, None));
            assert!(matches!(r, Err(Error::Config(_))), "{text}: {r:?}");
        }
    }
}
