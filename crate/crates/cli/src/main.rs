use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use kobex_core::domains::{boundary_distance, bundled, nearest_boundary_point, BUNDLED_NAMES};
use kobex_core::extension::{boundary_grid, ex21_chart_map, ex21_psi, extend_map, ExtensionResult};
use kobex_core::metrics::{
    convex_distance_lower_bound, graham_bounds, inscribed_ball_upper_bound, kob_distance_ball_exact,
    kob_metric_ball_exact, path_distance_upper, MetricBound, PathSettings,
};
use kobex_core::regularity::ex21_chart;
use kobex_core::scenarios::{explain, list_scenarios, load_config, run_config, run_scenario, Report, RunOptions, Table};
use kobex_core::{c, CPoint, Error};

const EXIT_VERDICT: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "kobex", version, about = "Boundary geometry and invariant-metric checks for domains in C^n")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Override the scenario tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for the single random generator of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the report and CSV files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write tables as CSV.
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a bundled scenario by name, or a TOML scenario file.
    Run {
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// List bundled scenarios.
    List,
    /// Show the stages of a scenario and what each one checks.
    Explain { scenario: String },
    /// Boundary distance of a point; with --to, bounds on the Kobayashi distance.
    Distance {
        #[arg(long, default_value = "ball")]
        domain: String,
        /// Point as comma-separated re,im pairs.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<String>,
    },
    /// Graham and inscribed-ball bounds on the Kobayashi metric.
    Metric {
        #[arg(long, default_value = "ball")]
        domain: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
    },
    /// Boundary values of F(z,w) = (z^2, w) on the Ex21 chart by normal integration.
    Extend {
        #[arg(long, default_value_t = 5)]
        per_side: usize,
        #[arg(long, default_value_t = 0.05)]
        half_width: f64,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Config(String),
    Verdict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Config(msg),
            Error::Parse { .. } | Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => {
                Failure::Config(e.to_string())
            }
            other => Failure::Verdict(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let res = match cli.cmd {
        Cmd::Run { scenario, common } => cmd_run(&scenario, &common),
        Cmd::List => cmd_list(),
        Cmd::Explain { scenario } => cmd_explain(&scenario),
        Cmd::Distance { domain, point, to } => cmd_distance(&domain, &point, to.as_deref()),
        Cmd::Metric { domain, point, direction } => cmd_metric(&domain, &point, &direction),
        Cmd::Extend {
            per_side,
            half_width,
            common,
        } => cmd_extend(per_side, half_width, &common),
    };
    eprintln!("wall-clock {:.3?}", started.elapsed());
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERDICT),
        Err(Failure::Verdict(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VERDICT)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn parse_point(s: &str) -> Result<CPoint, Failure> {
    let xs: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Config(format!("bad point '{s}': {e}")))?;
    if xs.is_empty() || xs.len() % 2 != 0 {
        return Err(Failure::Config(format!("point '{s}' needs an even number of reals (re,im pairs)")));
    }
    Ok(CPoint(xs.chunks(2).map(|p| c(p[0], p[1])).collect()))
}

fn domain(name: &str) -> Result<kobex_core::domains::DomainSpec, Failure> {
    bundled(name).map_err(|_| Failure::Config(format!("unknown domain '{name}', expected one of {BUNDLED_NAMES:?}")))
}

fn prepare_out(common: &Common) -> Result<Option<&Path>, Failure> {
    match &common.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

fn write_table(dir: &Path, prefix: &str, t: &Table) -> Result<PathBuf, Failure> {
    let path = dir.join(format!("{prefix}.{}.csv", t.name));
    let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::Config(e.to_string()))?;
    w.write_record(&t.header).map_err(|e| Failure::Config(e.to_string()))?;
    for row in &t.rows {
        w.write_record(row).map_err(|e| Failure::Config(e.to_string()))?;
    }
    w.flush()?;
    Ok(path)
}

fn emit_report(rep: &Report, common: &Common) -> Result<(), Failure> {
    match prepare_out(common)? {
        Some(dir) => {
            let path = dir.join(format!("{}.jsonl", rep.scenario));
            fs::write(&path, rep.to_jsonl())?;
            eprintln!("report {}", path.display());
        }
        None => io::stdout().write_all(rep.to_jsonl().as_bytes())?,
    }
    if common.csv {
        let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
        for t in &rep.tables {
            eprintln!("table {}", write_table(&dir, &rep.scenario, t)?.display());
        }
    }
    Ok(())
}

fn cmd_run(scenario: &str, common: &Common) -> Result<bool, Failure> {
    let path = Path::new(scenario);
    let rep = if scenario.ends_with(".toml") || path.is_file() {
        run_config(&load_config(path)?, common.seed, common.tol)?
    } else {
        let mut opts = RunOptions {
            tol: common.tol,
            ..RunOptions::default()
        };
        if let Some(s) = common.seed {
            opts.seed = s;
        }
        run_scenario(scenario, opts)?
    };
    emit_report(&rep, common)?;
    for (stage, took) in &rep.timings {
        eprintln!("stage {stage}: {took:.3?}");
    }
    for v in rep.failures() {
        eprintln!(
            "FAIL {}/{}: {:e} {} {:e}",
            v.stage,
            v.name,
            v.observed,
            v.relation.symbol(),
            v.threshold
        );
    }
    let passed = rep.verdicts.iter().filter(|v| v.pass).count();
    eprintln!("{}: {passed}/{} verdicts pass", rep.scenario, rep.verdicts.len());
    Ok(rep.passed())
}

fn cmd_list() -> Result<bool, Failure> {
    for s in list_scenarios() {
        println!("{:<18} {}", s.name, s.summary);
    }
    Ok(true)
}

fn cmd_explain(name: &str) -> Result<bool, Failure> {
    let info = explain(name)?;
    println!("{}: {}", info.name, info.summary);
    println!("default tol {:e}", info.default_tol);
    for st in info.stages {
        println!("  {:<20} {:<22} {}", st.name, st.op, st.formula);
    }
    Ok(true)
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<(), Failure> {
    let s = serde_json::to_string(v).map_err(|e| Failure::Verdict(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn cmd_distance(name: &str, point: &str, to: Option<&str>) -> Result<bool, Failure> {
    let d = domain(name)?;
    let z = parse_point(point)?;
    z.check_dim(d.dim)?;
    let dz = boundary_distance(&d, &z)?;
    let near = nearest_boundary_point(&d, &z)?;
    print_json(&serde_json::json!({ "op": "boundary_distance", "value": dz, "nearest": near.to_real_vec() }))?;
    if let Some(to) = to {
        let w = parse_point(to)?;
        w.check_dim(d.dim)?;
        let upper = path_distance_upper(&d, &z, &w, &PathSettings::default())?;
        print_json(&serde_json::json!({ "op": "path_upper", "value": upper }))?;
        if d.is_convex {
            let lower = convex_distance_lower_bound(dz, boundary_distance(&d, &w)?)?;
            print_json(&lower)?;
        }
        if name == "ball" {
            print_json(&serde_json::json!({ "op": "exact", "value": kob_distance_ball_exact(&z, &w)? }))?;
        }
    }
    Ok(true)
}

fn cmd_metric(name: &str, point: &str, direction: &str) -> Result<bool, Failure> {
    let d = domain(name)?;
    let z = parse_point(point)?;
    let v = parse_point(direction)?;
    z.check_dim(d.dim)?;
    v.check_dim(d.dim)?;
    let mut bounds: Vec<MetricBound> = Vec::new();
    if d.is_convex {
        let (lo, hi) = graham_bounds(&d, &z, &v)?;
        bounds.extend([lo, hi]);
    }
    bounds.push(inscribed_ball_upper_bound(&d, &z, &v)?);
    for b in &bounds {
        print_json(b)?;
    }
    if name == "ball" {
        print_json(&serde_json::json!({ "method": "exact_oracle", "value": kob_metric_ball_exact(&z, &v)? }))?;
    }
    Ok(true)
}

fn cmd_extend(per_side: usize, half_width: f64, common: &Common) -> Result<bool, Failure> {
    if per_side == 0 || half_width.is_nan() || half_width <= 0.0 {
        return Err(Failure::Config("--per-side and --half-width must be positive".into()));
    }
    let tol = common.tol.unwrap_or(1e-7);
    let chart = ex21_chart();
    let grid = boundary_grid(&chart, per_side, half_width);
    let results = extend_map(&ex21_chart_map(), &chart, &ex21_psi(1.0)?, &grid, tol)?;
    let table = Table {
        name: "extension".into(),
        header: ExtensionResult::csv_header(2),
        rows: results.iter().map(ExtensionResult::csv_row).collect(),
    };
    match prepare_out(common)? {
        Some(dir) => eprintln!("table {}", write_table(dir, "extend", &table)?.display()),
        None => {
            let mut w = csv::Writer::from_writer(io::stdout());
            w.write_record(&table.header).map_err(|e| Failure::Config(e.to_string()))?;
            for row in &table.rows {
                w.write_record(row).map_err(|e| Failure::Config(e.to_string()))?;
            }
            w.flush()?;
        }
    }
    Ok(true)
}
