use std::path::PathBuf;
use std::process::{Command, Output};

fn kobex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kobex")).args(args).output().expect("spawn kobex")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).display().to_string()
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kobex-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn list_names_every_bundled_scenario() {
    let o = kobex(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["example21", "example22", "ball-sandwich", "extension-oracle", "dini-suite", "embedding-suite", "dichotomy-demo"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn explain_lists_stages_and_rejects_unknown_names() {
    let o = kobex(&["explain", "example21"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for stage in ["step1", "tdist", "levi"] {
        assert!(text.contains(stage), "{stage}");
    }
    assert_eq!(kobex(&["explain", "nope"]).status.code(), Some(3));
}

#[test]
fn run_exit_codes() {
    assert_eq!(kobex(&["run", "dini-suite"]).status.code(), Some(0));
    assert_eq!(kobex(&["run", "dini-suite", "--tol", "1e-300"]).status.code(), Some(2));
    assert_eq!(kobex(&["run", "dini-suite", "--tol=-1"]).status.code(), Some(3));
    assert_eq!(kobex(&["run", "no-such-scenario"]).status.code(), Some(3));
    assert_eq!(kobex(&["run", "missing.toml"]).status.code(), Some(3));
}

#[test]
fn reports_are_byte_identical_for_a_seed() {
    let a = kobex(&["run", "ball-sandwich", "--seed", "5"]);
    let b = kobex(&["run", "ball-sandwich", "--seed", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let first = stdout(&a).lines().next().unwrap().to_string();
    assert!(first.contains("\"seed\":5") && first.contains("kobex.report/1"), "{first}");
}

#[test]
fn out_and_csv_write_files() {
    let dir = scratch("out");
    let o = kobex(&["run", "dichotomy-demo", "--out", dir.to_str().unwrap(), "--csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.join("dichotomy-demo.jsonl").is_file());
    let csv = std::fs::read_to_string(dir.join("dichotomy-demo.dichotomy_distinct.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    assert!(csv.starts_with("nu,"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn toml_config_runs_and_seed_flag_overrides() {
    let path = config("ball-inline.toml");
    let o = kobex(&["run", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().next().unwrap().contains("\"seed\":7"));
    let o = kobex(&["run", &path, "--seed", "8"]);
    assert!(stdout(&o).lines().next().unwrap().contains("\"seed\":8"));
}

#[test]
fn malformed_config_exits_3() {
    let dir = scratch("bad");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.toml");
    std::fs::write(&path, "name = \"x\"\n[domain]\nbundled = \"nowhere\"\n").unwrap();
    assert_eq!(kobex(&["run", path.to_str().unwrap()]).status.code(), Some(3));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn metric_and_distance_on_the_ball_bracket_the_exact_values() {
    let o = kobex(&["metric", "--point", "0.3,0,0,0.4", "--direction", "0,0,1,0"]);
    assert_eq!(o.status.code(), Some(0));
    let vals: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let get = |m: &str| vals.iter().find(|v| v["method"] == m).unwrap()["value"].as_f64().unwrap();
    let exact = get("exact_oracle");
    assert!(get("graham_lower") <= exact * (1.0 + 1e-9));
    assert!(exact <= get("graham_upper") * (1.0 + 1e-9));

    let o = kobex(&["distance", "--point", "0.1,0,0.2,0", "--to", "-0.3,0.1,0,0.2"]);
    assert_eq!(o.status.code(), Some(0));
    let vals: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!((vals[0]["value"].as_f64().unwrap() - (1.0 - 0.05f64.sqrt())).abs() < 1e-9);
    let by_op = |op: &str| vals.iter().find(|v| v["op"] == op).unwrap()["value"].as_f64().unwrap();
    assert!(by_op("exact") <= by_op("path_upper"));

    assert_eq!(kobex(&["metric", "--point", "0.3,0", "--direction", "1,0,0,0"]).status.code(), Some(3));
    assert_eq!(kobex(&["distance", "--domain", "moon", "--point", "0,0,0,0"]).status.code(), Some(3));
}

#[test]
fn extend_emits_one_csv_row_per_grid_point() {
    let o = kobex(&["extend", "--per-side", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 9);
    assert!(text.lines().skip(1).all(|l| l.contains(",true,")));
}
