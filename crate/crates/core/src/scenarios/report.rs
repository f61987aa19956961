//! Line-delimited JSON reports.
//!
//! Every line is an object with a `kind` field: one `header`, then `record`
//! and `verdict` lines in execution order, then one `summary`.  A verdict
//! stores its observed value, threshold and relation, so `pass` can be
//! recomputed from the line alone.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::metrics::{MetricBound, Side};

pub const REPORT_SCHEMA: &str = "kobex.report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl Relation {
    pub fn holds(self, observed: f64, threshold: f64) -> bool {
        match self {
            Relation::Le => observed <= threshold,
            Relation::Lt => observed < threshold,
            Relation::Ge => observed >= threshold,
            Relation::Gt => observed > threshold,
            Relation::Eq => observed == threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "==",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub stage: String,
    pub op: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub side: Option<String>,
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub inputs: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl Record {
    pub fn new(stage: &str, op: &str, value: f64) -> Self {
        Record {
            stage: stage.to_string(),
            op: op.to_string(),
            method: None,
            side: None,
            value: value.is_finite().then_some(value),
            inputs: BTreeMap::new(),
            constants: BTreeMap::new(),
            tolerances: BTreeMap::new(),
        }
    }

    pub fn from_bound(stage: &str, op: &str, b: &MetricBound) -> Self {
        let mut r = Record::new(stage, op, b.value);
        r.method = serde_json::to_value(b.method).ok().and_then(|v| v.as_str().map(String::from));
        r.side = Some(match b.side {
            Side::Lower => "lower".into(),
            Side::Upper => "upper".into(),
        });
        r.inputs = b.inputs.clone();
        r
    }

    pub fn method(mut self, m: &str) -> Self {
        self.method = Some(m.to_string());
        self
    }

    pub fn input(mut self, k: &str, v: f64) -> Self {
        self.inputs.insert(k.to_string(), v);
        self
    }

    pub fn constant(mut self, k: &str, v: f64) -> Self {
        self.constants.insert(k.to_string(), v);
        self
    }

    pub fn tolerance(mut self, k: &str, v: f64) -> Self {
        self.tolerances.insert(k.to_string(), v);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub stage: String,
    pub name: String,
    pub pass: bool,
    pub observed: f64,
    pub threshold: f64,
    pub relation: Relation,
}

impl Verdict {
    pub fn check(stage: &str, name: &str, observed: f64, relation: Relation, threshold: f64) -> Self {
        Verdict {
            stage: stage.to_string(),
            name: name.to_string(),
            pass: relation.holds(observed, threshold),
            observed,
            threshold,
            relation,
        }
    }

    /// `observed relation threshold`, from the stored numbers only.
    pub fn recompute(&self) -> bool {
        self.relation.holds(self.observed, self.threshold)
    }
}

/// Tabular output destined for CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub version: String,
    pub seed: u64,
    pub tol: f64,
    pub records: Vec<Record>,
    pub verdicts: Vec<Verdict>,
    pub tables: Vec<Table>,
    /// Wall-clock per stage.  Never serialized, so reports stay reproducible.
    pub timings: Vec<(String, Duration)>,
    /// Interleaving of records and verdicts, as emitted.
    order: Vec<Entry>,
    open_stage: Option<(String, Instant)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Entry {
    Record(usize),
    Verdict(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Line {
    Header {
        schema: String,
        scenario: String,
        version: String,
        seed: u64,
        tol: f64,
    },
    Record(Record),
    Verdict(Verdict),
    Summary {
        verdicts: usize,
        passed: usize,
        failed: usize,
        pass: bool,
    },
}

impl Report {
    pub fn new(scenario: &str, seed: u64, tol: f64) -> Self {
        Report {
            scenario: scenario.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            tol,
            records: Vec::new(),
            verdicts: Vec::new(),
            tables: Vec::new(),
            timings: Vec::new(),
            order: Vec::new(),
            open_stage: None,
        }
    }

    /// Closes the running stage timer and starts one for `name`.  No clock on
    /// bare wasm32, so nothing is timed there.
    pub fn stage<'a>(&mut self, name: &'a str) -> &'a str {
        self.end_stage();
        if cfg!(not(all(target_arch = "wasm32", target_os = "unknown"))) {
            self.open_stage = Some((name.to_string(), Instant::now()));
        }
        name
    }

    pub fn end_stage(&mut self) {
        if let Some((name, t)) = self.open_stage.take() {
            self.timings.push((name, t.elapsed()));
        }
    }

    pub fn stage_time(&self, name: &str) -> Option<Duration> {
        self.timings.iter().find(|(n, _)| n == name).map(|(_, d)| *d)
    }

    pub fn record(&mut self, r: Record) {
        self.order.push(Entry::Record(self.records.len()));
        self.records.push(r);
    }

    pub fn verdict(&mut self, v: Verdict) -> bool {
        let pass = v.pass;
        self.order.push(Entry::Verdict(self.verdicts.len()));
        self.verdicts.push(v);
        pass
    }

    /// Shorthand for [`Verdict::check`] followed by [`Report::verdict`].
    pub fn check(&mut self, stage: &str, name: &str, observed: f64, relation: Relation, threshold: f64) -> bool {
        self.verdict(Verdict::check(stage, name, observed, relation, threshold))
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }

    pub fn lines(&self) -> Vec<Line> {
        let mut out = vec![Line::Header {
            schema: REPORT_SCHEMA.to_string(),
            scenario: self.scenario.clone(),
            version: self.version.clone(),
            seed: self.seed,
            tol: self.tol,
        }];
        for e in &self.order {
            out.push(match *e {
                Entry::Record(i) => Line::Record(self.records[i].clone()),
                Entry::Verdict(i) => Line::Verdict(self.verdicts[i].clone()),
            });
        }
        let passed = self.verdicts.iter().filter(|v| v.pass).count();
        out.push(Line::Summary {
            verdicts: self.verdicts.len(),
            passed,
            failed: self.verdicts.len() - passed,
            pass: self.passed(),
        });
        out
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for line in self.lines() {
            s.push_str(&serde_json::to_string(&line).expect("report lines serialize"));
            s.push('\n');
        }
        s
    }
}

/// Parses a report back into lines.
pub fn parse_jsonl(text: &str) -> serde_json::Result<Vec<Line>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_recompute_after_round_trip() {
        let mut r = Report::new("t", 1, 1e-6);
        r.record(Record::new("s", "op", 0.1 + 0.2).input("x", 1.0 / 3.0));
        r.check("s", "small", 0.1 + 0.2, Relation::Le, 0.3);
        r.check("s", "equal", 1.0 / 3.0, Relation::Eq, 1.0 / 3.0);
        r.record(Record::new("s", "inf", f64::INFINITY));
        let lines = parse_jsonl(&r.to_jsonl()).unwrap();
        assert_eq!(lines.len(), 6);
        let mut seen = 0;
        for l in lines {
            if let Line::Verdict(v) = l {
                assert_eq!(v.recompute(), v.pass);
                seen += 1;
            }
        }
        assert_eq!(seen, 2);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn header_comes_first_and_summary_last() {
        let r = Report::new("t", 9, 1e-3);
        let text = r.to_jsonl();
        let first = text.lines().next().unwrap();
        assert!(first.contains("\"kind\":\"header\"") && first.contains(REPORT_SCHEMA));
        assert!(text.lines().last().unwrap().contains("\"kind\":\"summary\""));
    }
}
