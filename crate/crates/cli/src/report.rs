//! Versioned JSON reports and the deterministic comparison used by replay
//! and golden regression.

use std::path::PathBuf;

use punctual::clock::Budget;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: &str = "punctual-report/1";

/// Everything needed to re-execute a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    /// Command line after the program name, without output-only flags.
    pub argv: Vec<String>,
    /// Directory relative paths in `argv` are resolved against.
    pub cwd: PathBuf,
    pub horizon: u64,
    pub budget: Budget,
    pub seed: u64,
    pub audit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Audit {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Audit {
    pub fn check(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Audit { name: name.into(), passed, detail: detail.into() }
    }
}

/// What a command produces before it is wrapped in a report.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub stages: Vec<Value>,
    pub fuel: Vec<u64>,
    pub audits: Vec<Audit>,
    pub solution: Value,
    /// Side files (`--emit`, `--emit-iso`), written only on live runs.
    pub emits: Vec<(PathBuf, String)>,
    /// Effective horizon and budget after command defaults.
    pub horizon: u64,
    pub budget: Budget,
}

impl Outcome {
    pub fn audit(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.audits.push(Audit::check(name, passed, detail));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenario: Scenario,
    pub stages: Vec<Value>,
    pub fuel: Vec<u64>,
    pub audits: Vec<Audit>,
    pub solution: Value,
    /// Wall-clock time; the only section replay ignores.
    pub elapsed_ms: u64,
}

impl Report {
    pub fn new(scenario: Scenario, outcome: &Outcome, elapsed_ms: u64) -> Self {
        Report {
            schema: SCHEMA.into(),
            scenario,
            stages: outcome.stages.clone(),
            fuel: outcome.fuel.clone(),
            audits: outcome.audits.clone(),
            solution: outcome.solution.clone(),
            elapsed_ms,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.audits.iter().all(|a| a.passed)
    }
}

/// First difference between the deterministic sections of two reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub section: &'static str,
    /// Stage index for the per-stage sections.
    pub stage: Option<usize>,
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.stage {
            Some(s) => write!(f, "{} differs first at stage {s}", self.section),
            None => write!(f, "{} differs", self.section),
        }
    }
}

fn bytes<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("report values serialize")
}

fn first_diff<T: Serialize>(a: &[T], b: &[T]) -> Option<usize> {
    let n = a.len().min(b.len());
    (0..n).find(|&i| bytes(&a[i]) != bytes(&b[i])).or((a.len() != b.len()).then_some(n))
}

/// Byte comparison of every section except the wall-clock time.
pub fn compare(recorded: &Report, fresh: &Report) -> Option<Divergence> {
    if recorded.schema != fresh.schema {
        return Some(Divergence { section: "schema", stage: None });
    }
    if let Some(s) = first_diff(&recorded.stages, &fresh.stages) {
        return Some(Divergence { section: "stages", stage: Some(s) });
    }
    if let Some(s) = first_diff(&recorded.fuel, &fresh.fuel) {
        return Some(Divergence { section: "fuel", stage: Some(s) });
    }
    if bytes(&recorded.audits) != bytes(&fresh.audits) {
        return Some(Divergence { section: "audits", stage: None });
    }
    if bytes(&recorded.solution) != bytes(&fresh.solution) {
        return Some(Divergence { section: "solution", stage: None });
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn report(stages: Vec<Value>, fuel: Vec<u64>) -> Report {
        let scenario = Scenario { argv: vec![], cwd: PathBuf::new(), horizon: 1, budget: Budget::default(), seed: 0, audit: true };
        Report::new(scenario, &Outcome { stages, fuel, ..Outcome::default() }, 0)
    }

    #[test]
    fn divergence_names_the_first_stage() {
        let a = report(vec![json!(1), json!(2), json!(3)], vec![1, 1, 1]);
        assert_eq!(compare(&a, &a.clone()), None);
        let mut b = a.clone();
        b.elapsed_ms = 99;
        assert_eq!(compare(&a, &b), None);
        b.fuel[2] = 7;
        assert_eq!(compare(&a, &b), Some(Divergence { section: "fuel", stage: Some(2) }));
        let c = report(vec![json!(1), json!(2)], vec![1, 1, 1]);
        assert_eq!(compare(&a, &c), Some(Divergence { section: "stages", stage: Some(2) }));
    }
}
