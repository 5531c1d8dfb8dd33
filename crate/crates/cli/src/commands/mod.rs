//! One module per command family. Every command turns the shared [`Ctx`]
//! into an [`Outcome`]; `main` wraps it into a report.

pub mod diagonal;
pub mod online;
pub mod solve;
pub mod structures;
pub mod transform;

use anyhow::Result;
use punctual::clock::{certify_punctual, Budget, Certificate, PunctualStream};
use serde::Serialize;
use serde_json::{json, Value};

use crate::instance::{generate, FixtureKind};
use crate::report::Outcome;

/// Run parameters shared by every command. `None` means the command's default.
#[derive(Debug, Clone)]
pub struct Ctx {
    /// Contents of `--instance`.
    pub instance: Option<String>,
    pub horizon: Option<u64>,
    pub budget_c: Option<u64>,
    pub budget_k: Option<u32>,
    pub seed: u64,
    pub audit: bool,
}

impl Ctx {
    /// The instance text, or a seeded instance of `kind` when none was given.
    pub fn text(&self, kind: FixtureKind) -> String {
        self.instance.clone().unwrap_or_else(|| generate(kind, self.seed, kind.default_size()))
    }

    pub fn horizon_or(&self, default: u64) -> u64 {
        self.horizon.unwrap_or(default)
    }

    pub fn budget_or(&self, default: Budget) -> Budget {
        Budget::new(self.budget_c.unwrap_or(default.c), self.budget_k.unwrap_or(default.k))
    }

    /// Certifies `s` and records the effective horizon and budget in `out`.
    pub fn certify<S: PunctualStream + ?Sized>(&self, s: &mut S, out: &mut Outcome, horizon: u64, budget: Budget) -> Result<Certificate<S::Item>> {
        let (h, b) = (self.horizon_or(horizon), self.budget_or(budget));
        out.horizon = h;
        out.budget = b;
        Ok(certify_punctual(s, h, b)?)
    }
}

/// Fills the stage and fuel columns and queues the `{stage, output, fuel}` trace.
pub fn record_stages<T>(out: &mut Outcome, cert: &Certificate<T>, emit: Option<&std::path::PathBuf>, show: impl Fn(&T) -> Value) {
    out.stages = cert.outputs.iter().map(show).collect();
    out.fuel = cert.fuel.clone();
    if let Some(path) = emit {
        out.emits.push((path.clone(), trace(&out.stages, &out.fuel)));
    }
}

pub fn trace(stages: &[Value], fuel: &[u64]) -> String {
    let mut text = String::new();
    for (t, o) in stages.iter().enumerate() {
        let f = fuel.get(t).map_or(Value::Null, |&f| json!(f));
        text.push_str(&json!({"stage": t, "output": o, "fuel": f}).to_string());
        text.push('\n');
    }
    text
}

/// JSONL text of `items`.
pub fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut text = String::new();
    for i in items {
        text.push_str(&serde_json::to_string(&i).expect("records serialize"));
        text.push('\n');
    }
    text
}

/// Error values inside stream items become command errors.
pub fn lift<T: Clone>(items: &[punctual::Result<T>]) -> Result<Vec<T>> {
    Ok(items.iter().cloned().collect::<punctual::Result<Vec<T>>>()?)
}
