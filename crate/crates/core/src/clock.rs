//! Clocked computation model: step oracles, fuel accounting and budgeted
//! output streams.
//!
//! A [`StepOracle`] is a stage-indexed approximation of a total function. A
//! [`PunctualStream`] produces one output per stage and pays for its work
//! through a [`FuelMeter`]; [`certify_punctual`] replays a stream against a
//! [`Budget`] and fails at the first stage that overspends.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, OutOfFuel, Result};

/// Result of querying an oracle at some stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step<V = u64> {
    NotYet,
    Done(V),
}

impl<V> Step<V> {
    pub fn done(self) -> Option<V> {
        match self {
            Step::Done(v) => Some(v),
            Step::NotYet => None,
        }
    }

    pub fn is_done(&self) -> bool {
        matches!(self, Step::Done(_))
    }
}

/// Stage-indexed partial computation. Once `eval(q, t)` is `Done(v)` it stays
/// `Done(v)` for every later stage.
pub trait StepOracle<Q: ?Sized = u64, V = u64>: Send + Sync {
    fn eval(&self, q: &Q, t: u64) -> Step<V>;

    fn label(&self) -> String {
        "oracle".to_string()
    }
}

impl<Q: ?Sized, V, O: StepOracle<Q, V> + ?Sized> StepOracle<Q, V> for Arc<O> {
    fn eval(&self, q: &Q, t: u64) -> Step<V> {
        (**self).eval(q, t)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

impl<Q: ?Sized, V, O: StepOracle<Q, V> + ?Sized> StepOracle<Q, V> for &O {
    fn eval(&self, q: &Q, t: u64) -> Step<V> {
        (**self).eval(q, t)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

type TimedFn<Q, V> = dyn Fn(&Q) -> (u64, V) + Send + Sync;

/// Oracle given by a convergence time and a limit value per query.
///
/// Every monotone deterministic oracle has this shape, so fixtures and test
/// generators are all expressed through it.
pub struct Delayed<Q: ?Sized = u64, V = u64> {
    label: String,
    f: Arc<TimedFn<Q, V>>,
}

impl<Q: ?Sized, V> Clone for Delayed<Q, V> {
    fn clone(&self) -> Self {
        Delayed { label: self.label.clone(), f: Arc::clone(&self.f) }
    }
}

impl<Q: ?Sized, V> fmt::Debug for Delayed<Q, V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Delayed({})", self.label)
    }
}

impl<Q: ?Sized, V: 'static> Delayed<Q, V> {
    /// `f(q)` returns `(t_converge, value)`.
    pub fn new(label: impl Into<String>, f: impl Fn(&Q) -> (u64, V) + Send + Sync + 'static) -> Self {
        Delayed { label: label.into(), f: Arc::new(f) }
    }

    /// Converges at stage 0 everywhere.
    pub fn instant(label: impl Into<String>, f: impl Fn(&Q) -> V + Send + Sync + 'static) -> Self {
        Delayed::new(label, move |q| (0, f(q)))
    }

    pub fn converges_at(&self, q: &Q) -> u64 {
        (self.f)(q).0
    }

    /// The value the oracle eventually settles on.
    pub fn limit(&self, q: &Q) -> V {
        (self.f)(q).1
    }
}

impl<Q: ?Sized, V> StepOracle<Q, V> for Delayed<Q, V> {
    fn eval(&self, q: &Q, t: u64) -> Step<V> {
        let (tc, v) = (self.f)(q);
        if t >= tc {
            Step::Done(v)
        } else {
            Step::NotYet
        }
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Oracle that never converges.
#[derive(Debug, Clone, Copy, Default)]
pub struct Divergent;

impl<Q: ?Sized, V> StepOracle<Q, V> for Divergent {
    fn eval(&self, _q: &Q, _t: u64) -> Step<V> {
        Step::NotYet
    }
    fn label(&self) -> String {
        "divergent".to_string()
    }
}

/// One line of an oracle fixture file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<usize>,
    pub x: u64,
    pub t_converge: u64,
    pub value: u64,
}

/// Oracle read from a JSONL fixture. Inputs missing from the file never converge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixtureOracle {
    label: String,
    records: BTreeMap<u64, (u64, u64)>,
}

impl FixtureOracle {
    pub fn from_records(label: impl Into<String>, records: impl IntoIterator<Item = FixtureRecord>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for r in records {
            if map.insert(r.x, (r.t_converge, r.value)).is_some() {
                return Err(Error::Parse(format!("duplicate record for x = {}", r.x)));
            }
        }
        Ok(FixtureOracle { label: label.into(), records: map })
    }

    pub fn from_jsonl(label: impl Into<String>, text: &str) -> Result<Self> {
        FixtureOracle::from_records(label, parse_jsonl::<FixtureRecord>(text)?)
    }

    pub fn records(&self) -> impl Iterator<Item = FixtureRecord> + '_ {
        self.records.iter().map(|(&x, &(t_converge, value))| FixtureRecord { e: None, x, t_converge, value })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Largest input with a record.
    pub fn max_input(&self) -> Option<u64> {
        self.records.keys().next_back().copied()
    }
}

impl StepOracle for FixtureOracle {
    fn eval(&self, x: &u64, t: u64) -> Step {
        match self.records.get(x) {
            Some(&(tc, v)) if t >= tc => Step::Done(v),
            _ => Step::NotYet,
        }
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Parses one JSON value per non-blank line.
pub fn parse_jsonl<T: serde::de::DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
        .collect()
}

/// Finite enumeration `(f_e)` of unary oracles with stage lookup `U(e, x, s)`.
#[derive(Clone)]
pub struct UniversalTable {
    entries: Vec<Arc<dyn StepOracle>>,
}

impl fmt::Debug for UniversalTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.iter().map(|e| e.label())).finish()
    }
}

impl UniversalTable {
    pub fn new(entries: Vec<Arc<dyn StepOracle>>) -> Self {
        UniversalTable { entries }
    }

    pub fn from_delayed(entries: impl IntoIterator<Item = Delayed>) -> Self {
        UniversalTable {
            entries: entries.into_iter().map(|d| Arc::new(d) as Arc<dyn StepOracle>).collect(),
        }
    }

    /// Reads JSONL records carrying an `e` field. Entries are numbered densely
    /// from 0; an index with no records is an entry that never converges.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let records = parse_jsonl::<FixtureRecord>(text)?;
        let mut by_entry: BTreeMap<usize, Vec<FixtureRecord>> = BTreeMap::new();
        for r in records {
            let e = r.e.ok_or_else(|| Error::Parse(format!("record for x = {} has no entry index e", r.x)))?;
            by_entry.entry(e).or_default().push(r);
        }
        let n = by_entry.keys().next_back().map_or(0, |&e| e + 1);
        let mut entries: Vec<Arc<dyn StepOracle>> = Vec::with_capacity(n);
        for e in 0..n {
            let recs = by_entry.remove(&e).unwrap_or_default();
            entries.push(Arc::new(FixtureOracle::from_records(format!("f_{e}"), recs)?));
        }
        Ok(UniversalTable { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, e: usize) -> &Arc<dyn StepOracle> {
        &self.entries[e]
    }

    pub fn lookup(&self, e: usize, x: u64, s: u64) -> Step {
        self.entries[e].eval(&x, s)
    }
}

/// Per-stage fuel envelope `c·(t+1)^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub c: u64,
    pub k: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { c: 1000, k: 2 }
    }
}

impl Budget {
    pub fn new(c: u64, k: u32) -> Self {
        Budget { c, k }
    }

    /// Saturates at `u64::MAX`.
    pub fn at(&self, t: u64) -> u64 {
        (t.saturating_add(1)).checked_pow(self.k).and_then(|p| p.checked_mul(self.c)).unwrap_or(u64::MAX)
    }
}

/// Fuel consumed during one stage, with a hard limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuelMeter {
    consumed: u64,
    limit: u64,
}

impl FuelMeter {
    pub fn new(limit: u64) -> Self {
        FuelMeter { consumed: 0, limit }
    }

    /// Meter for oracle-grade runs that are not being certified.
    pub fn unlimited() -> Self {
        FuelMeter::new(u64::MAX)
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Charges `units`; the meter never records more than its limit.
    pub fn charge(&mut self, units: u64) -> std::result::Result<(), OutOfFuel> {
        let next = self.consumed.saturating_add(units);
        if next > self.limit {
            return Err(OutOfFuel { consumed: next, limit: self.limit });
        }
        self.consumed = next;
        Ok(())
    }

    /// One oracle step: charges a unit then queries.
    pub fn ask<Q: ?Sized, V, O: StepOracle<Q, V> + ?Sized>(
        &mut self,
        oracle: &O,
        q: &Q,
        t: u64,
    ) -> std::result::Result<Step<V>, OutOfFuel> {
        self.charge(1)?;
        Ok(oracle.eval(q, t))
    }
}

/// A total output stream whose stages are produced in order and paid for in fuel.
///
/// Implementors derive `Clone` so that any state is a replayable checkpoint.
pub trait PunctualStream: Send {
    type Item: Clone + Send;

    /// Produces the output of the next stage.
    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Self::Item, OutOfFuel>;

    /// Index of the stage the next call to `next_stage` produces.
    fn stage(&self) -> u64;
}

impl<S: PunctualStream + ?Sized> PunctualStream for Box<S> {
    type Item = S::Item;
    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Self::Item, OutOfFuel> {
        (**self).next_stage(fuel)
    }
    fn stage(&self) -> u64 {
        (**self).stage()
    }
}

/// Outputs and per-stage fuel of a certified run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate<T> {
    pub budget: Budget,
    pub outputs: Vec<T>,
    pub fuel: Vec<u64>,
}

impl<T> Certificate<T> {
    pub fn max_fuel(&self) -> u64 {
        self.fuel.iter().copied().max().unwrap_or(0)
    }
}

/// Runs `horizon` stages, each under a meter limited to `budget.at(t)`.
pub fn certify_punctual<S: PunctualStream + ?Sized>(
    s: &mut S,
    horizon: u64,
    budget: Budget,
) -> Result<Certificate<S::Item>> {
    if horizon == 0 {
        return Err(Error::PreconditionFailed("horizon must be at least 1".into()));
    }
    let mut outputs = Vec::with_capacity(horizon as usize);
    let mut fuel = Vec::with_capacity(horizon as usize);
    for _ in 0..horizon {
        let t = s.stage();
        let mut meter = FuelMeter::new(budget.at(t));
        match s.next_stage(&mut meter) {
            Ok(v) => {
                outputs.push(v);
                fuel.push(meter.consumed());
            }
            Err(e) => return Err(Error::PunctualityViolation { stage: t, consumed: e.consumed, limit: e.limit }),
        }
    }
    Ok(Certificate { budget, outputs, fuel })
}

/// Runs `n` stages without a limit.
pub fn run_unbudgeted<S: PunctualStream + ?Sized>(s: &mut S, n: u64) -> Vec<S::Item> {
    (0..n)
        .map(|_| {
            let mut meter = FuelMeter::unlimited();
            s.next_stage(&mut meter).expect("unlimited meter cannot run dry")
        })
        .collect()
}

/// Stream backed by a closure of the stage number.
#[derive(Clone)]
pub struct FnStream<F> {
    t: u64,
    f: F,
}

impl<F> FnStream<F> {
    pub fn new(f: F) -> Self {
        FnStream { t: 0, f }
    }
}

impl<T, F> PunctualStream for FnStream<F>
where
    T: Clone + Send,
    F: FnMut(u64, &mut FuelMeter) -> std::result::Result<T, OutOfFuel> + Send,
{
    type Item = T;
    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<T, OutOfFuel> {
        let v = (self.f)(self.t, fuel)?;
        self.t += 1;
        Ok(v)
    }
    fn stage(&self) -> u64 {
        self.t
    }
}

/// Interleaving `f ⊕ g`: stage `2i` is `f`'s stage `i`, stage `2i+1` is `g`'s.
#[derive(Clone)]
pub struct Join<F, G> {
    f: F,
    g: G,
    t: u64,
}

pub fn join<F, G>(f: F, g: G) -> Join<F, G>
where
    F: PunctualStream,
    G: PunctualStream<Item = F::Item>,
{
    Join { f, g, t: 0 }
}

impl<F, G> PunctualStream for Join<F, G>
where
    F: PunctualStream,
    G: PunctualStream<Item = F::Item>,
{
    type Item = F::Item;
    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<F::Item, OutOfFuel> {
        fuel.charge(1)?;
        let v = if self.t % 2 == 0 { self.f.next_stage(fuel)? } else { self.g.next_stage(fuel)? };
        self.t += 1;
        Ok(v)
    }
    fn stage(&self) -> u64 {
        self.t
    }
}

/// Stream answering query number `t` of a fixed enumeration at stage `t`.
///
/// This is how punctual functions on codes (tree membership, colourings on
/// tuples) are certified: the answer for the `t`-th query must fit `budget(t)`.
pub struct QueryStream<F> {
    t: u64,
    f: F,
}

impl<F: Clone> Clone for QueryStream<F> {
    fn clone(&self) -> Self {
        QueryStream { t: self.t, f: self.f.clone() }
    }
}

impl<F> QueryStream<F> {
    pub fn new(f: F) -> Self {
        QueryStream { t: 0, f }
    }
}

impl<T, F> PunctualStream for QueryStream<F>
where
    T: Clone + Send,
    F: Fn(u64, &mut FuelMeter) -> std::result::Result<T, OutOfFuel> + Send,
{
    type Item = T;
    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<T, OutOfFuel> {
        let v = (self.f)(self.t, fuel)?;
        self.t += 1;
        Ok(v)
    }
    fn stage(&self) -> u64 {
        self.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ident() -> FnStream<impl FnMut(u64, &mut FuelMeter) -> std::result::Result<u64, OutOfFuel> + Clone> {
        FnStream::new(|t, m: &mut FuelMeter| m.charge(1).map(|_| t))
    }

    fn konst(c: u64) -> FnStream<impl FnMut(u64, &mut FuelMeter) -> std::result::Result<u64, OutOfFuel> + Clone> {
        FnStream::new(move |_, m: &mut FuelMeter| m.charge(1).map(|_| c))
    }

    #[test]
    fn join_of_identities_doubles_each_value() {
        let mut j = join(ident(), ident());
        assert_eq!(run_unbudgeted(&mut j, 6), vec![0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn join_of_constants_alternates() {
        let mut j = join(konst(7), konst(9));
        assert_eq!(run_unbudgeted(&mut j, 5), vec![7, 9, 7, 9, 7]);
    }

    #[test]
    fn constant_stream_certifies_to_ten_thousand() {
        let cert = certify_punctual(&mut konst(3), 10_000, Budget::default()).unwrap();
        assert_eq!(cert.outputs.len(), 10_000);
        assert!(cert.fuel.iter().all(|&f| f == 1));
    }

    #[test]
    fn unbounded_search_over_divergent_oracle_is_caught() {
        let mut s = FnStream::new(|t, m: &mut FuelMeter| {
            let mut x = 0u64;
            loop {
                if let Step::Done(v) = m.ask::<u64, u64, _>(&Divergent, &x, t)? {
                    return Ok(v);
                }
                x += 1;
            }
        });
        match certify_punctual(&mut s, 100, Budget::default()) {
            Err(Error::PunctualityViolation { stage, limit, .. }) => {
                assert_eq!(stage, 0);
                assert_eq!(limit, 1000);
            }
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn linear_work_overruns_a_constant_budget_late() {
        // 40·t units per stage against 1000·(t+1)^0: first failure is t = 26.
        let mut s = FnStream::new(|t, m: &mut FuelMeter| m.charge(40 * t).map(|_| t));
        match certify_punctual(&mut s, 100, Budget::new(1000, 0)) {
            Err(Error::PunctualityViolation { stage, .. }) => assert_eq!(stage, 26),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn horizon_zero_is_rejected() {
        assert!(matches!(certify_punctual(&mut konst(0), 0, Budget::default()), Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn budget_saturates() {
        assert_eq!(Budget::default().at(0), 1000);
        assert_eq!(Budget::default().at(9), 100_000);
        assert_eq!(Budget::new(u64::MAX, 3).at(5), u64::MAX);
    }

    #[test]
    fn fixture_oracle_respects_convergence_time() {
        let o = FixtureOracle::from_jsonl("f", "{\"x\":0,\"t_converge\":3,\"value\":5}\n\n{\"x\":1,\"t_converge\":0,\"value\":2}").unwrap();
        assert_eq!(o.eval(&0, 2), Step::NotYet);
        assert_eq!(o.eval(&0, 3), Step::Done(5));
        assert_eq!(o.eval(&1, 0), Step::Done(2));
        assert_eq!(o.eval(&7, 1_000), Step::NotYet);
    }

    #[test]
    fn fixture_rejects_duplicates_and_garbage() {
        assert!(FixtureOracle::from_jsonl("f", "{\"x\":0,\"t_converge\":3,\"value\":5}\n{\"x\":0,\"t_converge\":1,\"value\":1}").is_err());
        assert!(matches!(FixtureOracle::from_jsonl("f", "{\"x\":0,"), Err(Error::Parse(_))));
    }

    #[test]
    fn table_lookup_matches_entries() {
        let text = "{\"e\":0,\"x\":0,\"t_converge\":1,\"value\":4}\n{\"e\":2,\"x\":0,\"t_converge\":0,\"value\":1}";
        let u = UniversalTable::from_jsonl(text).unwrap();
        assert_eq!(u.len(), 3);
        assert_eq!(u.lookup(0, 0, 0), Step::NotYet);
        assert_eq!(u.lookup(0, 0, 1), Step::Done(4));
        assert_eq!(u.lookup(1, 0, 50), Step::NotYet);
        assert_eq!(u.lookup(2, 0, 0), Step::Done(1));
    }

    #[test]
    fn replaying_a_certified_run_reproduces_the_trace() {
        let mut s = FnStream::new(|t, m: &mut FuelMeter| m.charge(t % 7 + 1).map(|_| t * t));
        let a = certify_punctual(&mut s.clone(), 200, Budget::default()).unwrap();
        let b = certify_punctual(&mut s, 200, Budget::default()).unwrap();
        assert_eq!(a, b);
    }
}
