//! Dense open sets diagonalizing against a table of functions.
//!
//! Entry `f_e` of the table gets a pair `V_{2e}, V_{2e+1}`. Before `f_e(0)`
//! converges they list `B_{0j}` and `B_{1j}` respectively. Once `f_e(0) = m_0`
//! is known, the side whose ladder avoided `B_{m_0}` turns into
//! `ω^ω ∖ {f_e}` (new ladders `B_{f↾k⌢j}`, `j ≠ f_e(k)`, one per converged
//! value) and the other side lists every `B_j`.
//!
//! The bounded variant builds `V_{n,k}`: it repeats `B_k` until `f_n(0)`
//! converges, then becomes the whole space if `k ≤ f_n(0)`, and otherwise
//! lists the complement of `{g : g ≤ f_n}` level by level.

use std::sync::Arc;

use crate::clock::{FuelMeter, PunctualStream, Step, StepOracle, UniversalTable};
use crate::error::OutOfFuel;
use crate::par;

use super::{Ball, Ladder, LadderSet, OpenSetLog};

pub struct BairePair {
    f: Arc<dyn StepOracle>,
    t: u64,
    known: Vec<u64>,
    sides: [LadderSet; 2],
    diag: Option<usize>,
}

/// One stream per table entry; stream `e` lists `V_{2e}` and `V_{2e+1}`.
pub fn baire_adversary(table: &UniversalTable) -> Vec<BairePair> {
    (0..table.len()).map(|e| BairePair::new(table.entry(e).clone())).collect()
}

impl BairePair {
    pub fn new(f: Arc<dyn StepOracle>) -> Self {
        let mut sides = [LadderSet::default(), LadderSet::default()];
        for (d, side) in sides.iter_mut().enumerate() {
            side.push(Ladder::Siblings { prefix: vec![d as u64], skip: None, next: 0 });
        }
        BairePair { f, t: 0, known: Vec::new(), sides, diag: None }
    }

    /// `0` if `V_{2e}` carries the diagonalization, `1` if `V_{2e+1}` does.
    pub fn diagonal_side(&self) -> Option<usize> {
        self.diag
    }

    /// Values of `f_e` converged so far.
    pub fn known(&self) -> &[u64] {
        &self.known
    }
}

impl PunctualStream for BairePair {
    type Item = [Option<Ball>; 2];

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> Result<[Option<Ball>; 2], OutOfFuel> {
        let t = self.t;
        let x = self.known.len() as u64;
        if let Step::Done(m) = fuel.ask(&self.f, &x, t)? {
            fuel.charge(x + 1)?;
            match self.diag {
                None => {
                    let d = usize::from(m == 0);
                    self.diag = Some(d);
                    // the root ladders subsume the first-digit ladders
                    self.sides.iter_mut().for_each(LadderSet::clear);
                    self.sides[1 - d].push(Ladder::Siblings { prefix: Vec::new(), skip: None, next: 0 });
                    self.sides[d].push(Ladder::Siblings { prefix: Vec::new(), skip: Some(m), next: 0 });
                }
                Some(d) => {
                    self.sides[d].push(Ladder::Siblings { prefix: self.known.clone(), skip: Some(m), next: 0 });
                }
            }
            self.known.push(m);
        }
        let mut out = [None, None];
        for (slot, side) in out.iter_mut().zip(self.sides.iter_mut()) {
            if let Some((ball, cost)) = side.emit() {
                fuel.charge(cost)?;
                *slot = Some(ball);
            }
        }
        self.t += 1;
        Ok(out)
    }

    fn stage(&self) -> u64 {
        self.t
    }
}

/// Runs every pair for `stages` stages; log `2e + d` is `V_{2e+d}`.
pub fn run_pairs(table: &UniversalTable, stages: u64) -> (Vec<OpenSetLog>, Vec<Option<usize>>) {
    let entries: Vec<usize> = (0..table.len()).collect();
    let runs = par::map(&entries, |&e| {
        let mut p = BairePair::new(table.entry(e).clone());
        let mut logs = [OpenSetLog::default(), OpenSetLog::default()];
        let mut fuel = FuelMeter::unlimited();
        for _ in 0..stages {
            let [a, b] = p.next_stage(&mut fuel).expect("unlimited meter");
            logs[0].balls.push(a);
            logs[1].balls.push(b);
        }
        (logs, p.diag)
    });
    let mut out = Vec::with_capacity(2 * runs.len());
    let mut sides = Vec::with_capacity(runs.len());
    for ([a, b], d) in runs {
        out.push(a);
        out.push(b);
        sides.push(d);
    }
    (out, sides)
}

pub struct BoundedAdversary {
    f: Arc<dyn StepOracle>,
    t: u64,
    known: Vec<u64>,
    sets: Vec<LadderSet>,
}

/// One stream per table entry `f_n`, listing `V_{n,k}` for `k < ks`.
pub fn baire_bounded_adversary(table: &UniversalTable, ks: usize) -> Vec<BoundedAdversary> {
    (0..table.len()).map(|n| BoundedAdversary::new(table.entry(n).clone(), ks)).collect()
}

impl BoundedAdversary {
    pub fn new(f: Arc<dyn StepOracle>, ks: usize) -> Self {
        BoundedAdversary { f, t: 0, known: Vec::new(), sets: vec![LadderSet::default(); ks] }
    }

    /// Which `V_{n,k}` exclude the bounded subspace: `None` until `f_n(0)` converges.
    pub fn surviving(&self) -> Option<Vec<bool>> {
        let a = *self.known.first()?;
        Some((0..self.sets.len() as u64).map(|k| k > a).collect())
    }
}

impl PunctualStream for BoundedAdversary {
    type Item = Vec<Option<Ball>>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> Result<Vec<Option<Ball>>, OutOfFuel> {
        let t = self.t;
        let level = self.known.len() as u64;
        if let Step::Done(b) = fuel.ask(&self.f, &level, t)? {
            fuel.charge((level + 1) * self.sets.len() as u64)?;
            let radices: Vec<u64> = self.known.iter().map(|&v| v.saturating_add(1)).collect();
            let floor = self.known.first().copied().unwrap_or(b);
            for (k, set) in self.sets.iter_mut().enumerate() {
                if (k as u64) <= floor {
                    if level == 0 {
                        set.push(Ladder::Siblings { prefix: Vec::new(), skip: None, next: 0 });
                    }
                } else {
                    set.push(Ladder::Bounded { radices: radices.clone(), from: b.saturating_add(1), next: 0 });
                }
            }
            self.known.push(b);
        }
        let mut out = Vec::with_capacity(self.sets.len());
        for (k, set) in self.sets.iter_mut().enumerate() {
            match set.emit() {
                Some((ball, cost)) => {
                    fuel.charge(cost)?;
                    out.push(Some(ball));
                }
                None => {
                    fuel.charge(1)?;
                    out.push(Some(vec![k as u64]));
                }
            }
        }
        self.t += 1;
        Ok(out)
    }

    fn stage(&self) -> u64 {
        self.t
    }
}

/// Runs every bounded adversary; log `n·ks + k` is `V_{n,k}`, and the flags
/// say which sets survive (exclude `{g : g ≤ f_n}`).
pub fn run_bounded(table: &UniversalTable, ks: usize, stages: u64) -> (Vec<OpenSetLog>, Vec<Option<Vec<bool>>>) {
    let entries: Vec<usize> = (0..table.len()).collect();
    let runs = par::map(&entries, |&n| {
        let mut a = BoundedAdversary::new(table.entry(n).clone(), ks);
        let mut logs = vec![OpenSetLog::default(); ks];
        let mut fuel = FuelMeter::unlimited();
        for _ in 0..stages {
            for (log, ball) in logs.iter_mut().zip(a.next_stage(&mut fuel).expect("unlimited meter")) {
                log.balls.push(ball);
            }
        }
        (logs, a.surviving())
    });
    let mut out = Vec::new();
    let mut flags = Vec::new();
    for (logs, s) in runs {
        out.extend(logs);
        flags.push(s);
    }
    (out, flags)
}
