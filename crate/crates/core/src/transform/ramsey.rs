//! Punctual recolouring for `RTⁿ_k`.
//!
//! `p` is a nondecreasing stream of "trusted" values: `p(t) = v` once every
//! increasing tuple with maximum `v` has converged, and otherwise stalls at the
//! last trusted value. The punctual colouring is
//! `ĉ(x̄) = c(p(x̄))` when the values `p(x_i)` are pairwise distinct, else `0`.
//! Every needed colour has converged by stage `max x̄`, so `ĉ` is budgeted.

use crate::clock::{FuelMeter, PunctualStream, Step, StepOracle};
use crate::error::{Error, OutOfFuel, Result};

/// Colouring of increasing `n`-tuples into `k` colours, given in the limit.
#[derive(Debug, Clone)]
pub struct ColoringInstance<O> {
    pub n: usize,
    pub k: u64,
    pub c: O,
}

impl<O: StepOracle<[u64]>> ColoringInstance<O> {
    pub fn new(n: usize, k: u64, c: O) -> Result<Self> {
        if n == 0 || k < 2 {
            return Err(Error::InvalidInstance(format!("arity {n}, colours {k}")));
        }
        Ok(ColoringInstance { n, k, c })
    }
}

/// Colex successor of an increasing tuple with entries `< bound`.
fn colex_next(x: &mut [u64], bound: u64) -> bool {
    for i in 0..x.len() {
        let cap = if i + 1 < x.len() { x[i + 1] } else { bound };
        if x[i] + 1 < cap {
            x[i] += 1;
            for (j, xj) in x[..i].iter_mut().enumerate() {
                *xj = j as u64;
            }
            return true;
        }
    }
    false
}

/// First `(m)`-subset of `[0, bound)` in colex order, if any.
fn colex_first(m: usize, bound: u64) -> Option<Vec<u64>> {
    (m as u64 <= bound).then(|| (0..m as u64).collect())
}

#[derive(Debug, Clone)]
pub struct RamseyStream<O> {
    inst: ColoringInstance<O>,
    t: u64,
    p: Vec<u64>,
    /// Next trusted value and the first of its tuples not yet seen converged.
    target: u64,
    cursor: Option<Vec<u64>>,
    live_from: Option<u64>,
}

pub fn ramsey_punctualize<O: StepOracle<[u64]>>(inst: ColoringInstance<O>) -> RamseyStream<O> {
    let cursor = colex_first(inst.n - 1, 0);
    RamseyStream { inst, t: 0, p: Vec::new(), target: 0, cursor, live_from: None }
}

impl<O: StepOracle<[u64]>> RamseyStream<O> {
    pub fn p(&self) -> &[u64] {
        &self.p
    }

    /// First stage from which `p` carries a trusted value. Only `n = 1` can
    /// start late: before `c(0)` converges there is nothing to trust, and the
    /// stream idles at `0` with `ĉ = 0`.
    pub fn live_from(&self) -> Option<u64> {
        self.live_from
    }

    pub fn arity(&self) -> usize {
        self.inst.n
    }

    /// `ĉ` on an increasing tuple of already emitted stages; `None` beyond them.
    pub fn c_hat_fueled(&self, x: &[u64], fuel: &mut FuelMeter) -> Result<Option<u64>> {
        let n = self.inst.n;
        if x.len() != n || x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInstance(format!("not an increasing {n}-tuple: {x:?}")));
        }
        let top = x[n - 1];
        if top >= self.t {
            return Ok(None);
        }
        fuel.charge(n as u64)?;
        let live = self.live_from.is_some_and(|l| x[0] >= l);
        let px: Vec<u64> = x.iter().map(|&xi| self.p[xi as usize]).collect();
        if !live || px.windows(2).any(|w| w[0] == w[1]) {
            return Ok(Some(0));
        }
        match fuel.ask(&self.inst.c, &px[..], top)? {
            Step::Done(v) => Ok(Some(v)),
            Step::NotYet => Err(Error::promise(format!("colour of {px:?} not settled by stage {top}"))),
        }
    }

    pub fn c_hat(&self, x: &[u64]) -> Result<Option<u64>> {
        self.c_hat_fueled(x, &mut FuelMeter::unlimited())
    }

    /// Maps a `ĉ`-homogeneous set of stages to a `c`-homogeneous set.
    pub fn decode(&self, y: &[u64]) -> Vec<u64> {
        let from = self.live_from.unwrap_or(u64::MAX);
        let mut out: Vec<u64> = y.iter().filter(|&&s| s >= from && s < self.t).map(|&s| self.p[s as usize]).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl<O: StepOracle<[u64]>> PunctualStream for RamseyStream<O> {
    type Item = u64;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<u64, OutOfFuel> {
        let t = self.t;
        let n = self.inst.n;
        let mut tuple = Vec::with_capacity(n);
        // Each stage trusts at most one new value, so `p(t) ≤ t`.
        loop {
            let Some(cur) = self.cursor.as_mut() else {
                break;
            };
            tuple.clear();
            tuple.extend_from_slice(cur);
            tuple.push(self.target);
            if fuel.ask(&self.inst.c, &tuple[..], t)?.is_done() {
                fuel.charge(n as u64)?;
                if !colex_next(cur, self.target) {
                    self.cursor = None;
                }
            } else {
                break;
            }
        }
        let out = if self.cursor.is_none() {
            let v = self.target;
            self.target += 1;
            self.cursor = colex_first(n - 1, self.target);
            self.live_from.get_or_insert(t);
            v
        } else {
            self.target.saturating_sub(1)
        };
        self.p.push(out);
        self.t += 1;
        Ok(out)
    }

    fn stage(&self) -> u64 {
        self.t
    }
}
