//! A computable continuous function on `[0, 1]` whose every modulus of
//! uniform continuity dominates a given function `g`.
//!
//! The function rises towards `ξ = √2/2` from both sides. Row `i` of the
//! breakpoint table places a jump of `2^{−i+1}` across an interval of width
//! `2^{−m_i} < 2^{−g(i)}`, so any modulus `m` has `m(i) ≥ m_i > g(i)`. While
//! `g(i)` is still unknown the function is extended flat, which is what
//! keeps every stage bounded. Rows start at `i = 1`, so `sup h = h(ξ) = 2`.
//!
//! Breakpoints are kept symbolically. A value `h(r)` is final once `r` is
//! left of the left frontier `R` or right of the right frontier `R'`, and
//! the frontiers move towards `ξ` by at least one binary digit per stage.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::clock::{Step, StepOracle};
use crate::error::{Error, Result};
use crate::rat::{big_pow2_neg, BigRat};

/// `r < ξ`, decided exactly by `2r² < 1`.
pub fn below_xi(r: &BigRat) -> bool {
    r.is_negative() || BigRat::from_integer(2.into()) * r * r < BigRat::one()
}

/// Largest multiple of `2^{−l}` below `ξ`.
pub fn xi_floor(l: u64) -> BigRat {
    // ξ·2^l = √(2^{2l−1})
    let k = if l == 0 { BigUint::zero() } else { (BigUint::one() << (2 * l - 1)).sqrt() };
    BigRat::new(BigInt::from(k), BigInt::one() << l)
}

/// Smallest multiple of `2^{−l}` above `ξ`.
pub fn xi_ceil(l: u64) -> BigRat {
    xi_floor(l) + big_pow2_neg(l)
}

/// One jump of `h` on each side of `ξ`: `h(x) = h(z) + gap = h(y) = h(w) + gap`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakpointRow {
    pub i: u64,
    #[serde(with = "crate::rat::big_wire")]
    pub z: BigRat,
    #[serde(with = "crate::rat::big_wire")]
    pub x: BigRat,
    #[serde(with = "crate::rat::big_wire")]
    pub w: BigRat,
    #[serde(with = "crate::rat::big_wire")]
    pub y: BigRat,
    #[serde(with = "crate::rat::big_wire")]
    pub gap: BigRat,
    /// Both pairs have width `2^{−m}`.
    pub m: u64,
    /// `g(i)` as it converged.
    pub g: u64,
    /// Stage at which the row was laid down.
    pub stage: u64,
}

/// The lazily built presentation `(h, δ)` with its breakpoint table.
pub struct UcAdversary {
    g: Arc<dyn StepOracle>,
    stage: u64,
    i: u64,
    l: u64,
    /// Left breakpoints, increasing; the last one is the frontier `R`.
    left: Vec<(BigRat, BigRat)>,
    /// Right breakpoints, decreasing; the last one is the frontier `R'`.
    right: Vec<(BigRat, BigRat)>,
    rows: Vec<BreakpointRow>,
}

pub fn uc_adversary(g: Arc<dyn StepOracle>) -> UcAdversary {
    UcAdversary {
        g,
        stage: 0,
        i: 1,
        l: 1,
        left: vec![(BigRat::zero(), BigRat::zero())],
        right: vec![(BigRat::one(), BigRat::zero())],
        rows: Vec::new(),
    }
}

fn push_flat(side: &mut Vec<(BigRat, BigRat)>, x: BigRat) {
    let v = side.last().expect("sides start non-empty").1.clone();
    side.push((x, v));
}

impl UcAdversary {
    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn rows(&self) -> &[BreakpointRow] {
        &self.rows
    }

    /// Current grid level: every grid point of level `< l` is resolved.
    pub fn level(&self) -> u64 {
        self.l
    }

    pub fn left_breakpoints(&self) -> &[(BigRat, BigRat)] {
        &self.left
    }

    pub fn right_breakpoints(&self) -> &[(BigRat, BigRat)] {
        &self.right
    }

    fn left_frontier(&self) -> &BigRat {
        &self.left.last().expect("non-empty").0
    }

    fn right_frontier(&self) -> &BigRat {
        &self.right.last().expect("non-empty").0
    }

    /// Runs one stage of the construction.
    pub fn step(&mut self) {
        let s = self.stage;
        match self.g.eval(&self.i, s + 1) {
            Step::NotYet => {
                let lo = xi_floor(self.l);
                if &lo > self.left_frontier() {
                    push_flat(&mut self.left, lo);
                }
                let hi = xi_ceil(self.l);
                if &hi < self.right_frontier() {
                    push_flat(&mut self.right, hi);
                }
                self.l += 1;
            }
            Step::Done(gi) => {
                let (r, rr) = (self.left_frontier().clone(), self.right_frontier().clone());
                // Both sides need a grid point of level m strictly between the frontier and ξ.
                let mut m = self.l.max(gi + 1);
                while xi_floor(m) <= r || xi_ceil(m) >= rr {
                    m += 1;
                }
                let width = big_pow2_neg(m);
                let gap = big_pow2_neg(self.i - 1);
                let v = self.left.last().expect("non-empty").1.clone() + &gap;
                let x = &r + &width;
                let y = &rr - &width;
                self.left.push((x.clone(), v.clone()));
                self.right.push((y.clone(), v));
                let lo = xi_floor(m);
                if lo > x {
                    push_flat(&mut self.left, lo);
                }
                let hi = xi_ceil(m);
                if hi < y {
                    push_flat(&mut self.right, hi);
                }
                self.rows.push(BreakpointRow { i: self.i, z: r, x, w: rr, y, gap, m, g: gi, stage: s + 1 });
                self.i += 1;
                self.l = m + 1;
            }
        }
        self.stage += 1;
    }

    /// Runs stages until every grid point of level `k` is resolved.
    pub fn ensure_resolution(&mut self, k: u64) {
        while self.l <= k {
            self.step();
        }
    }

    /// Runs stages until rows `1..=i` exist.
    pub fn ensure_rows(&mut self, i: u64) {
        while self.i <= i {
            self.step();
        }
    }

    /// `h(r)` if it is already final.
    pub fn value_resolved(&self, r: &BigRat) -> Option<BigRat> {
        if below_xi(r) {
            (r <= self.left_frontier()).then(|| interpolate(self.left.iter(), r))
        } else {
            (r >= self.right_frontier()).then(|| interpolate(self.right.iter().rev(), r))
        }
    }

    /// `h(r)` for rational `r ∈ [0, 1]`. The approximants of `h(r)` are all exact.
    pub fn value(&mut self, r: &BigRat) -> Result<BigRat> {
        if r.is_negative() || r > &BigRat::one() {
            return Err(Error::PreconditionFailed(format!("{r} lies outside [0, 1]")));
        }
        loop {
            if let Some(v) = self.value_resolved(r) {
                return Ok(v);
            }
            self.step();
        }
    }

    /// `m`-th approximant of `h(r)`.
    pub fn approx(&mut self, r: &BigRat, _m: u64) -> Result<BigRat> {
        self.value(r)
    }

    /// Least `d ≥ n + 1` such that the ball of radius `2^{−d}` around `r`
    /// stays on one side of the level-`d` grid neighbours of `ξ` and `h`
    /// moves by at most `2^{−n}` over it.
    pub fn delta(&mut self, r: &BigRat, n: u64) -> Result<u64> {
        self.value(r)?;
        let left = below_xi(r);
        let mut d = n + 1;
        loop {
            let rad = big_pow2_neg(d);
            let (lo, hi) = (r - &rad, r + &rad);
            let inside = if left { hi <= xi_floor(d) } else { lo >= xi_ceil(d) };
            if inside {
                self.ensure_resolution(d);
                let slope = if left {
                    max_slope(self.left.iter(), &lo, &hi)
                } else {
                    max_slope(self.right.iter().rev(), &lo, &hi)
                };
                if slope * &rad <= big_pow2_neg(n) {
                    return Ok(d);
                }
            }
            d += 1;
        }
    }
}

fn interpolate<'a>(mut pts: impl Iterator<Item = &'a (BigRat, BigRat)>, r: &BigRat) -> BigRat {
    let mut prev = pts.next().expect("non-empty").clone();
    if r <= &prev.0 {
        return prev.1;
    }
    for (x, v) in pts {
        if r <= x {
            return &prev.1 + (v - &prev.1) * (r - &prev.0) / (x - &prev.0);
        }
        prev = (x.clone(), v.clone());
    }
    prev.1
}

/// Largest `|slope|` among the segments meeting `(lo, hi)`; points come in increasing order.
fn max_slope<'a>(pts: impl Iterator<Item = &'a (BigRat, BigRat)>, lo: &BigRat, hi: &BigRat) -> BigRat {
    let pts: Vec<_> = pts.collect();
    pts.windows(2)
        .filter(|w| &w[1].0 > lo && &w[0].0 < hi)
        .map(|w| ((&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0)).abs())
        .max()
        .unwrap_or_else(BigRat::zero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModulusVerdict {
    Accepted,
    /// Row `i` has a pair closer than `2^{−m(i)}` whose values differ by more than `2^{−i}`.
    Refuted { row: u64 },
}

/// Checks a candidate modulus against the table rows.
pub fn modulus_check(rows: &[BreakpointRow], m: impl Fn(u64) -> u64) -> ModulusVerdict {
    for row in rows {
        let close = row.m > m(row.i);
        let far = row.gap > big_pow2_neg(row.i);
        if close && far {
            return ModulusVerdict::Refuted { row: row.i };
        }
    }
    ModulusVerdict::Accepted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::Delayed;
    use num_traits::ToPrimitive;

    fn adversary(g: fn(u64) -> u64, delay: fn(u64) -> u64) -> UcAdversary {
        uc_adversary(Arc::new(Delayed::new("g", move |&i| (delay(i), g(i)))))
    }

    fn grid(k: u64) -> impl Iterator<Item = BigRat> {
        (0..=1u64 << k).map(move |j| BigRat::new(j.into(), BigInt::one() << k))
    }

    #[test]
    fn xi_neighbours() {
        for l in 1..40 {
            let (a, b) = (xi_floor(l), xi_ceil(l));
            assert!(below_xi(&a) && !below_xi(&b));
        }
        assert_eq!(xi_floor(3), BigRat::new(5.into(), 8.into()));
    }

    #[test]
    fn rows_have_the_promised_geometry() {
        let mut a = adversary(|i| i, |_| 0);
        a.ensure_rows(8);
        let row2 = &a.rows()[1];
        assert_eq!(row2.i, 2);
        assert_eq!(row2.gap, BigRat::new(1.into(), 2.into()));
        assert!(&row2.x - &row2.z < big_pow2_neg(2));
        for row in a.rows().to_vec() {
            assert!(row.z < row.x && below_xi(&row.x) && row.y < row.w && !below_xi(&row.y));
            assert!(&row.x - &row.z < big_pow2_neg(row.g));
            assert_eq!(a.value(&row.x).unwrap(), a.value(&row.z).unwrap() + &row.gap);
            assert_eq!(a.value(&row.y).unwrap(), a.value(&row.w).unwrap() + &row.gap);
        }
    }

    #[test]
    fn values_approach_two() {
        let mut a = adversary(|i| i, |i| 3 * i);
        a.ensure_rows(12);
        let v = a.value(&a.rows()[11].x.clone()).unwrap();
        assert_eq!(v, BigRat::from_integer(2.into()) - big_pow2_neg(11));
        assert!(a.value(&BigRat::new(3.into(), 2.into())).is_err());
    }

    #[test]
    fn delta_is_consistent_on_a_grid() {
        let mut a = adversary(|i| i, |i| 2 * i);
        let k = 9;
        a.ensure_resolution(k);
        let pts: Vec<BigRat> = grid(k).collect();
        let vals: Vec<BigRat> = pts.iter().map(|p| a.value(p).unwrap()).collect();
        for (ri, r) in pts.iter().enumerate() {
            for n in 0..6 {
                let d = a.delta(r, n).unwrap();
                let rad = big_pow2_neg(d);
                for (qi, q) in pts.iter().enumerate() {
                    if (q - r).abs() < rad {
                        assert!((&vals[qi] - &vals[ri]).abs() < big_pow2_neg(n), "r={r} q={q} n={n} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn modulus_verdicts() {
        let mut a = adversary(|i| 2 * i, |_| 0);
        a.ensure_rows(8);
        let rows = a.rows().to_vec();
        let widths: Vec<u64> = rows.iter().map(|r| r.m).collect();
        assert_eq!(modulus_check(&rows, |i| widths[i as usize - 1]), ModulusVerdict::Accepted);
        assert_eq!(modulus_check(&rows, |i| 2 * i), ModulusVerdict::Refuted { row: 1 });
        assert_eq!(modulus_check(&rows, |_| 0), ModulusVerdict::Refuted { row: 1 });
        assert!(matches!(modulus_check(&rows, |i| widths[i as usize - 1] - u64::from(i == 5)), ModulusVerdict::Refuted { row: 5 }));
    }

    #[test]
    fn delays_shift_stages_but_keep_validity() {
        let mut fast = adversary(|i| i + 1, |_| 0);
        let mut slow = adversary(|i| i + 1, |i| 5 * i);
        fast.ensure_rows(6);
        slow.ensure_rows(6);
        for (f, s) in fast.rows().iter().zip(slow.rows()) {
            assert_eq!(f.gap, s.gap);
            assert!(f.m > f.g && s.m > s.g);
            assert!(s.stage >= f.stage);
        }
        let a = slow.rows()[5].x.to_f64().unwrap();
        assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
    }
}
