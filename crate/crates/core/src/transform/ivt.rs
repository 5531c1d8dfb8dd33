//! Punctual presentation of an IVT instance given by a sign oracle.
//!
//! The stream bisects a live interval `[a, b]` (initially `[0, 1]`), asking
//! one midpoint per stage. At stage `t` the active endpoints carry the values
//! `−2^{−t−1}` and `+2^{−t−1}`; when the midpoint is decided at stage `t₀` the
//! endpoint it replaces freezes at `∓2^{−t₀−1}` and the midpoint becomes active.
//! Successive approximants then differ by at most `2^{−m−2}`, strictly inside
//! the fast-Cauchy bound. The approximant is piecewise linear through all
//! breakpoints, so it is 2-Lipschitz at every stage and its only zero in the limit is the point the
//! bisection converges to, which is a sign change of `X`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::clock::{FuelMeter, PunctualStream, Step, StepOracle};
use crate::error::{Error, OutOfFuel, Result};
use crate::rat::{big_pow2_neg, BigRat};

/// Sign oracle answers: `0` for `X(r) < 0`, anything else for `X(r) > 0`.
pub const NEGATIVE: u64 = 0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    #[serde(with = "crate::rat::big_wire")]
    pub point: BigRat,
    pub negative: bool,
    pub stage: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IvtStage {
    #[serde(with = "crate::rat::big_wire")]
    pub probe: BigRat,
    pub decided: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct IvtStream<O> {
    sign: O,
    t: u64,
    a: BigRat,
    b: BigRat,
    log: Vec<Decision>,
}

/// Checks the endpoint signs against the oracle's limit, then starts bisecting.
pub fn ivt_punctualize<O: StepOracle<BigRat>>(sign: O) -> Result<IvtStream<O>> {
    let limit = |r: BigRat| sign.eval(&r, u64::MAX).done();
    match (limit(BigRat::zero()), limit(BigRat::one())) {
        (Some(NEGATIVE), Some(v)) if v != NEGATIVE => {}
        other => return Err(Error::PreconditionFailed(format!("endpoint signs {other:?}, want X(0) < 0 < X(1)"))),
    }
    Ok(IvtStream { sign, t: 0, a: BigRat::zero(), b: BigRat::one(), log: Vec::new() })
}

impl<O> IvtStream<O> {
    /// The presentation as revealed by the stages run so far.
    pub fn presentation(&self) -> IvtPresentation {
        IvtPresentation { log: self.log.clone(), stages: self.t }
    }

    pub fn live(&self) -> (&BigRat, &BigRat) {
        (&self.a, &self.b)
    }
}

impl<O: StepOracle<BigRat>> PunctualStream for IvtStream<O> {
    type Item = IvtStage;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<IvtStage, OutOfFuel> {
        let t = self.t;
        let mid = (&self.a + &self.b) / BigRat::from_integer(2.into());
        fuel.charge(1)?;
        let decided = match fuel.ask(&self.sign, &mid, t)? {
            Step::Done(v) => {
                let negative = v == NEGATIVE;
                if negative {
                    self.a = mid.clone();
                } else {
                    self.b = mid.clone();
                }
                self.log.push(Decision { point: mid.clone(), negative, stage: t });
                Some(negative)
            }
            Step::NotYet => None,
        };
        self.t += 1;
        Ok(IvtStage { probe: mid, decided })
    }

    fn stage(&self) -> u64 {
        self.t
    }
}

/// `(f, δ)`: `value(r, m)` is the `m`-th approximant of `X̂(r)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IvtPresentation {
    pub log: Vec<Decision>,
    /// Number of stages the log covers; later approximants reuse the last decisions.
    pub stages: u64,
}

impl IvtPresentation {
    /// Breakpoints of the `m`-th approximant, sorted by position.
    pub fn breakpoints(&self, m: u64) -> Vec<(BigRat, BigRat)> {
        // (point, stage at which it froze)
        let mut left: Vec<(BigRat, Option<u64>)> = vec![(BigRat::zero(), None)];
        let mut right: Vec<(BigRat, Option<u64>)> = vec![(BigRat::one(), None)];
        for d in self.log.iter().take_while(|d| d.stage <= m) {
            let side = if d.negative { &mut left } else { &mut right };
            side.last_mut().expect("nonempty").1 = Some(d.stage);
            side.push((d.point.clone(), None));
        }
        let mag = |s: Option<u64>| big_pow2_neg(s.unwrap_or(m) + 1);
        let mut out: Vec<(BigRat, BigRat)> = left.into_iter().map(|(p, s)| (p, -mag(s))).collect();
        out.extend(right.into_iter().rev().map(|(p, s)| (p, mag(s))));
        out
    }

    pub fn value(&self, r: &BigRat, m: u64) -> BigRat {
        let bp = self.breakpoints(m);
        let r = r.clamp(&bp[0].0, &bp[bp.len() - 1].0);
        let i = bp.partition_point(|(p, _)| p <= r).clamp(1, bp.len() - 1);
        let ((x0, y0), (x1, y1)) = (&bp[i - 1], &bp[i]);
        y0 + (y1 - y0) * (r - x0) / (x1 - x0)
    }

    /// Attempted modulus: every approximant is 2-Lipschitz, so `n + 3` leaves slack.
    pub fn delta(&self, _r: &BigRat, n: u64) -> u64 {
        n + 3
    }

    /// The latest approximant's zero found by bisection to `2^{−bits}`.
    pub fn bisect(&self, bits: u64) -> BigRat {
        let m = self.stages.saturating_sub(1);
        let (mut a, mut b) = (BigRat::zero(), BigRat::one());
        let two = BigRat::from_integer(2.into());
        for _ in 0..bits {
            let mid = (&a + &b) / &two;
            let v = self.value(&mid, m);
            if v.is_zero() {
                return mid;
            }
            if v.is_negative() {
                a = mid;
            } else {
                b = mid;
            }
        }
        (a + b) / two
    }
}

/// Decoder check: `X` changes sign across `[r − ε, r + ε]` (clamped to `[0, 1]`).
pub fn sign_changes_near<O: StepOracle<BigRat>>(sign: &O, r: &BigRat, eps: &BigRat) -> bool {
    let lo = (r - eps).max(BigRat::zero());
    let hi = (r + eps).min(BigRat::one());
    let lim = |q: &BigRat| sign.eval(q, u64::MAX).done();
    lim(&lo) == Some(NEGATIVE) && lim(&hi).is_some_and(|v| v != NEGATIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{certify_punctual, run_unbudgeted, Budget, Delayed};
    use crate::rat::{to_big, dyadic};

    fn crossing_at(num: i64, den: i64, delay: impl Fn(&BigRat) -> u64 + Send + Sync + 'static) -> Delayed<BigRat> {
        let c = BigRat::new(num.into(), den.into());
        Delayed::new("x", move |r: &BigRat| (delay(r), u64::from(*r > c)))
    }

    #[test]
    fn wrong_endpoint_signs_are_rejected() {
        let flipped = Delayed::<BigRat>::instant("f", |r: &BigRat| u64::from(*r < BigRat::new(1.into(), 2.into())));
        assert!(matches!(ivt_punctualize(flipped), Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn instant_crossing_is_located() {
        let x = crossing_at(3, 10, |_| 0);
        let mut s = ivt_punctualize(x.clone()).unwrap();
        run_unbudgeted(&mut s, 24);
        let pres = s.presentation();
        let r = pres.bisect(10);
        assert!(sign_changes_near(&x, &r, &big_pow2_neg(10)));
        assert!((r - BigRat::new(3.into(), 10.into())).abs() <= big_pow2_neg(10));
    }

    #[test]
    fn midpoint_waits_then_freezes_its_half() {
        // X(1/2) < 0 is only decided at stage 3
        let x = crossing_at(3, 4, |r| if *r == BigRat::new(1.into(), 2.into()) { 3 } else { 0 });
        let mut s = ivt_punctualize(x).unwrap();
        run_unbudgeted(&mut s, 4);
        let pres = s.presentation();
        let half = to_big(&dyadic(1, 1));
        for t in 0..3 {
            assert!(pres.value(&half, t).is_zero());
        }
        assert_eq!(pres.value(&half, 3), -big_pow2_neg(4));
        for k in 0..=8 {
            assert_eq!(pres.value(&to_big(&dyadic(k, 4)), 3), -big_pow2_neg(4));
        }
    }

    #[test]
    fn approximants_are_cauchy_and_lipschitz() {
        let x = crossing_at(5, 7, |r| (r.denom().bits() as u64) % 3);
        let mut s = ivt_punctualize(x).unwrap();
        run_unbudgeted(&mut s, 16);
        let pres = s.presentation();
        let grid: Vec<BigRat> = (0..=64).map(|k| to_big(&dyadic(k, 6))).collect();
        for m in 0..16 {
            for (i, r) in grid.iter().enumerate() {
                let d = (pres.value(r, m) - pres.value(r, m + 1)).abs();
                assert!(d < big_pow2_neg(m + 1));
                if i > 0 {
                    let slope = (pres.value(r, m) - pres.value(&grid[i - 1], m)).abs() * BigRat::from_integer(64.into());
                    assert!(slope <= BigRat::from_integer(2.into()));
                }
            }
        }
    }

    #[test]
    fn certifies_at_horizon_1000() {
        let x = crossing_at(1, 3, |r| r.denom().bits() as u64);
        let mut s = ivt_punctualize(x).unwrap();
        let cert = certify_punctual(&mut s, 1000, Budget::default()).unwrap();
        assert!(cert.max_fuel() <= 2);
    }
}
