//! Dense linear orders without endpoints: the punctual order built by finite
//! dense extensions, back-and-forth isomorphisms, and the order that codes a
//! choice problem into its intervals.
//!
//! Both orders are handled through exact dyadic keys. In the built order the
//! element added at stage `r ≥ 1` as the `i`-th new number sits at
//! `(2i + 1) / 2^r`, and `0`, `1` sit at `1`, `2`, so the order is the dyadic
//! rationals of `(0, 3)` and comparisons never materialize a stage.

use std::cmp::Ordering;
use serde::{Deserialize, Serialize};

use super::Predicate;
use crate::clock::{FuelMeter, PunctualStream};
use crate::error::{Error, Result};
use crate::OutOfFuel;

/// `num / 2^exp`, with `num` odd whenever `exp > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dyadic {
    pub num: u128,
    pub exp: u32,
}

impl Dyadic {
    pub fn new(mut num: u128, mut exp: u32) -> Self {
        while exp > 0 && num % 2 == 0 {
            num /= 2;
            exp -= 1;
        }
        Dyadic { num, exp }
    }

    pub fn int(n: u128) -> Self {
        Dyadic { num: n, exp: 0 }
    }

    /// `⌊self · 2^e⌋`.
    fn floor_at(self, e: u32) -> u128 {
        if e >= self.exp {
            self.num << (e - self.exp)
        } else {
            self.num >> (self.exp - e)
        }
    }

    /// The dyadic with the least exponent, then the least numerator, strictly
    /// between `lo` and `hi`.
    pub fn simplest_between(lo: Dyadic, hi: Dyadic) -> Dyadic {
        debug_assert!(lo < hi);
        let mut e = 0;
        loop {
            let k = lo.floor_at(e) + 1;
            let cand = Dyadic::new(k, e);
            if cand < hi {
                return cand;
            }
            e += 1;
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        (self.num << (e - self.exp)).cmp(&(other.num << (e - other.exp)))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Strict linear order on ℕ with its Skolem witnesses.
pub trait LinearOrder: Send + Sync {
    fn less(&self, x: u64, y: u64) -> Result<bool>;
    fn below(&self, x: u64) -> Result<u64>;
    /// Requires `x < y`.
    fn between(&self, x: u64, y: u64) -> Result<u64>;
    fn above(&self, x: u64) -> Result<u64>;

    /// The Skolem triple `c < a₀ < d < a₁ < e` for `a₀ < a₁`.
    fn skolem(&self, a0: u64, a1: u64) -> Result<(u64, u64, u64)> {
        Ok((self.below(a0)?, self.between(a0, a1)?, self.above(a1)?))
    }
}

/// `q(s)`: the size of the stage-`s` order, `q(0) = 2`, `q(s+1) = 2q(s) + 1`.
pub fn q(s: u32) -> u128 {
    3 * (1u128 << s) - 1
}

/// The built dense order `A`.
///
/// Unseeded, the `i`-th fresh number of stage `r` fills gap `i` (left to
/// right). Seeded, it fills gap `(m_r·i + c_r) mod 3·2^(r−1)` with `m_r`
/// coprime to 6, which is another interleaving of the same recursion.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dlo {
    seed: Option<u64>,
}

pub fn dlo_build() -> Dlo {
    Dlo { seed: None }
}

pub fn dlo_build_seeded(seed: u64) -> Dlo {
    Dlo { seed: Some(seed) }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn inverse_mod(a: u128, n: u128) -> u128 {
    let (mut r0, mut r1) = (n as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let qt = r0 / r1;
        (r0, r1) = (r1, r0 - qt * r1);
        (t0, t1) = (t1, t0 - qt * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(n as i128) as u128
}

impl Dlo {
    /// Gap count at stage `r ≥ 1` and the affine gap map `(m, c)`.
    fn gaps(&self, r: u32) -> (u128, u128, u128) {
        let n = q(r - 1) + 1;
        match self.seed {
            None => (n, 1, 0),
            Some(seed) => {
                let h = splitmix(seed ^ splitmix(r as u64));
                let m = (6 * ((h >> 24) as u128) + 1) % n;
                (n, m, (h as u128 & 0xff_ffff) % n)
            }
        }
    }

    pub fn key(&self, x: u64) -> Dyadic {
        match x {
            0 => Dyadic::int(1),
            1 => Dyadic::int(2),
            _ => {
                let x = x as u128;
                let r = (1..).find(|&r| x < q(r)).expect("q grows without bound");
                let (n, m, c) = self.gaps(r);
                let gap = (m * (x - q(r - 1)) + c) % n;
                Dyadic { num: 2 * gap + 1, exp: r }
            }
        }
    }

    /// Inverse of [`Dlo::key`] on dyadics of `(0, 3)`.
    pub fn element(&self, d: Dyadic) -> Result<u64> {
        if d <= Dyadic::int(0) || d >= Dyadic::int(3) {
            return Err(Error::PreconditionFailed(format!("{d:?} lies outside (0, 3)")));
        }
        let x = match (d.exp, d.num) {
            (0, n) => n - 1,
            (r, num) => {
                let (n, m, c) = self.gaps(r);
                let gap = (num - 1) / 2;
                q(r - 1) + inverse_mod(m, n) * ((gap + n - c) % n) % n
            }
        };
        u64::try_from(x).map_err(|_| Error::Overflow)
    }

    /// `A_s` from least to greatest.
    pub fn stage_order(&self, s: u32) -> Vec<u64> {
        let mut xs: Vec<u64> = (0..q(s) as u64).collect();
        xs.sort_by_key(|&x| self.key(x));
        xs
    }
}

impl LinearOrder for Dlo {
    fn less(&self, x: u64, y: u64) -> Result<bool> {
        Ok(self.key(x) < self.key(y))
    }

    fn below(&self, x: u64) -> Result<u64> {
        self.element(Dyadic::simplest_between(Dyadic::int(0), self.key(x)))
    }

    fn between(&self, x: u64, y: u64) -> Result<u64> {
        let (a, b) = (self.key(x), self.key(y));
        if a >= b {
            return Err(Error::PreconditionFailed(format!("between needs {x} < {y}")));
        }
        self.element(Dyadic::simplest_between(a, b))
    }

    fn above(&self, x: u64) -> Result<u64> {
        self.element(Dyadic::simplest_between(self.key(x), Dyadic::int(3)))
    }
}

/// Finite order-preserving map between two orders, kept sorted.
#[derive(Clone)]
pub struct PartialIso<'a> {
    a: &'a dyn LinearOrder,
    b: &'a dyn LinearOrder,
    /// `(x, h(x))` in increasing order.
    pairs: Vec<(u64, u64)>,
}

impl<'a> PartialIso<'a> {
    /// Starts from `h(0) = 0`, `h(1) = 1`; both orders must have `0 < 1`.
    pub fn new(a: &'a dyn LinearOrder, b: &'a dyn LinearOrder) -> Result<Self> {
        if !a.less(0, 1)? || !b.less(0, 1)? {
            return Err(Error::PreconditionFailed("both orders need 0 < 1".into()));
        }
        Ok(PartialIso { a, b, pairs: vec![(0, 0), (1, 1)] })
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    fn locate(&self, side: usize, x: u64) -> Result<std::result::Result<usize, usize>> {
        let ord = if side == 0 { self.a } else { self.b };
        let (mut lo, mut hi) = (0, self.pairs.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            let m = if side == 0 { self.pairs[mid].0 } else { self.pairs[mid].1 };
            if m == x {
                return Ok(Ok(mid));
            }
            if ord.less(m, x)? {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(Err(lo))
    }

    fn extend(&mut self, side: usize, x: u64) -> Result<u64> {
        let i = match self.locate(side, x)? {
            Ok(i) => return Ok(if side == 0 { self.pairs[i].1 } else { self.pairs[i].0 }),
            Err(i) => i,
        };
        let other = if side == 0 { self.b } else { self.a };
        let img = |p: (u64, u64)| if side == 0 { p.1 } else { p.0 };
        let y = if i == 0 {
            other.below(img(self.pairs[0]))?
        } else if i == self.pairs.len() {
            other.above(img(self.pairs[i - 1]))?
        } else {
            other.between(img(self.pairs[i - 1]), img(self.pairs[i]))?
        };
        self.pairs.insert(i, if side == 0 { (x, y) } else { (y, x) });
        Ok(y)
    }

    /// `h(x)`, extending the map if needed.
    pub fn forth(&mut self, x: u64) -> Result<u64> {
        self.extend(0, x)
    }

    /// `h⁻¹(y)`, extending the map if needed.
    pub fn back(&mut self, y: u64) -> Result<u64> {
        self.extend(1, y)
    }
}

/// Back-and-forth between two dense orders: even stages send the least
/// unmapped element of `A` forth, odd stages pull the least unmapped element
/// of `B` back. Each stage yields the pair it added.
#[derive(Clone)]
pub struct BackForth<'a> {
    iso: PartialIso<'a>,
    next: [u64; 2],
    t: u64,
}

pub fn dlo_backforth<'a>(a: &'a dyn LinearOrder, b: &'a dyn LinearOrder) -> Result<BackForth<'a>> {
    Ok(BackForth { iso: PartialIso::new(a, b)?, next: [2, 2], t: 0 })
}

impl<'a> BackForth<'a> {
    pub fn iso(&self) -> &PartialIso<'a> {
        &self.iso
    }

    pub fn into_iso(self) -> PartialIso<'a> {
        self.iso
    }

    fn step(&mut self) -> Result<(u64, u64)> {
        let side = (self.t % 2) as usize;
        let mapped = |iso: &PartialIso, v: u64| iso.pairs.iter().any(|p| if side == 0 { p.0 == v } else { p.1 == v });
        while mapped(&self.iso, self.next[side]) {
            self.next[side] += 1;
        }
        let x = self.next[side];
        let pair = if side == 0 { (x, self.iso.forth(x)?) } else { (self.iso.back(x)?, x) };
        self.t += 1;
        Ok(pair)
    }
}

impl PunctualStream for BackForth<'_> {
    type Item = Result<(u64, u64)>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Self::Item, OutOfFuel> {
        // membership scan plus a binary search of comparisons
        fuel.charge(self.iso.pairs.len() as u64 + 64)?;
        Ok(self.step())
    }

    fn stage(&self) -> u64 {
        self.t
    }
}

/// The order `B` coding `∀k ∃y θ(k, y)`.
///
/// `B` copies `A` on the multiples of 4 (key of `4a` is the key of `a`),
/// puts `4k + 2` at the integer `3 + k`, and fills the interval
/// `(4k + 2, 4k + 6)` with odd numbers only once a witness for `k` has
/// appeared: from then on every stage adds the dyadics of the next exponent
/// inside `(3 + k, 4 + k)`, numbered by the least unused odd numbers. The
/// internal predicate is `ψ(0, y) = true`, `ψ(k + 1, y) = θ(k, y)`, so the
/// interval of `0` is always growing.
#[derive(Clone)]
pub struct EncodedDlo {
    horizon: u32,
    /// Least witness `≤ horizon` of `ψ(k, ·)` for `k ≤ horizon`.
    witness: Vec<Option<u64>>,
    /// `opened[t]`: odd numbers used before stage `t`.
    opened: Vec<u128>,
}

/// Tabulates witnesses up to `horizon` stages (at most 60).
pub fn dlo_encode(theta: Predicate, horizon: u32) -> Result<EncodedDlo> {
    if horizon == 0 || horizon > 60 {
        return Err(Error::PreconditionFailed(format!("horizon must be in 1..=60, got {horizon}")));
    }
    let h = horizon as u64;
    let witness: Vec<Option<u64>> =
        (0..=h).map(|k| if k == 0 { Some(0) } else { (0..=h).find(|&y| theta(k - 1, y)) }).collect();
    let mut enc = EncodedDlo { horizon, witness, opened: vec![0, 0] };
    for t in 1..=horizon {
        let used: u128 = (0..=t as u64).filter_map(|k| enc.depth(k, t)).map(|j| 1u128 << (j - 1)).sum();
        enc.opened.push(enc.opened[t as usize] + used);
    }
    Ok(enc)
}

impl EncodedDlo {
    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Number of stages `≤ t` at which interval `k` grew, if it has.
    fn depth(&self, k: u64, t: u32) -> Option<u32> {
        let w = self.witness.get(k as usize).copied().flatten()?;
        let start = k.max(w).max(1);
        (start <= t as u64).then(|| t - start as u32 + 1)
    }

    fn horizon_err(&self, what: impl std::fmt::Display) -> Error {
        Error::HorizonExceeded(format!("{what} lies beyond stage {}", self.horizon))
    }

    pub fn key(&self, x: u64) -> Result<Dyadic> {
        match x % 4 {
            0 => Ok(dlo_build().key(x / 4)),
            2 => Ok(Dyadic::int(3 + (x / 4) as u128)),
            _ => {
                let o = (x / 2) as u128;
                let t = (1..=self.horizon).find(|&t| o < self.opened[t as usize + 1]).ok_or_else(|| self.horizon_err(x))?;
                let mut rest = o - self.opened[t as usize];
                for k in 0..=t as u64 {
                    let Some(j) = self.depth(k, t) else { continue };
                    let count = 1u128 << (j - 1);
                    if rest < count {
                        let num = ((3 + k as u128) << j) + 2 * rest + 1;
                        return Ok(Dyadic { num, exp: j });
                    }
                    rest -= count;
                }
                unreachable!("stage counts cover the odd number")
            }
        }
    }

    /// Inverse of [`EncodedDlo::key`], when the element exists by the horizon.
    pub fn element(&self, d: Dyadic) -> Result<u64> {
        if d < Dyadic::int(3) {
            return dlo_build().element(d)?.checked_mul(4).ok_or(Error::Overflow);
        }
        let k = (d.num >> d.exp) - 3;
        if d.exp == 0 {
            return u64::try_from(4 * k + 2).map_err(|_| Error::Overflow);
        }
        let k = u64::try_from(k).map_err(|_| Error::Overflow)?;
        let w = self.witness.get(k as usize).copied().flatten().ok_or_else(|| self.horizon_err(format!("interval {k}")))?;
        let t = k.max(w).max(1) + d.exp as u64 - 1;
        if t > self.horizon as u64 {
            return Err(self.horizon_err(format!("{d:?}")));
        }
        let t = t as u32;
        let before: u128 = (0..k).filter_map(|k2| self.depth(k2, t)).map(|j| 1u128 << (j - 1)).sum();
        let m = d.num - ((3 + k as u128) << d.exp);
        let o = self.opened[t as usize] + before + (m - 1) / 2;
        u64::try_from(2 * o + 1).map_err(|_| Error::Overflow)
    }

    /// `B_s` from least to greatest.
    pub fn stage_order(&self, s: u32) -> Result<Vec<u64>> {
        let mut xs: Vec<u64> = (0..q(s) as u64).map(|a| 4 * a).collect();
        xs.extend((0..=s as u64 + 1).map(|k| 4 * k + 2));
        xs.extend((0..self.opened[s as usize + 1] as u64).map(|o| 2 * o + 1));
        let mut keyed = xs.into_iter().map(|x| Ok((self.key(x)?, x))).collect::<Result<Vec<_>>>()?;
        keyed.sort();
        Ok(keyed.into_iter().map(|(_, x)| x).collect())
    }
}

/// Searches witnesses up to the horizon, so it is an oracle, not a Skolem
/// function of `B`: the coding intervals only fill once a witness shows up.
impl LinearOrder for EncodedDlo {
    fn less(&self, x: u64, y: u64) -> Result<bool> {
        Ok(self.key(x)? < self.key(y)?)
    }

    fn below(&self, x: u64) -> Result<u64> {
        self.element(Dyadic::simplest_between(Dyadic::int(0), self.key(x)?))
    }

    fn between(&self, x: u64, y: u64) -> Result<u64> {
        let (a, b) = (self.key(x)?, self.key(y)?);
        if a >= b {
            return Err(Error::PreconditionFailed(format!("between needs {x} < {y}")));
        }
        self.element(Dyadic::simplest_between(a, b))
    }

    fn above(&self, x: u64) -> Result<u64> {
        let a = self.key(x)?;
        self.element(Dyadic::simplest_between(a, Dyadic::int((a.num >> a.exp) + 2)))
    }
}

/// `f(k) = μy ≤ ξ(k). θ(k, y)` with `ξ(k+1) = h⁻¹(g_A(h(4k+6), h(4k+10)))`,
/// where `h : B → A` is an isomorphism given by its two directions.
pub fn dlo_decode(
    theta: &dyn Fn(u64, u64) -> bool,
    h: &mut dyn FnMut(u64) -> Result<u64>,
    h_inv: &mut dyn FnMut(u64) -> Result<u64>,
    n: u64,
) -> Result<Vec<u64>> {
    let a = dlo_build();
    (0..n)
        .map(|k| {
            // θ(k, ·) is coded by interval k + 1
            let j = k + 1;
            let (lo, hi) = (h(4 * j + 2)?, h(4 * j + 6)?);
            let xi = h_inv(a.between(lo, hi)?)?;
            (0..=xi).find(|&y| theta(k, y)).ok_or_else(|| Error::promise(format!("no witness for {k} up to ξ = {xi}")))
        })
        .collect()
}

/// Builder stream: stage `t` reveals element `t` and its rank among `0..=t`.
#[derive(Clone)]
pub struct OrderStream<O> {
    order: O,
    t: u64,
}

impl<O: LinearOrder + Clone> OrderStream<O> {
    pub fn new(order: O) -> Self {
        OrderStream { order, t: 0 }
    }
}

impl<O: LinearOrder + Clone> PunctualStream for OrderStream<O> {
    type Item = Result<u64>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Result<u64>, OutOfFuel> {
        fuel.charge(self.t + 1)?;
        let t = self.t;
        self.t += 1;
        let mut rank = 0;
        for u in 0..t {
            match self.order.less(u, t) {
                Ok(true) => rank += 1,
                Ok(false) => {}
                Err(e) => return Ok(Err(e)),
            }
        }
        Ok(Ok(rank))
    }

    fn stage(&self) -> u64 {
        self.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn first_stages_interleave_fresh_numbers() {
        let a = dlo_build();
        assert_eq!(a.stage_order(0), vec![0, 1]);
        assert_eq!(a.stage_order(1), vec![2, 0, 3, 1, 4]);
        assert_eq!((0..5).map(q).collect::<Vec<_>>(), vec![2, 5, 11, 23, 47]);
        // each stage is the previous one with a fresh number in every gap and at both ends
        for s in 1..6 {
            let prev = a.stage_order(s - 1);
            let cur = a.stage_order(s);
            assert_eq!(cur.len(), 2 * prev.len() + 1);
            assert!(cur.iter().skip(1).step_by(2).eq(prev.iter()));
            let fresh: Vec<u64> = cur.iter().step_by(2).copied().collect();
            assert!(fresh.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn keys_round_trip() {
        for a in [dlo_build(), dlo_build_seeded(7), dlo_build_seeded(99)] {
            for x in 0..500 {
                assert_eq!(a.element(a.key(x)).unwrap(), x);
            }
        }
        // the seeded order still refines stage by stage
        let b = dlo_build_seeded(7);
        for s in 1..6 {
            assert!(b.stage_order(s).iter().skip(1).step_by(2).eq(b.stage_order(s - 1).iter()));
        }
    }

    #[test]
    fn skolem_triples_are_ordered() {
        let a = dlo_build();
        for x in 0..40 {
            for y in 0..40 {
                if a.less(x, y).unwrap() {
                    let (c, d, e) = a.skolem(x, y).unwrap();
                    let lt = |u, v| a.less(u, v).unwrap();
                    assert!(lt(c, x) && lt(x, d) && lt(d, y) && lt(y, e));
                }
            }
        }
    }

    #[test]
    fn encoded_order_starts_as_described() {
        let theta: Predicate = Arc::new(|k, y| y >= k);
        let b = dlo_encode(theta, 20).unwrap();
        assert_eq!(b.stage_order(0).unwrap(), vec![0, 4, 2, 6]);
        for x in 0..2000 {
            assert_eq!(b.element(b.key(x).unwrap()).unwrap(), x, "element {x}");
        }
    }

    #[test]
    fn coding_intervals_stay_empty_without_witnesses() {
        let theta: Predicate = Arc::new(|k, y| k != 2 && y >= k);
        let b = dlo_encode(theta, 12).unwrap();
        // θ(2, ·) never holds, so interval 3 = (14, 18) never fills
        let s = b.stage_order(10).unwrap();
        let (i, j) = (s.iter().position(|&x| x == 14).unwrap(), s.iter().position(|&x| x == 18).unwrap());
        assert_eq!(j, i + 1);
        assert!(matches!(b.between(14, 18), Err(Error::HorizonExceeded(_))));
    }
}
