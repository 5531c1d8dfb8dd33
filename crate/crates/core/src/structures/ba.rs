//! Countable atomless Boolean algebras presented as unions of cells of a
//! partition that is refined stage by stage, and the algebra coding
//! `∀n ∃y ψ(n, y)` into how often the cells below a fixed element split.
//!
//! Level `s` has an ordered list of atoms (cells); bit `i` of a mask is atom
//! `i`. Elements are numbered by the least level at which they are a union of
//! atoms: level 0 gives `0 ↦ ∅`, `1 ↦ everything`, then the remaining masks
//! in numeric order; level `s ≥ 1` gives the masks that are new at `s`, in
//! numeric order, after the `2^{atoms(s−1)}` older elements. So the index of
//! an element is at least its level.

use super::Predicate;
use crate::clock::{FuelMeter, PunctualStream};
use crate::error::{Error, Result};
use crate::{par, OutOfFuel};

/// Boolean algebra on ℕ with `0` and `1` as bottom and top.
pub trait BooleanAlgebra: Send + Sync {
    fn join(&self, x: u64, y: u64) -> Result<u64>;
    fn meet(&self, x: u64, y: u64) -> Result<u64>;
    fn neg(&self, x: u64) -> Result<u64>;
    /// Skolem split of a nonzero `x` into disjoint nonzero `y ∨ z = x`.
    fn split(&self, x: u64) -> Result<(u64, u64)>;

    fn below(&self, x: u64, y: u64) -> Result<bool> {
        Ok(self.meet(x, y)? == x)
    }
}

#[derive(Debug, Clone)]
struct Level {
    /// Cell ids, bit order.
    atoms: Vec<u32>,
    /// Positions in the previous level's atoms that split here.
    split: Vec<bool>,
}

/// Which side of the distinguished split a cell lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Free,
    Inside,
    Outside,
}

#[derive(Debug, Clone)]
struct Refinement {
    levels: Vec<Level>,
    side: Vec<Side>,
    /// Unsplit cells of each side in creation order.
    queue: [std::collections::VecDeque<u32>; 3],
}

fn side_slot(s: Side) -> usize {
    s as usize
}

impl Refinement {
    fn new(roots: &[Side]) -> Self {
        let mut queue: [std::collections::VecDeque<u32>; 3] = Default::default();
        for (i, &s) in roots.iter().enumerate() {
            queue[side_slot(s)].push_back(i as u32);
        }
        Refinement {
            levels: vec![Level { atoms: (0..roots.len() as u32).collect(), split: Vec::new() }],
            side: roots.to_vec(),
            queue,
        }
    }

    /// Adds a level splitting the oldest unsplit cell of each listed side.
    fn refine(&mut self, sides: &[Side]) {
        let prev = &self.levels[self.levels.len() - 1];
        let mut cut = Vec::new();
        for &s in sides {
            if let Some(c) = self.queue[side_slot(s)].pop_front() {
                cut.push(c);
            }
        }
        let mut atoms = Vec::with_capacity(prev.atoms.len() + cut.len());
        let mut split = Vec::with_capacity(prev.atoms.len());
        for &a in &prev.atoms {
            if cut.contains(&a) {
                let s = self.side[a as usize];
                for _ in 0..2 {
                    let id = self.side.len() as u32;
                    self.side.push(s);
                    self.queue[side_slot(s)].push_back(id);
                    atoms.push(id);
                }
                split.push(true);
            } else {
                atoms.push(a);
                split.push(false);
            }
        }
        self.levels.push(Level { atoms, split });
    }

    fn width(&self, s: usize) -> usize {
        self.levels[s].atoms.len()
    }

    fn full(&self, s: usize) -> u128 {
        (1u128 << self.width(s)) - 1
    }

    /// Mask of level `s − 1` seen at level `s`.
    fn expand(&self, s: usize, m: u128) -> u128 {
        let mut out = 0u128;
        let mut p = 0;
        for (j, &sp) in self.levels[s].split.iter().enumerate() {
            let b = (m >> j) & 1;
            out |= b << p;
            p += 1;
            if sp {
                out |= b << p;
                p += 1;
            }
        }
        out
    }

    /// Mask of level `s` at level `s − 1`, if it is a union of old atoms.
    fn contract(&self, s: usize, m: u128) -> Option<u128> {
        let mut out = 0u128;
        let mut p = 0;
        for (j, &sp) in self.levels[s].split.iter().enumerate() {
            let b = (m >> p) & 1;
            p += 1;
            if sp {
                if (m >> p) & 1 != b {
                    return None;
                }
                p += 1;
            }
            out |= b << j;
        }
        Some(out)
    }

    /// Masks of level `s − 1` whose expansion is numerically below `m`.
    fn old_below(&self, s: usize, m: u128) -> u128 {
        let split = &self.levels[s].split;
        let mut low = Vec::with_capacity(split.len());
        let mut p = 0;
        for &sp in split {
            low.push(p);
            p += if sp { 2 } else { 1 };
        }
        let mut count = 0u128;
        for j in (0..split.len()).rev() {
            let w = if split[j] { 2 } else { 1 };
            let block = (m >> low[j]) & ((1 << w) - 1);
            let ones = (1u128 << w) - 1;
            if block == 0 {
                continue;
            }
            count += 1u128 << j;
            if ones < block {
                unreachable!("a block never exceeds all ones");
            } else if ones == block {
                continue;
            } else {
                return count;
            }
        }
        count
    }

    fn offset(&self, s: usize) -> u128 {
        if s == 0 {
            0
        } else {
            1u128 << self.width(s - 1)
        }
    }

    fn rank(&self, s: usize, m: u128) -> u128 {
        if s == 0 {
            return if m == 0 {
                0
            } else if m == self.full(0) {
                1
            } else {
                m + 1
            };
        }
        self.offset(s) + m - self.old_below(s, m)
    }

    /// Lowest level representing a level-`s` mask.
    fn normalize(&self, mut s: usize, mut m: u128) -> (usize, u128) {
        while s > 0 {
            match self.contract(s, m) {
                Some(c) => {
                    s -= 1;
                    m = c;
                }
                None => break,
            }
        }
        (s, m)
    }

    fn lift(&self, from: usize, to: usize, mut m: u128) -> u128 {
        for s in from + 1..=to {
            m = self.expand(s, m);
        }
        m
    }

    /// `(level, mask)` of an index within the tabulated levels.
    fn unrank(&self, x: u64) -> Option<(usize, u128)> {
        let x = x as u128;
        let s = (0..self.levels.len()).find(|&s| x < 1u128 << self.width(s))?;
        if s == 0 {
            let full = self.full(0);
            return Some((0, match x {
                0 => 0,
                1 => full,
                _ => x - 1,
            }));
        }
        let r = x - self.offset(s);
        // least m with m + 1 − old_below(s, m + 1) > r
        let (mut lo, mut hi) = (0u128, self.full(s));
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if mid + 1 - self.old_below(s, mid + 1) > r {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some((s, lo))
    }
}

/// A refinement-presented algebra tabulated up to the levels whose indices
/// fit in `u64`.
#[derive(Debug, Clone)]
struct Presented {
    r: Refinement,
    horizon: &'static str,
}

impl Presented {
    fn decode(&self, x: u64) -> Result<(usize, u128)> {
        self.r.unrank(x).ok_or_else(|| Error::HorizonExceeded(format!("element {x} lies beyond the {}", self.horizon)))
    }

    fn encode(&self, s: usize, m: u128) -> Result<u64> {
        let (s, m) = self.r.normalize(s, m);
        u64::try_from(self.r.rank(s, m)).map_err(|_| Error::Overflow)
    }

    fn binary(&self, x: u64, y: u64, op: impl Fn(u128, u128) -> u128) -> Result<u64> {
        let (sx, mx) = self.decode(x)?;
        let (sy, my) = self.decode(y)?;
        let s = sx.max(sy);
        self.encode(s, op(self.r.lift(sx, s, mx), self.r.lift(sy, s, my)))
    }

    fn neg(&self, x: u64) -> Result<u64> {
        let (s, m) = self.decode(x)?;
        self.encode(s, !m & self.r.full(s))
    }

    /// Lifts `x` to the first level splitting one of its atoms and cuts off
    /// the first child of that atom.
    fn split(&self, x: u64) -> Result<(u64, u64)> {
        let (s0, m0) = self.decode(x)?;
        if m0 == 0 {
            return Err(Error::ZeroElement);
        }
        let mut m = m0;
        for s in s0 + 1..self.r.levels.len() {
            let lvl = &self.r.levels[s];
            let mut p = 0;
            for (j, &sp) in lvl.split.iter().enumerate() {
                if sp && (m >> j) & 1 == 1 {
                    let full = self.r.expand(s, m);
                    let y = 1u128 << p;
                    return Ok((self.encode(s, y)?, self.encode(s, full & !y)?));
                }
                p += if sp { 2 } else { 1 };
            }
            m = self.r.expand(s, m);
        }
        Err(Error::HorizonExceeded(format!("no atom of {x} splits within the tabulated levels")))
    }

    /// Pairwise disjoint nonzero elements joining to `x`, splitting the
    /// oldest piece first.
    fn partition(&self, x: u64, k: usize) -> Result<Vec<u64>> {
        let mut pieces = std::collections::VecDeque::from([x]);
        while pieces.len() < k {
            let p = pieces.pop_front().expect("nonempty");
            let (y, z) = self.split(p)?;
            pieces.push_back(y);
            pieces.push_back(z);
        }
        Ok(pieces.into())
    }

    fn tabulate(mut r: Refinement, mut next: impl FnMut(usize) -> Option<Vec<Side>>) -> Refinement {
        loop {
            let s = r.levels.len();
            if r.width(s - 1) >= 63 {
                return r;
            }
            match next(s) {
                Some(sides) => r.refine(&sides),
                None => return r,
            }
        }
    }
}

macro_rules! boolean_ops {
    ($t:ty) => {
        impl BooleanAlgebra for $t {
            fn join(&self, x: u64, y: u64) -> Result<u64> {
                self.p.binary(x, y, |a, b| a | b)
            }
            fn meet(&self, x: u64, y: u64) -> Result<u64> {
                self.p.binary(x, y, |a, b| a & b)
            }
            fn neg(&self, x: u64) -> Result<u64> {
                self.p.neg(x)
            }
            fn split(&self, x: u64) -> Result<(u64, u64)> {
                self.p.split(x)
            }
        }

        impl $t {
            /// Level at which element `x` first appears.
            pub fn level(&self, x: u64) -> Result<usize> {
                Ok(self.p.decode(x)?.0)
            }

            /// `k` pairwise disjoint nonzero elements with join `x`.
            pub fn partition(&self, x: u64, k: usize) -> Result<Vec<u64>> {
                self.p.partition(x, k)
            }

            /// Atoms of the partition at level `s`.
            pub fn atoms_at(&self, s: usize) -> Result<Vec<u64>> {
                let w = self.p.r.levels.get(s).ok_or_else(|| Error::HorizonExceeded(format!("level {s}")))?.atoms.len();
                (0..w).map(|i| self.p.encode(s, 1 << i)).collect()
            }
        }
    };
}

/// The built algebra: one cell, and every stage splits the oldest unsplit
/// cell, so `x` lives at level at most `log₂ x`.
#[derive(Debug, Clone)]
pub struct AtomlessBa {
    p: Presented,
}

pub fn ba_build() -> AtomlessBa {
    let r = Presented::tabulate(Refinement::new(&[Side::Free]), |_| Some(vec![Side::Free]));
    AtomlessBa { p: Presented { r, horizon: "u64 index range" } }
}

boolean_ops!(AtomlessBa);

/// The coding algebra. Level 0 has atoms `d` (element 2) and `¬d`
/// (element 3). Every stage splits the oldest cell below `¬d`; it also
/// splits the oldest cell below `d` when `ℓ` grows, where `ℓ(0) = 0` and
/// `ℓ(s) = ℓ(s−1) + 1` exactly when some `y ≤ s` witnesses `ψ(ℓ(s−1), y)`.
/// So the cells below `d` at level `s` number `1 + ℓ(s)`, and every
/// `x < ℓ(s)` has a witness `≤ s`.
#[derive(Debug, Clone)]
pub struct CodedBa {
    p: Presented,
    ell: Vec<u64>,
}

/// The distinguished element of [`CodedBa`].
pub const D: u64 = 2;

/// Tabulates stages up to `horizon` (capped where indices leave `u64`).
pub fn ba_encode(psi: Predicate, horizon: usize) -> CodedBa {
    let mut ell = vec![0u64];
    let r = Presented::tabulate(Refinement::new(&[Side::Inside, Side::Outside]), |s| {
        if s > horizon {
            return None;
        }
        let prev = ell[s - 1];
        let grew = (0..=s as u64).any(|y| psi(prev, y));
        ell.push(prev + grew as u64);
        Some(if grew { vec![Side::Outside, Side::Inside] } else { vec![Side::Outside] })
    });
    ell.truncate(r.levels.len());
    CodedBa { p: Presented { r, horizon: "encoding horizon" }, ell }
}

boolean_ops!(CodedBa);

impl CodedBa {
    /// `ℓ(s)` for the tabulated stages.
    pub fn ell(&self) -> &[u64] {
        &self.ell
    }

    pub fn levels(&self) -> usize {
        self.ell.len()
    }
}

/// Witnesses for `x < m`. `d_pre` is `g⁻¹(d)` for an isomorphism `g` from
/// [`ba_build`] onto the coding algebra. The `m + 1` pieces of `d_pre` map
/// to disjoint nonzero elements below `d`, which need `m + 1` cells below
/// `d`, so `ℓ ≥ m` at their level and every witness sits below the largest
/// image index.
pub fn ba_decode(
    psi: &dyn Fn(u64, u64) -> bool,
    d_pre: u64,
    g: &mut dyn FnMut(u64) -> Result<u64>,
    m: usize,
) -> Result<Vec<u64>> {
    let a = ba_build();
    let mut bound = 0;
    for p in a.partition(d_pre, m + 1)? {
        bound = bound.max(g(p)?);
    }
    (0..m as u64)
        .map(|x| (0..=bound).find(|&y| psi(x, y)).ok_or_else(|| Error::promise(format!("no witness for {x} up to {bound}"))))
        .collect()
}

/// Axioms on `0..n`: commutativity, associativity, absorption,
/// distributivity, complements and bounds. Returns a failing triple.
pub fn audit_axioms(b: &dyn BooleanAlgebra, n: u64) -> Result<Option<(u64, u64, u64)>> {
    let xs: Vec<u64> = (0..n).collect();
    let bad = par::map(&xs, |&x| -> Result<Option<(u64, u64, u64)>> {
        let nx = b.neg(x)?;
        if b.join(x, nx)? != 1 || b.meet(x, nx)? != 0 || b.join(x, 0)? != x || b.meet(x, 1)? != x {
            return Ok(Some((x, x, x)));
        }
        for y in 0..n {
            let (j, m) = (b.join(x, y)?, b.meet(x, y)?);
            if j != b.join(y, x)? || m != b.meet(y, x)? || b.join(x, m)? != x || b.meet(x, j)? != x {
                return Ok(Some((x, y, y)));
            }
            for z in 0..n {
                let ok = b.join(j, z)? == b.join(x, b.join(y, z)?)?
                    && b.meet(m, z)? == b.meet(x, b.meet(y, z)?)?
                    && b.meet(x, b.join(y, z)?)? == b.join(m, b.meet(x, z)?)?;
                if !ok {
                    return Ok(Some((x, y, z)));
                }
            }
        }
        Ok(None)
    });
    for r in bad {
        if let Some(t) = r? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Skolem splits of every nonzero `x < n` are disjoint, nonzero, and join to `x`.
pub fn audit_splits(b: &dyn BooleanAlgebra, n: u64) -> Result<Option<u64>> {
    for x in 1..n {
        let (y, z) = b.split(x)?;
        if y == 0 || z == 0 || b.join(y, z)? != x || b.meet(y, z)? != 0 {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Builder stream: stage `t` reveals `t ∨ u` and `t ∧ u` for `u ≤ t`, and `¬t`.
pub struct AlgebraStream<B> {
    algebra: B,
    t: u64,
}

impl<B: BooleanAlgebra> AlgebraStream<B> {
    pub fn new(algebra: B) -> Self {
        AlgebraStream { algebra, t: 0 }
    }
}

/// Operation table row of one new element.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AlgebraRow {
    pub element: u64,
    pub neg: u64,
    pub join: Vec<u64>,
    pub meet: Vec<u64>,
}

impl<B: BooleanAlgebra> PunctualStream for AlgebraStream<B> {
    type Item = Result<AlgebraRow>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Self::Item, OutOfFuel> {
        let t = self.t;
        fuel.charge(2 * t + 3)?;
        self.t += 1;
        let b = &self.algebra;
        let row = (|| {
            Ok(AlgebraRow {
                element: t,
                neg: b.neg(t)?,
                join: (0..=t).map(|u| b.join(t, u)).collect::<Result<_>>()?,
                meet: (0..=t).map(|u| b.meet(t, u)).collect::<Result<_>>()?,
            })
        })();
        Ok(row)
    }

    fn stage(&self) -> u64 {
        self.t
    }
}
