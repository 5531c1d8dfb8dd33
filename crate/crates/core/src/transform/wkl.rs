//! Trees coding Δ⁰₁ sets, leftmost paths through pruned trees, and the
//! reductions between Heine–Borel covers and binary trees.

use num_traits::{One, Zero};

use crate::clock::{FuelMeter, PunctualStream};
use crate::error::{Error, OutOfFuel, Result};
use crate::rat::{dyadic, Rat};

use super::interval::covers;
use super::{string_at, BinaryTree, Bits, FueledTree, Interval, IntervalCover};

/// Tree whose only path is the characteristic function of `{n : ∃x φ(n, x)}`,
/// given that `¬ψ(n, ·)` holds everywhere exactly when `φ(n, ·)` fires somewhere.
pub struct Delta01Tree<P, S> {
    phi: P,
    psi: S,
}

/// Builds the tree after checking on `[0, horizon]²` that no `n` has both a
/// `φ`-witness and a `ψ`-witness.
pub fn delta01_to_tree<P, S>(phi: P, psi: S, horizon: u64) -> Result<Delta01Tree<P, S>>
where
    P: Fn(u64, u64) -> bool + Sync,
    S: Fn(u64, u64) -> bool + Sync,
{
    for n in 0..=horizon {
        let p = (0..=horizon).find(|&x| phi(n, x));
        let q = (0..=horizon).find(|&x| psi(n, x));
        if let (Some(x), Some(y)) = (p, q) {
            return Err(Error::InstanceInconsistent(format!("φ({n}, {x}) and ψ({n}, {y}) both hold")));
        }
    }
    Ok(Delta01Tree { phi, psi })
}

impl<P, S> FueledTree for Delta01Tree<P, S>
where
    P: Fn(u64, u64) -> bool + Sync,
    S: Fn(u64, u64) -> bool + Sync,
{
    fn member_fueled(&self, s: &[u8], fuel: &mut FuelMeter) -> std::result::Result<bool, OutOfFuel> {
        let len = s.len() as u64;
        for (i, &b) in s.iter().enumerate() {
            fuel.charge(len + 1)?;
            let refuted = |x| if b == 0 { (self.phi)(i as u64, x) } else { (self.psi)(i as u64, x) };
            if (0..=len).any(refuted) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl<P, S> BinaryTree for Delta01Tree<P, S>
where
    P: Fn(u64, u64) -> bool + Sync,
    S: Fn(u64, u64) -> bool + Sync,
{
    fn member(&self, s: &[u8]) -> bool {
        self.member_fueled(s, &mut FuelMeter::unlimited()).expect("unlimited meter")
    }
}

/// First `n` bits of the leftmost path of a tree in which every member has a
/// member child.
pub fn pruned_path<T: BinaryTree + ?Sized>(tree: &T, n: usize) -> Result<Bits> {
    let mut p = PathStream::new(tree);
    (0..n).map(|_| p.step(&mut FuelMeter::unlimited()).expect("unlimited meter")).collect()
}

/// Leftmost path of a pruned binary tree, one bit per stage.
pub struct PathStream<'a, T: ?Sized> {
    tree: &'a T,
    prefix: Bits,
}

impl<'a, T: BinaryTree + ?Sized> PathStream<'a, T> {
    pub fn new(tree: &'a T) -> Self {
        PathStream { tree, prefix: Vec::new() }
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    fn step(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Result<u8>, OutOfFuel> {
        for b in 0..2 {
            fuel.charge(self.prefix.len() as u64 + 1)?;
            self.prefix.push(b);
            if self.tree.member(&self.prefix) {
                return Ok(Ok(b));
            }
            self.prefix.pop();
        }
        Ok(Err(Error::PromiseViolation(format!("node {:?} has no child", self.prefix))))
    }
}

impl<T: BinaryTree + ?Sized> PunctualStream for PathStream<'_, T> {
    /// `None` once the promise has failed; the stream stays stuck there.
    type Item = Option<u8>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Option<u8>, OutOfFuel> {
        Ok(self.step(fuel)?.ok())
    }

    fn stage(&self) -> u64 {
        self.prefix.len() as u64
    }
}

/// Leftmost path of a pruned ω-branching tree, searching each node's
/// children below `bound(node)`.
pub fn pruned_path_omega<M, B>(member: M, bound: B, n: usize) -> Result<Vec<u64>>
where
    M: Fn(&[u64]) -> bool,
    B: Fn(&[u64]) -> u64,
{
    let mut p: Vec<u64> = Vec::with_capacity(n);
    for _ in 0..n {
        let cap = bound(&p);
        let found = (0..cap).find(|&m| {
            p.push(m);
            let ok = member(&p);
            p.pop();
            ok
        });
        match found {
            Some(m) => p.push(m),
            None => return Err(Error::PromiseViolation(format!("node {p:?} has no child below {cap}"))),
        }
    }
    Ok(p)
}

/// `[k/2^n, (k+1)/2^n]` where `k` is `ρ` read in binary.
pub fn dyadic_cell(s: &[u8]) -> (Rat, Rat) {
    let n = s.len() as u32;
    let k = s.iter().fold(0i128, |acc, &b| 2 * acc + i128::from(b));
    (dyadic(k, n), dyadic(k + 1, n))
}

/// Tree of dyadic cells not yet seen covered: `ρ` survives unless the
/// intervals listed before stage `|ρ|` cover its cell.
pub struct CoverTree {
    cover: IntervalCover,
}

pub fn hb_to_wkl(cover: IntervalCover) -> CoverTree {
    CoverTree { cover }
}

impl CoverTree {
    /// The real coded by a path prefix, `k/2^n`. Successive prefixes give a
    /// nondecreasing sequence moving by at most `2^{−n−1}` per step.
    pub fn decode(path: &[u8]) -> Rat {
        dyadic_cell(path).0
    }
}

impl FueledTree for CoverTree {
    fn member_fueled(&self, s: &[u8], fuel: &mut FuelMeter) -> std::result::Result<bool, OutOfFuel> {
        let n = s.len().min(self.cover.len());
        fuel.charge((n as u64 + 1) * (n as u64 + 1))?;
        let (lo, hi) = dyadic_cell(s);
        Ok(!covers(self.cover[..n].iter().flatten(), lo, hi))
    }
}

impl BinaryTree for CoverTree {
    fn member(&self, s: &[u8]) -> bool {
        self.member_fueled(s, &mut FuelMeter::unlimited()).expect("unlimited meter")
    }
}

fn pow3_neg(n: usize) -> Rat {
    Rat::new(1, 3i128.pow(n as u32))
}

/// Left end of the Cantor cell of `ρ`: `Σ 2ρ_j 3^{−j−1}`.
pub fn cantor_left(s: &[u8]) -> Rat {
    s.iter().enumerate().fold(Rat::zero(), |acc, (j, &b)| acc + Rat::from_integer(2 * i128::from(b)) * pow3_neg(j + 1))
}

/// The open middle third removed from the Cantor cell of `ρ`.
pub fn middle_gap(s: &[u8]) -> Interval {
    let c = cantor_left(s);
    let w = pow3_neg(s.len() + 1);
    Interval::new(c + w, c + w * Rat::from_integer(2))
}

/// Open neighbourhood of the Cantor cell of `ρ` that reaches only into the
/// adjacent gaps, which are at least three times wider than the margin.
pub fn cantor_neighbourhood(s: &[u8]) -> Interval {
    let c = cantor_left(s);
    let m = pow3_neg(s.len() + 1);
    Interval::new(c - m, c + pow3_neg(s.len()) + m)
}

/// Inverse of the Cantor map to `depth` bits; `None` off the Cantor set.
pub fn cantor_decode(r: Rat, depth: usize) -> Option<Bits> {
    if r < Rat::zero() || r > Rat::one() {
        return None;
    }
    let mut c = Rat::zero();
    let mut out = Vec::with_capacity(depth);
    for j in 0..depth {
        let w = pow3_neg(j + 1);
        if r <= c + w {
            out.push(0);
        } else if r >= c + w * Rat::from_integer(2) {
            out.push(1);
            c += w * Rat::from_integer(2);
        } else {
            return None;
        }
    }
    Some(out)
}

/// Cover whose uncovered points are the Cantor images of paths through `T`.
/// Stage `2i` lists the middle gap of the `i`-th string, stage `2i + 1` its
/// Cantor neighbourhood if it has left `T` and the empty interval otherwise.
pub struct WklCoverStream<'a, T: ?Sized> {
    tree: &'a T,
    t: u64,
}

pub fn wkl_to_hb<T: FueledTree + ?Sized>(tree: &T) -> WklCoverStream<'_, T> {
    WklCoverStream { tree, t: 0 }
}

/// Stages after which every string of length `≤ depth` has been handled.
pub fn wkl_cover_horizon(depth: usize) -> u64 {
    2 * ((1u64 << (depth + 1)) - 1)
}

impl<T: FueledTree + ?Sized> PunctualStream for WklCoverStream<'_, T> {
    type Item = Option<Interval>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Option<Interval>, OutOfFuel> {
        let s = string_at(self.t / 2);
        fuel.charge(s.len() as u64 + 1)?;
        let out = if self.t % 2 == 0 {
            Some(middle_gap(&s))
        } else if self.tree.member_fueled(&s, fuel)? {
            None
        } else {
            Some(cantor_neighbourhood(&s))
        };
        self.t += 1;
        Ok(out)
    }

    fn stage(&self) -> u64 {
        self.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::run_unbudgeted;
    use crate::transform::interval::uncovered;
    use crate::transform::{extendible, extendible_strings, strings_of_len};

    #[test]
    fn parity_instance_has_the_alternating_path() {
        let t = delta01_to_tree(|i, _| i % 2 == 0, |i, _| i % 2 == 1, 50).unwrap();
        assert!(!t.member(&[0, 1]));
        assert!(!t.member(&[0]));
        for n in 0..=6 {
            let alive: Vec<Bits> = strings_of_len(n).filter(|s| t.member(s)).collect();
            let want: Bits = (0..n).map(|i| u8::from(i % 2 == 0)).collect();
            assert_eq!(alive, vec![want]);
        }
    }

    #[test]
    fn never_phi_gives_zeros() {
        let t = delta01_to_tree(|_, _| false, |_, x| x == 0, 20).unwrap();
        assert_eq!(pruned_path(&t, 10).unwrap(), vec![0; 10]);
    }

    #[test]
    fn inconsistent_instances_are_rejected() {
        let r = delta01_to_tree(|i, x| i == 3 && x == 7, |i, x| i == 3 && x == 2, 10);
        assert!(matches!(r, Err(Error::InstanceInconsistent(_))));
    }

    #[test]
    fn late_witnesses_still_pin_the_path() {
        // f(i) = 1 iff i ≡ 0, 1 mod 3, with witnesses appearing at depth i mod 5
        let f = |i: u64| i % 3 != 2;
        let t = delta01_to_tree(move |i, x| f(i) && x >= i % 5, move |i, x| !f(i) && x >= i % 5, 30).unwrap();
        let want: Bits = (0..10).map(|i| u8::from(f(i))).collect();
        assert_eq!(extendible_strings(&t, 10, 14), vec![want]);
    }

    #[test]
    fn leftmost_paths() {
        let full = |_: &[u8]| true;
        assert_eq!(pruned_path(&full, 6).unwrap(), vec![0; 6]);
        let ones = |s: &[u8]| s.first().is_none_or(|&b| b == 1);
        assert_eq!(pruned_path(&ones, 4).unwrap(), vec![1, 0, 0, 0]);
        let leaf = |s: &[u8]| s.len() < 3;
        assert!(matches!(pruned_path(&leaf, 5), Err(Error::PromiseViolation(_))));
    }

    #[test]
    fn choice_tree_path_is_the_planted_choice() {
        let choice = |n: u64| (n * n + 3) % 7;
        let theta = move |n: u64, m: u64| m == choice(n);
        let member = move |s: &[u64]| s.iter().enumerate().all(|(n, &m)| theta(n as u64, m));
        let p = pruned_path_omega(member, |_| 7, 32).unwrap();
        assert_eq!(p, (0..32).map(choice).collect::<Vec<_>>());
        assert!(pruned_path_omega(member, |_| 2, 32).is_err());
    }

    #[test]
    fn empty_cover_gives_the_full_tree() {
        let t = hb_to_wkl(vec![None; 16]);
        assert!(strings_of_len(8).all(|s| t.member(&s)));
        assert_eq!(CoverTree::decode(&pruned_path(&t, 8).unwrap()), Rat::zero());
    }

    #[test]
    fn cover_of_the_upper_part_leaves_small_cells() {
        let t = hb_to_wkl(vec![Some(Interval::new(Rat::new(1, 4), Rat::from_integer(2)))]);
        for s in strings_of_len(8).filter(|s| t.member(s)) {
            assert!(dyadic_cell(&s).1 <= Rat::new(1, 4) + Rat::new(1, 32), "{s:?}");
        }
        assert!(!extendible(&t, &[1], 8));
        // An open cover ending at 1 leaves the point 1 itself uncovered.
        let t = hb_to_wkl(vec![Some(Interval::new(Rat::new(1, 4), Rat::one()))]);
        let high: Vec<Bits> = strings_of_len(8).filter(|s| t.member(s) && s[0] == 1).collect();
        assert_eq!(high, vec![vec![1; 8]]);
    }

    #[test]
    fn cantor_maps_invert() {
        for n in 0..=6 {
            for s in strings_of_len(n) {
                assert_eq!(cantor_decode(cantor_left(&s), n), Some(s.clone()));
                assert!(cantor_decode(middle_gap(&s).lo + pow3_neg(n + 2), n + 1).is_none());
            }
        }
    }

    #[test]
    fn single_path_tree_leaves_only_the_origin() {
        let zeros = crate::transform::tree::tree_punctualize(crate::clock::Delayed::<[u8]>::instant("z", |s| {
            u64::from(s.iter().all(|&b| b == 0))
        }));
        let out = run_unbudgeted(&mut wkl_to_hb(&zeros), wkl_cover_horizon(8));
        let free = uncovered(out.iter().flatten(), Rat::zero(), Rat::one());
        assert!(!free.is_empty());
        for (lo, hi) in free {
            assert!(hi <= pow3_neg(8));
            assert_eq!(cantor_decode(lo, 8), Some(vec![0; 8]));
        }
        for t in 0..=512 {
            assert!(!covers(out[..t].iter().flatten(), Rat::zero(), Rat::one()));
        }
    }
}
