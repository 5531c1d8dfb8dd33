//! Matchings saturating the left side of a bipartite graph.
//!
//! [`hall_finite`] handles a finite left side by augmenting paths and
//! returns a violating set when Hall's condition fails. [`hall_extended`]
//! matches an infinite, honestly presented left side online under the
//! extended condition with witness `h`: stage `s` matches `a_s` by solving
//! the finite problem on the left vertices within distance `2h(s+1)` of it
//! in the residual graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::clock::{FuelMeter, PunctualStream};
use crate::error::{Error, Result};
use crate::OutOfFuel;

/// Honest bipartite graph. Left and right vertices live in separate
/// namespaces, so the sides are disjoint by construction.
pub trait Bipartite: Send + Sync {
    /// `a_i`, the left vertex revealed at stage `i`.
    fn left(&self, i: u64) -> u64;
    /// Right neighbours of a left vertex, in increasing order.
    fn left_nbrs(&self, a: u64) -> Vec<u64>;
    /// Left neighbours of a right vertex, in increasing order.
    fn right_nbrs(&self, b: u64) -> Vec<u64>;
}

/// Injective `a ↦ f(a) ∈ N(a)` on all of `left`, as `(a, f(a))` pairs in the
/// order of `left`, or the set of left vertices reachable by alternating
/// paths from an unmatched one, whose neighbourhood is too small.
pub fn hall_finite(left: &[u64], nbrs: impl Fn(u64) -> Vec<u64>) -> Result<Vec<(u64, u64)>> {
    hall_finite_counted(left, nbrs).0
}

/// [`hall_finite`] with the number of adjacency probes it made.
pub fn hall_finite_counted(left: &[u64], nbrs: impl Fn(u64) -> Vec<u64>) -> (Result<Vec<(u64, u64)>>, u64) {
    let adj: Vec<Vec<u64>> = left.iter().map(|&a| nbrs(a)).collect();
    let mut work = adj.iter().map(|l| l.len() as u64 + 1).sum::<u64>();
    let mut owner: BTreeMap<u64, usize> = BTreeMap::new();
    let mut mate: Vec<Option<u64>> = vec![None; left.len()];
    for i in 0..left.len() {
        let mut seen = BTreeSet::new();
        if !augment(i, &adj, &mut owner, &mut mate, &mut seen, &mut work) {
            // the alternating tree from i is a Hall violator
            let mut x: Vec<u64> = seen.iter().map(|b| left[owner[b]]).collect();
            x.push(left[i]);
            x.sort_unstable();
            x.dedup();
            return (Err(Error::HallViolation(x)), work);
        }
    }
    let pairs = left.iter().zip(&mate).map(|(&a, m)| (a, m.expect("every left vertex was matched"))).collect();
    (Ok(pairs), work)
}

fn augment(
    i: usize,
    adj: &[Vec<u64>],
    owner: &mut BTreeMap<u64, usize>,
    mate: &mut [Option<u64>],
    seen: &mut BTreeSet<u64>,
    work: &mut u64,
) -> bool {
    for &b in &adj[i] {
        *work += 1;
        if !seen.insert(b) {
            continue;
        }
        let free = match owner.get(&b) {
            None => true,
            Some(&j) => augment(j, adj, owner, mate, seen, work),
        };
        if free {
            owner.insert(b, i);
            mate[i] = Some(b);
            return true;
        }
    }
    false
}

/// Witness `h` of the extended Hall condition; `h(0) = 0`.
pub type Witness = dyn Fn(u64) -> u64 + Send + Sync;

#[derive(Clone)]
pub struct HallExtendedStream<'g> {
    g: &'g dyn Bipartite,
    h: &'g Witness,
    used_left: BTreeSet<u64>,
    used_right: BTreeSet<u64>,
    s: u64,
    failed: Option<Error>,
}

pub fn hall_extended<'g>(g: &'g dyn Bipartite, h: &'g Witness) -> Result<HallExtendedStream<'g>> {
    if h(0) != 0 {
        return Err(Error::PreconditionFailed(format!("witness has h(0) = {}", h(0))));
    }
    Ok(HallExtendedStream { g, h, used_left: BTreeSet::new(), used_right: BTreeSet::new(), s: 0, failed: None })
}

impl HallExtendedStream<'_> {
    /// Left vertices of the residual graph within `2·radius` edges of `a`.
    fn ball(&self, a: u64, radius: u64, fuel: &mut FuelMeter) -> std::result::Result<Vec<u64>, OutOfFuel> {
        let mut dist = BTreeMap::from([(a, 0u64)]);
        let mut queue = VecDeque::from([a]);
        while let Some(x) = queue.pop_front() {
            let d = dist[&x];
            if d == radius {
                continue;
            }
            for b in self.g.left_nbrs(x) {
                fuel.charge(1)?;
                if self.used_right.contains(&b) {
                    continue;
                }
                for y in self.g.right_nbrs(b) {
                    fuel.charge(1)?;
                    if !self.used_left.contains(&y) && !dist.contains_key(&y) {
                        dist.insert(y, d + 1);
                        queue.push_back(y);
                    }
                }
            }
        }
        let mut ball: Vec<u64> = dist.into_keys().filter(|&y| y != a).collect();
        ball.insert(0, a);
        Ok(ball)
    }

    fn step(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Result<(u64, u64)>, OutOfFuel> {
        let a = self.g.left(self.s);
        if self.used_left.contains(&a) {
            return Ok(Err(Error::InvalidInstance(format!("left vertex {a} revealed twice"))));
        }
        let radius = (self.h)(self.s + 1);
        let ball = self.ball(a, radius, fuel)?;
        let residual = |x: u64| self.g.left_nbrs(x).into_iter().filter(|b| !self.used_right.contains(b)).collect();
        let (matched, work) = hall_finite_counted(&ball, residual);
        fuel.charge(work)?;
        match matched {
            Ok(pairs) => {
                let b = pairs[0].1;
                self.used_left.insert(a);
                self.used_right.insert(b);
                Ok(Ok((a, b)))
            }
            Err(e) => Ok(Err(Error::promise(format!("finite Hall fails in the ball around {a}: {e}")))),
        }
    }
}

impl PunctualStream for HallExtendedStream<'_> {
    type Item = Result<(u64, u64)>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Self::Item, OutOfFuel> {
        fuel.charge(1)?;
        if let Some(e) = &self.failed {
            return Ok(Err(e.clone()));
        }
        let out = self.step(fuel)?;
        match &out {
            Ok(_) => self.s += 1,
            Err(e) => self.failed = Some(e.clone()),
        }
        Ok(out)
    }

    fn stage(&self) -> u64 {
        self.s + self.failed.is_some() as u64
    }
}

/// Left vertex `a_i = i` joined to right vertices `k·i .. k·i + k + o`,
/// reordered by `perm` (a bijection on ℕ). With `o = 0` the neighbourhoods
/// are disjoint; each unit of overlap shares `o` vertices with the next row.
pub struct Ladder {
    pub width: u64,
    pub overlap: u64,
    pub perm: Box<dyn Fn(u64) -> u64 + Send + Sync>,
}

impl Ladder {
    pub fn new(width: u64, overlap: u64) -> Self {
        Ladder { width, overlap, perm: Box::new(|i| i) }
    }

    /// Reverses consecutive blocks of `k` left vertices.
    pub fn block_reversed(mut self, k: u64) -> Self {
        self.perm = Box::new(move |i| i / k * k + (k - 1 - i % k));
        self
    }
}

impl Bipartite for Ladder {
    fn left(&self, i: u64) -> u64 {
        (self.perm)(i)
    }

    fn left_nbrs(&self, a: u64) -> Vec<u64> {
        (self.width * a..self.width * a + self.width + self.overlap).collect()
    }

    fn right_nbrs(&self, b: u64) -> Vec<u64> {
        let hi = b / self.width;
        let lo = (b + 1).saturating_sub(self.width + self.overlap).div_ceil(self.width);
        (lo..=hi).collect()
    }
}

/// The matching is injective and uses edges only.
pub fn audit_matching(g: &dyn Bipartite, pairs: &[(u64, u64)]) -> bool {
    let mut used = BTreeSet::new();
    pairs.iter().all(|&(a, b)| used.insert(b) && g.left_nbrs(a).binary_search(&b).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::run_unbudgeted;

    /// Every subset of a small left side satisfies Hall's condition.
    fn hall_holds(left: &[u64], nbrs: &dyn Fn(u64) -> Vec<u64>) -> bool {
        (0u32..1 << left.len()).all(|mask| {
            let x: Vec<u64> = left.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a).collect();
            let n: BTreeSet<u64> = x.iter().flat_map(|&a| nbrs(a)).collect();
            n.len() >= x.len()
        })
    }

    #[test]
    fn single_edge() {
        assert_eq!(hall_finite(&[7], |_| vec![3]).unwrap(), vec![(7, 3)]);
    }

    #[test]
    fn complete_two_by_two_has_a_perfect_matching() {
        let m = hall_finite(&[0, 1], |_| vec![0, 1]).unwrap();
        assert_ne!(m[0].1, m[1].1);
        // brute force: both perfect matchings of K_{2,2}
        let all = [[(0, 0), (1, 1)], [(0, 1), (1, 0)]];
        assert!(all.iter().any(|p| p[..] == m[..]));
    }

    #[test]
    fn shared_single_neighbour_is_a_violation() {
        assert_eq!(hall_finite(&[4, 9], |_| vec![0]), Err(Error::HallViolation(vec![4, 9])));
    }

    #[test]
    fn violation_witness_is_genuine() {
        let nbrs = |a: u64| match a {
            0 => vec![0, 1],
            1 | 2 => vec![2],
            _ => vec![0, 3],
        };
        let left = [0, 1, 2, 3];
        assert!(!hall_holds(&left, &nbrs));
        let Err(Error::HallViolation(x)) = hall_finite(&left, nbrs) else { panic!("expected a violation") };
        let n: BTreeSet<u64> = x.iter().flat_map(|&a| nbrs(a)).collect();
        assert!(n.len() < x.len());
    }

    #[test]
    fn ladder_neighbourhoods_are_symmetric() {
        let g = Ladder::new(2, 1);
        for a in 0..20 {
            for b in g.left_nbrs(a) {
                assert!(g.right_nbrs(b).contains(&a));
            }
        }
        for b in 0..40 {
            for a in g.right_nbrs(b) {
                assert!(g.left_nbrs(a).contains(&b));
            }
        }
    }

    #[test]
    fn disjoint_ladder_matches_identically() {
        let g = Ladder::new(2, 0);
        let h = |n: u64| n;
        let mut s = hall_extended(&g, &h).unwrap();
        let pairs: Vec<(u64, u64)> = run_unbudgeted(&mut s, 100).into_iter().map(|p| p.unwrap()).collect();
        assert!(pairs.iter().all(|&(a, b)| b == 2 * a));
    }

    #[test]
    fn overlapping_ladder_in_permuted_order_is_matched() {
        let g = Ladder::new(2, 1).block_reversed(7);
        let h = |n: u64| n.saturating_sub(1);
        let mut s = hall_extended(&g, &h).unwrap();
        let pairs: Vec<(u64, u64)> = run_unbudgeted(&mut s, 100).into_iter().map(|p| p.unwrap()).collect();
        assert!(audit_matching(&g, &pairs));
    }

    #[test]
    fn nonzero_witness_at_zero_is_refused() {
        let g = Ladder::new(2, 0);
        let h = |n: u64| n + 1;
        assert!(matches!(hall_extended(&g, &h), Err(Error::PreconditionFailed(_))));
    }
}
