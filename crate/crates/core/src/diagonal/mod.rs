//! Diagonalization constructions over Baire space and `[0, 1]`: dense open
//! sets avoiding every entry of a fixture table, their bounded variant, a
//! generic-point solver with the local-delay property, and a continuous
//! function whose every modulus dominates a given function.
//!
//! Open sets are enumerative: one basic ball `B_σ` (or a skip) per stage.

pub mod baire;
pub mod bct;
pub mod uc;

use serde::{Deserialize, Serialize};

use crate::par;

pub use baire::{baire_adversary, baire_bounded_adversary, run_bounded, run_pairs};
pub use bct::{bct_solve, dominate_escape, BctSolution, DelaySchedule, Escape};
pub use uc::{modulus_check, uc_adversary, BreakpointRow, UcAdversary};

/// Finite string over ω naming the basic ball `B_σ = {f : σ ⪯ f}`.
pub type Ball = Vec<u64>;

/// Either string is a prefix of the other.
pub fn comparable(a: &[u64], b: &[u64]) -> bool {
    let n = a.len().min(b.len());
    a[..n] == b[..n]
}

/// The stage-indexed listing of an open set: ball or skip at every stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenSetLog {
    pub balls: Vec<Option<Ball>>,
}

impl OpenSetLog {
    pub fn stages(&self) -> usize {
        self.balls.len()
    }

    /// First stage listing a ball that meets `B_σ`, i.e. one comparable with `σ`.
    pub fn first_meeting(&self, sigma: &[u64]) -> Option<usize> {
        self.balls.iter().position(|b| b.as_deref().is_some_and(|b| comparable(b, sigma)))
    }

    /// First stage listing a ball containing the point `f`.
    pub fn first_containing(&self, f: impl Fn(usize) -> u64) -> Option<usize> {
        self.balls
            .iter()
            .position(|b| b.as_deref().is_some_and(|b| b.iter().enumerate().all(|(i, &v)| f(i) == v)))
    }

    /// First stage listing a ball `B_τ` that contains `B_σ` (so `σ` itself is inside).
    pub fn first_covering(&self, sigma: &[u64]) -> Option<usize> {
        self.balls.iter().position(|b| b.as_deref().is_some_and(|b| b.len() <= sigma.len() && b == &sigma[..b.len()]))
    }
}

/// All strings of length `len` over `{0, …, alphabet − 1}`, lexicographically.
pub fn strings_over(alphabet: u64, len: usize) -> Vec<Ball> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..alphabet).map(move |v| {
                    let mut t = s.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Density certificate of one open set: for each length `L ≤ max_len`, the
/// latest stage by which every string of length `L` over the alphabet meets
/// a listed ball. `Err(σ)` names a string that meets nothing in the log.
pub fn density_profile(log: &OpenSetLog, alphabet: u64, max_len: usize) -> Result<Vec<usize>, Ball> {
    let mut out = Vec::with_capacity(max_len + 1);
    for len in 0..=max_len {
        let probes = strings_over(alphabet, len);
        let stages = par::map(&probes, |s| log.first_meeting(s).ok_or_else(|| s.clone()));
        let mut worst = 0;
        for st in stages {
            worst = worst.max(st?);
        }
        out.push(worst);
    }
    Ok(out)
}

/// Ball ladders dovetailed one ball per stage: emission `c` goes to ladder
/// `a` where `(a, b) = unpair(c)`, so ladder `a` emits its `b`-th ball by
/// emission `pair(a, b)`. Slots of ladders not yet created go round-robin.
#[derive(Debug, Clone, Default)]
pub(crate) struct LadderSet {
    ladders: Vec<Ladder>,
    emitted: u64,
}

#[derive(Debug, Clone)]
pub(crate) enum Ladder {
    /// `B_{prefix⌢j}` for `j = 0, 1, …`, skipping `skip`.
    Siblings { prefix: Ball, skip: Option<u64>, next: u64 },
    /// `B_{τ⌢j}` for every `τ` with `τ(i) < radices[i]` and every `j ≥ from`;
    /// counter `c` names `τ_{c mod N}` and `j = from + c / N`.
    Bounded { radices: Vec<u64>, from: u64, next: u64 },
}

impl Ladder {
    fn next_ball(&mut self) -> Ball {
        match self {
            Ladder::Siblings { prefix, skip, next } => {
                if Some(*next) == *skip {
                    *next += 1;
                }
                let mut b = prefix.clone();
                b.push(*next);
                *next += 1;
                b
            }
            Ladder::Bounded { radices, from, next } => {
                let count: u64 = radices.iter().fold(1u64, |a, &r| a.saturating_mul(r));
                let (mut idx, j) = (*next % count, *from + *next / count);
                let mut b = vec![0; radices.len() + 1];
                for (slot, &r) in b.iter_mut().zip(radices.iter()).rev() {
                    *slot = idx % r;
                    idx /= r;
                }
                b[radices.len()] = j;
                *next += 1;
                b
            }
        }
    }

    fn len_hint(&self) -> u64 {
        match self {
            Ladder::Siblings { prefix, .. } => prefix.len() as u64 + 1,
            Ladder::Bounded { radices, .. } => radices.len() as u64 + 1,
        }
    }
}

impl LadderSet {
    pub(crate) fn push(&mut self, l: Ladder) {
        self.ladders.push(l);
    }

    pub(crate) fn clear(&mut self) {
        self.ladders.clear();
    }

    /// Next ball and the work it costs, or `None` when idle.
    pub(crate) fn emit(&mut self) -> Option<(Ball, u64)> {
        if self.ladders.is_empty() {
            return None;
        }
        let c = self.emitted;
        self.emitted += 1;
        let (a, _) = crate::finset::unpair(c);
        let len = self.ladders.len() as u64;
        let idx = if a < len { a } else { c % len } as usize;
        let l = &mut self.ladders[idx];
        // the unpairing is charged as one unit on top of the ball
        Some((l.next_ball(), l.len_hint() + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_ladder_skips_the_excluded_value() {
        let mut l = Ladder::Siblings { prefix: vec![4], skip: Some(1), next: 0 };
        let got: Vec<Ball> = (0..3).map(|_| l.next_ball()).collect();
        assert_eq!(got, vec![vec![4, 0], vec![4, 2], vec![4, 3]]);
    }

    #[test]
    fn bounded_ladder_covers_every_prefix_before_raising_the_last_value() {
        let mut l = Ladder::Bounded { radices: vec![2, 3], from: 5, next: 0 };
        let got: Vec<Ball> = (0..7).map(|_| l.next_ball()).collect();
        assert_eq!(got[0], vec![0, 0, 5]);
        assert_eq!(got[5], vec![1, 2, 5]);
        assert_eq!(got[6], vec![0, 0, 6]);
        let mut firsts: Vec<Ball> = got[..6].iter().map(|b| b[..2].to_vec()).collect();
        firsts.dedup();
        assert_eq!(firsts.len(), 6);
    }

    #[test]
    fn dovetailing_serves_every_ladder() {
        let mut s = LadderSet::default();
        assert!(s.emit().is_none());
        s.push(Ladder::Siblings { prefix: vec![0], skip: None, next: 0 });
        s.push(Ladder::Siblings { prefix: vec![1], skip: None, next: 0 });
        // unpair(0..6) = (0,0) (1,0) (0,1) (2,0) (1,1) (0,2); ladder 2 is missing
        let got: Vec<Ball> = (0..6).map(|_| s.emit().unwrap().0).collect();
        assert_eq!(got, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![1, 2], vec![0, 2]]);
    }

    #[test]
    fn log_queries() {
        let log = OpenSetLog { balls: vec![None, Some(vec![1, 2]), Some(vec![0])] };
        assert_eq!(log.first_meeting(&[1]), Some(1));
        assert_eq!(log.first_meeting(&[0, 7]), Some(2));
        assert_eq!(log.first_covering(&[1]), None);
        assert_eq!(log.first_containing(|i| [1, 2, 3][i.min(2)]), Some(1));
        assert_eq!(strings_over(3, 2).len(), 9);
    }
}
