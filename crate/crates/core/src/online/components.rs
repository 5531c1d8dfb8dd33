//! Connected components from a finite list of representatives.
//!
//! Among the representatives, pick the first totally disconnected subset in
//! an enumeration that lists supersets before subsets; every vertex then
//! reaches exactly one member `x` of it, and `f(v, u) = 1` exactly when `v`
//! and `u` reach the same `x`. Path existence is unbounded in general, so
//! each search is confined to vertices below a supplied reach bound.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::clock::{FuelMeter, PunctualStream};
use crate::error::{Error, Result};
use crate::finset::pair;
use crate::OutOfFuel;

/// Graph on ℕ given by a decidable adjacency relation.
#[derive(Clone)]
pub struct PredicateGraph {
    adj: Arc<dyn Fn(u64, u64) -> bool + Send + Sync>,
}

impl PredicateGraph {
    pub fn new(adj: impl Fn(u64, u64) -> bool + Send + Sync + 'static) -> Self {
        PredicateGraph { adj: Arc::new(adj) }
    }

    pub fn adjacent(&self, u: u64, v: u64) -> bool {
        u != v && ((self.adj)(u, v) || (self.adj)(v, u))
    }

    /// Path from `from` to `to` through vertices `≤ bound`, with the probe count.
    pub fn path_within(&self, from: u64, to: u64, bound: u64) -> (bool, u64) {
        if from == to {
            return (true, 1);
        }
        if from > bound || to > bound {
            return (false, 1);
        }
        let mut seen = vec![false; bound as usize + 1];
        let mut queue = VecDeque::from([from]);
        seen[from as usize] = true;
        let mut work = 0;
        while let Some(x) = queue.pop_front() {
            for y in 0..=bound {
                work += 1;
                if !seen[y as usize] && self.adjacent(x, y) {
                    if y == to {
                        return (true, work);
                    }
                    seen[y as usize] = true;
                    queue.push_back(y);
                }
            }
        }
        (false, work.max(1))
    }
}

/// How far path searches may look.
#[derive(Clone)]
pub enum ReachBound {
    /// Searches from `v` use vertices `≤ bound(v)` (and the endpoints).
    Explicit(Arc<dyn Fn(u64) -> u64 + Send + Sync>),
    /// Doubling search up to `cap`, for runs outside the step budget.
    Doubling { cap: u64 },
}

impl ReachBound {
    pub fn explicit(f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        ReachBound::Explicit(Arc::new(f))
    }
}

/// The decision function `f`, with the chosen totally disconnected set.
#[derive(Clone)]
pub struct ComponentMap {
    graph: PredicateGraph,
    reach: ReachBound,
    chosen: Vec<u64>,
}

fn connected(g: &PredicateGraph, reach: &ReachBound, v: u64, x: u64) -> (bool, u64) {
    match reach {
        ReachBound::Explicit(b) => g.path_within(v, x, b(v).max(b(x)).max(v).max(x)),
        ReachBound::Doubling { cap } => {
            let mut bound = v.max(x).max(1);
            let mut work = 0;
            loop {
                let (hit, w) = g.path_within(v, x, bound);
                work += w;
                if hit || bound >= *cap {
                    return (hit, work);
                }
                bound = bound.saturating_mul(2).min(*cap);
            }
        }
    }
}

/// Picks the totally disconnected subset of `reps` and returns `f`.
///
/// Subsets are tried by decreasing size, and by increasing bitmask within a size.
pub fn connected_components(graph: PredicateGraph, reps: &[u64], reach: ReachBound) -> Result<ComponentMap> {
    if reps.is_empty() || reps.len() > 20 {
        return Err(Error::PreconditionFailed(format!("need 1 to 20 representatives, got {}", reps.len())));
    }
    let k = reps.len();
    let mut linked = vec![vec![false; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let hit = connected(&graph, &reach, reps[i], reps[j]).0;
            linked[i][j] = hit;
            linked[j][i] = hit;
        }
    }
    let mut masks: Vec<u32> = (1u32..1 << k).collect();
    masks.sort_by_key(|&m| (std::cmp::Reverse(m.count_ones()), m));
    let chosen = masks
        .into_iter()
        .find(|&m| (0..k).all(|i| m >> i & 1 == 0 || (i + 1..k).all(|j| m >> j & 1 == 0 || !linked[i][j])))
        .map(|m| (0..k).filter(|&i| m >> i & 1 == 1).map(|i| reps[i]).collect())
        .expect("singletons are totally disconnected");
    Ok(ComponentMap { graph, reach, chosen })
}

impl ComponentMap {
    /// The totally disconnected subset of the representatives.
    pub fn chosen(&self) -> &[u64] {
        &self.chosen
    }

    /// The member of the chosen set that `v` reaches, with the probe count.
    pub fn rep_of_counted(&self, v: u64) -> (Result<u64>, u64) {
        let mut work = 0;
        for &x in &self.chosen {
            let (hit, w) = connected(&self.graph, &self.reach, v, x);
            work += w;
            if hit {
                return (Ok(x), work);
            }
        }
        (Err(Error::promise(format!("vertex {v} reaches no representative within its bound"))), work)
    }

    pub fn rep_of(&self, v: u64) -> Result<u64> {
        self.rep_of_counted(v).0
    }

    /// `f(v, u)`.
    pub fn same(&self, v: u64, u: u64) -> Result<bool> {
        Ok(self.rep_of(v)? == self.rep_of(u)?)
    }

    /// Stream of `rep_of(t)` for `t = 0, 1, …`.
    pub fn stream(&self) -> ComponentStream {
        ComponentStream { map: self.clone(), t: 0 }
    }
}

#[derive(Clone)]
pub struct ComponentStream {
    map: ComponentMap,
    t: u64,
}

impl PunctualStream for ComponentStream {
    type Item = Result<u64>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Result<u64>, OutOfFuel> {
        let (r, work) = self.map.rep_of_counted(self.t);
        fuel.charge(work)?;
        self.t += 1;
        Ok(r)
    }

    fn stage(&self) -> u64 {
        self.t
    }
}

/// Graph coding a set `{n : g(n) = 1}` given with the stage `delay(n)` at
/// which its membership is witnessed: vertices `a = 0`, `b = 1` and
/// `x_{n,s} = 2 + pair(n, s)`, with `x_{n,s} ~ x_{m,t}` iff `n = m`,
/// `x_{n,s} ~ a` iff `g(n) = 1` and `s = delay(n)`, `x_{n,s} ~ b` iff
/// `g(n) = 0` and `s = delay(n)`.
#[derive(Debug, Clone)]
pub struct PlantedCoding {
    pub truth: Vec<bool>,
    pub delay: Vec<u64>,
}

impl PlantedCoding {
    pub const A: u64 = 0;
    pub const B: u64 = 1;

    pub fn x(n: u64, s: u64) -> u64 {
        2 + pair(n, s)
    }

    pub fn graph(&self) -> PredicateGraph {
        let (truth, delay) = (self.truth.clone(), self.delay.clone());
        PredicateGraph::new(move |u, v| {
            let node = |w: u64| (w >= 2).then(|| crate::finset::unpair(w - 2));
            match (node(u), node(v)) {
                (Some((n, _)), Some((m, _))) => n == m,
                (Some((n, s)), None) | (None, Some((n, s))) => {
                    let other = if node(u).is_some() { v } else { u };
                    let n = n as usize;
                    n < truth.len() && s == delay[n] && (other == Self::A) == truth[n]
                }
                (None, None) => false,
            }
        })
    }

    /// A path from `x_{n,t}` to its pole stays below `x_{n, max(t, delay(n))}`.
    pub fn reach_bound(&self) -> ReachBound {
        let delay = self.delay.clone();
        ReachBound::explicit(move |v| {
            if v < 2 {
                return v;
            }
            let (n, t) = crate::finset::unpair(v - 2);
            let d = delay.get(n as usize).copied().unwrap_or(0);
            Self::x(n, t.max(d))
        })
    }

    /// `g(n)`, read back from `f(x_{n,n}, a)`.
    pub fn decode(map: &ComponentMap, n: u64) -> Result<bool> {
        map.same(Self::x(n, n), Self::A)
    }
}

/// `f` is symmetric and transitive on `0..n`.
pub fn audit_equivalence(map: &ComponentMap, n: u64) -> Result<bool> {
    let reps: Vec<u64> = (0..n).map(|v| map.rep_of(v)).collect::<Result<_>>()?;
    let f = |v: usize, u: usize| reps[v] == reps[u];
    let n = n as usize;
    Ok((0..n).all(|a| (0..n).all(|b| f(a, b) == f(b, a) && (0..n).all(|c| !(f(a, b) && f(b, c)) || f(a, c)))))
}
