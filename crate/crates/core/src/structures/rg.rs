//! The random graph: a punctual presentation with extension witnesses, and a
//! graph coding `∀n ∃s ψ(n, s)` into where its first non-edges may sit.

use serde::{Deserialize, Serialize};

use super::Predicate;
use crate::clock::{FuelMeter, PunctualStream};
use crate::error::{Error, Result};
use crate::{par, FinSet, OutOfFuel};

/// Symmetric irreflexive adjacency on ℕ.
pub trait Graph: Send + Sync {
    fn adjacent(&self, u: u64, v: u64) -> Result<bool>;
}

/// Vertices `0` and `1` are isolated from each other. Vertex `z ≥ 2` with
/// `z = 2^ℓ + a`, `a < 2^ℓ`, is adjacent to the earlier `u` exactly when
/// `u < ℓ` and bit `u` of `a` is set. So `z` realizes the one-point extension
/// of `{0, …, ℓ−1}` coded by `a`, and every such extension is realized once:
/// this is the Fraïssé limit with requirements served in code order.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomGraph;

pub fn rg_build() -> RandomGraph {
    RandomGraph
}

/// Level and neighbourhood code of a requirement vertex `z ≥ 2`.
fn level(z: u64) -> (u32, u64) {
    let l = 63 - z.leading_zeros();
    (l, z - (1 << l))
}

impl Graph for RandomGraph {
    fn adjacent(&self, u: u64, v: u64) -> Result<bool> {
        let (lo, hi) = (u.min(v), u.max(v));
        if hi < 2 || lo == hi {
            return Ok(false);
        }
        let (l, a) = level(hi);
        Ok(lo < l as u64 && (a >> lo) & 1 == 1)
    }
}

impl RandomGraph {
    /// Extension witness: adjacent to all of `x`, to none of `y`.
    pub fn skolem(&self, x: &FinSet, y: &FinSet) -> Result<u64> {
        if !x.is_disjoint(y) {
            return Err(Error::PreconditionFailed("extension sets must be disjoint".into()));
        }
        let top = x.elements().chain(y.elements()).max().map_or(0, |m| m + 1);
        if top >= 63 {
            return Err(Error::Overflow);
        }
        Ok((1u64 << top.max(1)) + x.elements().map(|u| 1u64 << u).sum::<u64>())
    }
}

/// Role of a node of the coding graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Seed,
    /// Adjacent to every earlier node.
    Clique,
    /// Adjacent to no earlier node; its index bounds a witness for `phase`.
    Marker { phase: u64 },
    /// Serves extension requirement `req`: the one-point extension that
    /// vertex `req + 2` of [`RandomGraph`] realizes, over the first nodes.
    Fraisse { req: u64 },
}

/// One coding phase: clique nodes from `start`, the marker, then the
/// requirement segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLog {
    pub phase: u64,
    pub start: u64,
    pub marker: u64,
    pub segment: std::ops::Range<u64>,
}

/// Requirement nodes after each marker; phase `k` serves requirement `k`.
pub const SEGMENT_LEN: u64 = 1;

/// The coding graph `B`. Node 0 is a seed. Phase `k` starts at `t_{k−1}`
/// (`t_{−1} = 1`) and adds nodes adjacent to everything before them until
/// some `y ≤ v` witnesses `ψ(k, y)`; node `v` is then a marker adjacent to
/// nothing before it, followed by [`SEGMENT_LEN`] requirement nodes, and
/// `t_k = marker + 1 + SEGMENT_LEN`. A requirement node is adjacent to
/// exactly the earlier nodes its extension over `{0, …, ℓ−1}` forces.
#[derive(Clone)]
pub struct RgEncoder {
    psi: Predicate,
    roles: Vec<Role>,
    phases: Vec<PhaseLog>,
    phase: u64,
    phase_start: u64,
    /// Witness search for the current phase has covered `y < searched`.
    searched: u64,
    pending: u64,
    req: u64,
}

pub fn rg_encode(psi: Predicate) -> RgEncoder {
    RgEncoder { psi, roles: Vec::new(), phases: Vec::new(), phase: 0, phase_start: 1, searched: 0, pending: 0, req: 0 }
}

impl RgEncoder {
    /// Adds the next node, returning the witness queries spent.
    fn grow(&mut self) -> u64 {
        let v = self.roles.len() as u64;
        let mut work = 0;
        let role = if v == 0 {
            Role::Seed
        } else if self.pending > 0 {
            self.pending -= 1;
            self.req += 1;
            if self.pending == 0 {
                self.phase += 1;
                self.phase_start = v + 1;
                self.searched = 0;
            }
            Role::Fraisse { req: self.req - 1 }
        } else {
            let k = self.phase;
            let hit = (self.searched..=v).any(|y| {
                work += 1;
                (self.psi)(k, y)
            });
            self.searched = v + 1;
            if hit {
                self.pending = SEGMENT_LEN;
                self.phases.push(PhaseLog { phase: k, start: self.phase_start, marker: v, segment: v + 1..v + 1 + SEGMENT_LEN });
                Role::Marker { phase: k }
            } else {
                Role::Clique
            }
        };
        self.roles.push(role);
        work
    }

    /// Materializes nodes `0..n`.
    pub fn grow_to(&mut self, n: u64) -> &mut Self {
        while (self.roles.len() as u64) < n {
            self.grow();
        }
        self
    }

    pub fn len(&self) -> u64 {
        self.roles.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    /// Completed phases, with their segment bounds.
    pub fn phases(&self) -> &[PhaseLog] {
        &self.phases
    }

    fn adj(&self, lo: u64, hi: u64) -> bool {
        match self.roles[hi as usize] {
            Role::Seed | Role::Marker { .. } => false,
            Role::Clique => true,
            Role::Fraisse { req } => {
                let (l, a) = level(req + 2);
                lo < l as u64 && (a >> lo) & 1 == 1
            }
        }
    }

    fn neighbours_below(&self, v: u64) -> Vec<u64> {
        (0..v).filter(|&u| self.adj(u, v)).collect()
    }
}

/// Adjacency among materialized nodes; beyond them is out of horizon.
impl Graph for RgEncoder {
    fn adjacent(&self, u: u64, v: u64) -> Result<bool> {
        let (lo, hi) = (u.min(v), u.max(v));
        if hi >= self.len() {
            return Err(Error::HorizonExceeded(format!("node {hi} of a {}-node prefix", self.len())));
        }
        Ok(lo != hi && self.adj(lo, hi))
    }
}

/// Stage `v` adds node `v` and reveals its earlier neighbours.
impl PunctualStream for RgEncoder {
    type Item = Vec<u64>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Vec<u64>, OutOfFuel> {
        let v = self.len();
        let mut probe = self.clone();
        fuel.charge(probe.grow() + v + 1)?;
        *self = probe;
        Ok(self.neighbours_below(v))
    }

    fn stage(&self) -> u64 {
        self.len()
    }
}

/// Builder stream over any graph: stage `v` reveals `v`'s earlier neighbours.
pub struct GraphStream<G> {
    graph: G,
    v: u64,
}

impl<G: Graph> GraphStream<G> {
    pub fn new(graph: G) -> Self {
        GraphStream { graph, v: 0 }
    }
}

impl<G: Graph> PunctualStream for GraphStream<G> {
    type Item = Result<Vec<u64>>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Self::Item, OutOfFuel> {
        fuel.charge(self.v + 1)?;
        let v = self.v;
        self.v += 1;
        let mut out = Vec::new();
        for u in 0..v {
            match self.graph.adjacent(u, v) {
                Ok(true) => out.push(u),
                Ok(false) => {}
                Err(e) => return Ok(Err(e)),
            }
        }
        Ok(Ok(out))
    }

    fn stage(&self) -> u64 {
        self.v
    }
}

/// Nodes of [`RandomGraph`] fed to the isomorphism when decoding phase `k`
/// with `t = t_{k−1}`: `0` and the evens `2, …, 2t`. Even vertices of the
/// built graph miss `0`, so `0` is adjacent to none of the others.
pub fn decode_nodes(t: u64) -> Vec<u64> {
    (0..=t).map(|i| 2 * i).collect()
}

/// `f(k) = μy ≤ max g(D_k). ψ(k, y)` where `g` maps [`RandomGraph`] into the
/// coding graph isomorphically and `D_k` = [`decode_nodes`]`(t_{k−1})`.
///
/// Nodes of `B` in `[t_{k−1}, marker_k)` are adjacent to everything below,
/// so `t_{k−1} + 1` nodes with one of them adjacent to none of the rest
/// cannot all sit below `marker_k ≥ f(k)`.
pub fn rg_decode(psi: &dyn Fn(u64, u64) -> bool, g: &mut dyn FnMut(u64) -> Result<u64>, n: u64) -> Result<Vec<u64>> {
    let mut t = 1;
    let mut out = Vec::new();
    for k in 0..n {
        let mut bound = 0;
        for d in decode_nodes(t) {
            bound = bound.max(g(d)?);
        }
        let f = (0..=bound)
            .find(|&y| psi(k, y))
            .ok_or_else(|| Error::promise(format!("no witness for {k} up to {bound}")))?;
        out.push(f);
        t = t.max(f) + 1 + SEGMENT_LEN;
    }
    Ok(out)
}

/// The `t_{k−1}` sequence the decoder walks, from known least witnesses.
pub fn decode_starts(f: &[u64]) -> Vec<u64> {
    let mut t = 1;
    let mut out = Vec::with_capacity(f.len());
    for &w in f {
        out.push(t);
        t = t.max(w) + 1 + SEGMENT_LEN;
    }
    out
}

/// Embeds the induced subgraph of `a` on `domain` into `b` below `limit` by
/// backtracking, lowest images first. Any such finite partial isomorphism
/// between random graphs extends to a full one.
pub fn embed(a: &dyn Graph, domain: &[u64], b: &dyn Graph, limit: u64) -> Result<Option<Vec<u64>>> {
    let n = domain.len();
    let mut want = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..i {
            want[i][j] = a.adjacent(domain[i], domain[j])?;
        }
    }
    let mut img: Vec<u64> = Vec::with_capacity(n);
    let mut next = vec![0u64; n + 1];
    let mut steps = 0u64;
    while img.len() < n {
        let i = img.len();
        let mut found = None;
        let mut c = next[i];
        while c < limit {
            steps += 1;
            if steps > 50_000_000 {
                return Ok(None);
            }
            if !img.contains(&c) {
                let mut ok = true;
                for (j, &w) in img.iter().enumerate() {
                    if b.adjacent(c, w)? != want[i][j] {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    found = Some(c);
                    break;
                }
            }
            c += 1;
        }
        match found {
            Some(c) => {
                next[i] = c + 1;
                img.push(c);
                next[i + 1] = 0;
            }
            None => {
                if img.pop().is_none() {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(img))
}

/// Every disjoint nonempty `(X, Y)` over `0..prefix` with `|X ∪ Y| ≤ size`
/// has a witness among the first `search` nodes. Returns a failing pair.
pub fn audit_extension(g: &dyn Graph, prefix: u64, size: usize, search: u64) -> Result<Option<(Vec<u64>, Vec<u64>)>> {
    let demands = extension_demands(prefix, size);
    let found = par::map(&demands, |(x, y)| -> Result<bool> {
        for z in 0..search {
            if x.contains(&z) || y.contains(&z) {
                continue;
            }
            let mut ok = true;
            for &u in x {
                ok &= g.adjacent(z, u)?;
            }
            for &u in y {
                ok &= !g.adjacent(z, u)?;
            }
            if ok {
                return Ok(true);
            }
        }
        Ok(false)
    });
    for (d, f) in demands.into_iter().zip(found) {
        if !f? {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Disjoint nonempty `(X, Y)` over `0..prefix` with `|X ∪ Y| ≤ size`.
pub fn extension_demands(prefix: u64, size: usize) -> Vec<(Vec<u64>, Vec<u64>)> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<u64>> = (0..prefix).map(|u| vec![u]).collect();
    while let Some(s) = stack.pop() {
        if s.len() >= 2 {
            for mask in 1..(1u32 << s.len()) - 1 {
                let (x, y): (Vec<u64>, Vec<u64>) =
                    s.iter().enumerate().fold((vec![], vec![]), |(mut x, mut y), (i, &u)| {
                        if mask >> i & 1 == 1 { x.push(u) } else { y.push(u) }
                        (x, y)
                    });
                out.push((x, y));
            }
        }
        if s.len() < size {
            for u in s[s.len() - 1] + 1..prefix {
                let mut t = s.clone();
                t.push(u);
                stack.push(t);
            }
        }
    }
    out
}
