//! Online `(2n − 1)`-colouring of honest graphs whose finite subgraphs are
//! `n`-colourable.
//!
//! The coloured set `X` grows in batches. Its boundary `B` (coloured vertices
//! with an uncoloured neighbour) always uses only the low colours
//! `1..n−1` or only the high colours `n+1..2n−1`. The next uncoloured `v`
//! brings in the batch `H` of uncoloured vertices within distance two of `X`
//! plus `v`; `H` is `n`-coloured from the palette on the other side of the
//! middle colour `n`, with `v` off the middle. Vertices coloured `n` that
//! still touch the outside of `X ∪ H` are dropped from the batch, so the new
//! boundary again avoids the middle colour and lies on one side.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use crate::clock::{FuelMeter, PunctualStream};
use crate::error::{Error, Result};
use crate::OutOfFuel;

use super::HonestGraph;

/// Finite-subgraph `n`-colouring oracle.
pub trait FiniteColoring: Send + Sync {
    /// A colouring `0..n` of the graph on `0..size` with the given edges,
    /// together with the work it took.
    fn color(&self, size: usize, edges: &[(usize, usize)], n: u32) -> (Option<Vec<u32>>, u64);
}

/// Exhaustive backtracking, memoized per subgraph.
#[derive(Debug, Default)]
pub struct Backtracking {
    memo: Mutex<HashMap<(u32, usize, Vec<(usize, usize)>), (Option<Vec<u32>>, u64)>>,
}

impl Backtracking {
    pub fn new() -> Self {
        Backtracking::default()
    }
}

impl FiniteColoring for Backtracking {
    fn color(&self, size: usize, edges: &[(usize, usize)], n: u32) -> (Option<Vec<u32>>, u64) {
        let mut key_edges: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        key_edges.sort_unstable();
        key_edges.dedup();
        let key = (n, size, key_edges);
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            // a table lookup costs one unit per vertex
            return (hit.0.clone(), size as u64 + 1);
        }
        let mut adj = vec![Vec::new(); size];
        for &(a, b) in &key.2 {
            adj[a].push(b);
            adj[b].push(a);
        }
        // most constrained first: highest degree, ties by index
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(adj[v].len()), v));
        let mut colors = vec![u32::MAX; size];
        let mut work = 0u64;
        let found = backtrack(&order, 0, &adj, n, &mut colors, &mut work);
        let out = (found.then_some(colors), work + 1);
        self.memo.lock().expect("memo lock").insert(key, out.clone());
        out
    }
}

fn backtrack(order: &[usize], i: usize, adj: &[Vec<usize>], n: u32, colors: &mut [u32], work: &mut u64) -> bool {
    let Some(&v) = order.get(i) else { return true };
    for c in 0..n {
        *work += 1;
        if adj[v].iter().all(|&u| colors[u] != c) {
            colors[v] = c;
            if backtrack(order, i + 1, adj, n, colors, work) {
                return true;
            }
        }
    }
    colors[v] = u32::MAX;
    false
}

/// Colours at or below `n − 1` are low, above `n` high; `n` itself is the middle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Low,
    High,
}

#[derive(Clone)]
pub struct SchmerlStream<'g> {
    g: &'g dyn HonestGraph,
    oracle: Arc<dyn FiniteColoring>,
    n: u32,
    colors: BTreeMap<u64, u32>,
    boundary: BTreeSet<u64>,
    side: Side,
    s: u64,
    failed: Option<Error>,
}

/// Requires `n ≥ 2`; with `n = 1` the graph is edgeless and needs no algorithm.
pub fn schmerl_color(g: &dyn HonestGraph, n: u32, oracle: Arc<dyn FiniteColoring>) -> Result<SchmerlStream<'_>> {
    if n < 2 {
        return Err(Error::PreconditionFailed(format!("Schmerl colouring needs n ≥ 2, got {n}")));
    }
    Ok(SchmerlStream {
        g,
        oracle,
        n,
        colors: BTreeMap::new(),
        boundary: BTreeSet::new(),
        side: Side::Low,
        s: 0,
        failed: None,
    })
}

impl SchmerlStream<'_> {
    pub fn colors(&self) -> &BTreeMap<u64, u32> {
        &self.colors
    }

    pub fn boundary(&self) -> &BTreeSet<u64> {
        &self.boundary
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Colour classes available to a batch after a boundary on `side`,
    /// ordered with the middle colour last.
    fn palette(&self, side: Side) -> Vec<u32> {
        let n = self.n;
        match side {
            Side::Low => (n + 1..2 * n).chain([n]).collect(),
            Side::High => (1..n).chain([n]).collect(),
        }
    }

    /// The boundary colours lie on the recorded side.
    pub fn boundary_invariant(&self) -> bool {
        let n = self.n;
        self.boundary.iter().all(|v| {
            let c = self.colors[v];
            match self.side {
                Side::Low => (1..n).contains(&c),
                Side::High => (n + 1..2 * n).contains(&c),
            }
        })
    }

    fn outside(&self, v: u64, extra: &BTreeSet<u64>) -> bool {
        !self.colors.contains_key(&v) && !extra.contains(&v)
    }

    fn extend(&mut self, v: u64, fuel: &mut FuelMeter) -> std::result::Result<Result<Vec<(u64, u32)>>, OutOfFuel> {
        if v == 0 {
            fuel.charge(2)?;
            self.colors.insert(0, 1);
            if self.g.nbhd(0).len() > 1 {
                self.boundary.insert(0);
            }
            return Ok(Ok(vec![(0, 1)]));
        }
        // H: uncoloured vertices within distance two of X, reached through the boundary
        let mut batch: BTreeSet<u64> = BTreeSet::from([v]);
        for &b in &self.boundary {
            for w in self.g.nbhd(b) {
                fuel.charge(1)?;
                if self.colors.contains_key(&w) {
                    continue;
                }
                for u in self.g.nbhd(w) {
                    fuel.charge(1)?;
                    if !self.colors.contains_key(&u) {
                        batch.insert(u);
                    }
                }
            }
        }
        let members: Vec<u64> = batch.iter().copied().collect();
        let index: HashMap<u64, usize> = members.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let mut edges = Vec::new();
        let mut nbhds = Vec::with_capacity(members.len());
        for &u in &members {
            let nb = self.g.nbhd(u);
            fuel.charge(nb.len() as u64)?;
            edges.extend(nb.iter().filter_map(|w| index.get(w)).filter(|&&j| j > index[&u]).map(|&j| (index[&u], j)));
            nbhds.push(nb);
        }
        let (classes, work) = self.oracle.color(members.len(), &edges, self.n);
        fuel.charge(work)?;
        let Some(classes) = classes else {
            return Ok(Err(Error::promise(format!("batch of {} vertices around {v} is not {}-colourable", members.len(), self.n))));
        };
        let palette = self.palette(self.side);
        let shift = classes[index[&v]];
        let middle = self.n;
        let mut added = Vec::new();
        for (i, &u) in members.iter().enumerate() {
            let c = palette[((classes[i] + self.n - shift) % self.n) as usize];
            let escapes = nbhds[i].iter().any(|&w| self.outside(w, &batch));
            if c == middle && escapes {
                continue;
            }
            added.push((u, c));
        }
        for &(u, c) in &added {
            self.colors.insert(u, c);
        }
        fuel.charge((self.boundary.len() + added.len()) as u64)?;
        let candidates: Vec<u64> = self.boundary.iter().copied().chain(added.iter().map(|&(u, _)| u)).collect();
        self.boundary = candidates
            .into_iter()
            .filter(|&u| self.g.nbhd(u).into_iter().any(|w| !self.colors.contains_key(&w)))
            .collect();
        self.side = match self.side {
            Side::Low => Side::High,
            Side::High => Side::Low,
        };
        Ok(Ok(added))
    }
}

impl PunctualStream for SchmerlStream<'_> {
    /// Vertices coloured at this stage, in increasing order.
    type Item = Result<Vec<(u64, u32)>>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Self::Item, OutOfFuel> {
        fuel.charge(1)?;
        if let Some(e) = &self.failed {
            return Ok(Err(e.clone()));
        }
        let v = self.s;
        let out = if self.colors.contains_key(&v) { Ok(Vec::new()) } else { self.extend(v, fuel)? };
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

/// First edge inside `0..n` with equal or missing colours.
pub fn audit_coloring(g: &dyn HonestGraph, colors: &BTreeMap<u64, u32>, n: u64) -> Option<(u64, u64)> {
    (0..n).find_map(|v| {
        let cv = colors.get(&v)?;
        g.nbhd(v).into_iter().find(|&u| u != v && u < n && colors.get(&u).is_none_or(|cu| cu == cv)).map(|u| (v, u))
    })
    .or_else(|| (0..n).find(|v| !colors.contains_key(v)).map(|v| (v, v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::run_unbudgeted;
    use crate::online::{AdjGraph, PathGraph};

    fn run(g: &dyn HonestGraph, n: u32, stages: u64) -> SchmerlStream<'_> {
        let mut s = schmerl_color(g, n, Arc::new(Backtracking::new())).unwrap();
        for out in run_unbudgeted(&mut s, stages) {
            out.unwrap();
            assert!(s.boundary_invariant());
        }
        s
    }

    #[test]
    fn path_uses_three_colours_and_keeps_the_boundary_on_one_side() {
        let s = run(&PathGraph, 2, 60);
        assert_eq!(audit_coloring(&PathGraph, s.colors(), 60), None);
        assert!(s.colors().values().all(|c| (1..=3).contains(c)));
    }

    #[test]
    fn disjoint_triangles_use_at_most_five_colours() {
        let g = AdjGraph::from_edges(60, (0..20).flat_map(|t| [(3 * t, 3 * t + 1), (3 * t + 1, 3 * t + 2), (3 * t, 3 * t + 2)]));
        let s = run(&g, 3, 60);
        assert_eq!(audit_coloring(&g, s.colors(), 60), None);
        assert!(s.colors().values().all(|c| (1..=5).contains(c)));
    }

    #[test]
    fn a_triangle_breaks_the_two_colour_promise() {
        let g = AdjGraph::from_edges(4, [(1, 2), (2, 3), (1, 3), (0, 1)]);
        let mut s = schmerl_color(&g, 2, Arc::new(Backtracking::new())).unwrap();
        let out = run_unbudgeted(&mut s, 3);
        assert!(out.iter().any(|o| matches!(o, Err(Error::PromiseViolation(_)))));
    }

    #[test]
    fn oracle_memoizes_and_reports_failure() {
        let o = Backtracking::new();
        let (c, w1) = o.color(3, &[(0, 1), (1, 2)], 2);
        let c = c.unwrap();
        assert!(c[0] != c[1] && c[1] != c[2]);
        let (_, w2) = o.color(3, &[(2, 1), (1, 0)], 2);
        assert!(w2 <= 4 && w1 > 0);
        assert_eq!(o.color(3, &[(0, 1), (1, 2), (0, 2)], 2).0, None);
    }
}
