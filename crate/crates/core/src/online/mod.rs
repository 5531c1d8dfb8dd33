//! Online combinatorics: each algorithm decides about the element revealed
//! at stage `s` from the revealed prefix and its own earlier output only.
//!
//! Streams are given as [`Reveal`] records, one per stage, naming the new
//! vertex and its relations to earlier vertices. Locally finite graphs are
//! given by an [`HonestGraph`], whose neighbourhood function plays the role
//! of the bundle `b`.

pub mod components;
pub mod hall;
pub mod reorient;
pub mod rival_sands;
pub mod schmerl;
pub mod szpilrajn;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finset::FinSet;

pub use components::{connected_components, ComponentMap, PredicateGraph};
pub use hall::{hall_extended, hall_finite, Bipartite, HallExtendedStream};
pub use reorient::{reorient, ReorientStream};
pub use rival_sands::{rival_sands, RivalSandsStream};
pub use schmerl::{schmerl_color, SchmerlStream};
pub use szpilrajn::{szpilrajn_extend, SzpilrajnStream};

/// One stage of a revealed graph, poset or oriented graph.
///
/// For posets `from_prior` lists earlier elements below the new one and
/// `to_prior` earlier elements above it; for oriented graphs they list the
/// arcs `u → v` and `v → u`. Undirected graphs use `edges_to_prior`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reveal {
    pub vertex: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges_to_prior: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub from_prior: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub to_prior: Vec<u64>,
    /// Decimal prime-exponent code of `N(v)` (with `v ∈ N(v)`), when the stream is honest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle_code: Option<String>,
}

/// Parses JSONL reveal records and checks that vertex `s` arrives at stage `s`
/// and only refers to earlier vertices.
pub fn parse_reveals(text: &str) -> Result<Vec<Reveal>> {
    let reveals: Vec<Reveal> = crate::clock::parse_jsonl(text)?;
    check_reveals(&reveals)?;
    Ok(reveals)
}

pub fn check_reveals(reveals: &[Reveal]) -> Result<()> {
    for (s, r) in reveals.iter().enumerate() {
        if r.vertex != s as u64 {
            return Err(Error::Parse(format!("stage {s} reveals vertex {}", r.vertex)));
        }
        let mut prior = r.edges_to_prior.iter().chain(&r.from_prior).chain(&r.to_prior);
        if let Some(u) = prior.find(|&&u| u >= r.vertex) {
            return Err(Error::Parse(format!("vertex {} refers to later vertex {u}", r.vertex)));
        }
        for list in [&r.edges_to_prior, &r.from_prior, &r.to_prior] {
            let mut seen = BTreeSet::new();
            if let Some(u) = list.iter().find(|&&u| !seen.insert(u)) {
                return Err(Error::Parse(format!("vertex {} lists {u} twice", r.vertex)));
            }
        }
    }
    Ok(())
}

/// Locally finite graph with its neighbourhood bundle. `N(v)` contains `v`.
pub trait HonestGraph: Send + Sync {
    /// `N(v)` in increasing order.
    fn nbhd(&self, v: u64) -> Vec<u64>;

    fn adjacent(&self, u: u64, v: u64) -> bool {
        u != v && self.nbhd(v).binary_search(&u).is_ok()
    }

    /// The bundle value `b(v)`.
    fn bundle(&self, v: u64) -> FinSet {
        FinSet::from_elements(self.nbhd(v))
    }

    /// `N(v)` for vertices beyond the machine range. The default treats them
    /// as isolated, which is right for graphs with finite support.
    fn nbhd_big(&self, v: &BigUint) -> Vec<BigUint> {
        match v.to_u64() {
            Some(x) => self.nbhd(x).into_iter().map(BigUint::from).collect(),
            None => vec![v.clone()],
        }
    }
}

/// Checks `v ∈ N(v)` and symmetry for `v < n`.
pub fn audit_honest(g: &dyn HonestGraph, n: u64) -> Result<()> {
    for v in 0..n {
        let nb = g.nbhd(v);
        if !nb.windows(2).all(|w| w[0] < w[1]) || nb.binary_search(&v).is_err() {
            return Err(Error::InvalidInstance(format!("N({v}) = {nb:?} is not a sorted set containing {v}")));
        }
        if let Some(u) = nb.iter().find(|&&u| g.nbhd(u).binary_search(&v).is_err()) {
            return Err(Error::InvalidInstance(format!("{u} ∈ N({v}) but {v} ∉ N({u})")));
        }
    }
    Ok(())
}

/// Graph given by explicit adjacency on `0..n`; vertices from `n` on are isolated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdjGraph {
    adj: Vec<Vec<u64>>,
}

impl AdjGraph {
    pub fn new(n: usize) -> Self {
        AdjGraph { adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut g = AdjGraph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Builds the graph from undirected reveal records, checking any bundle codes.
    pub fn from_reveals(reveals: &[Reveal]) -> Result<Self> {
        check_reveals(reveals)?;
        let mut g = AdjGraph::new(reveals.len());
        for r in reveals {
            for &u in &r.edges_to_prior {
                g.add_edge(u, r.vertex);
            }
        }
        for r in reveals {
            if let Some(code) = &r.bundle_code {
                let m: BigUint = code.parse().map_err(|_| Error::Parse(format!("bad bundle code {code:?}")))?;
                let set = FinSet::from_code(&m).ok_or_else(|| Error::Parse(format!("{code} is not a set code")))?;
                if set.elements().collect::<Vec<_>>() != g.nbhd(r.vertex) {
                    return Err(Error::InvalidInstance(format!("bundle of {} disagrees with its edges", r.vertex)));
                }
            }
        }
        Ok(g)
    }

    /// Undirected reveal records with bundle codes, the inverse of [`AdjGraph::from_reveals`].
    pub fn to_reveals(&self) -> Vec<Reveal> {
        (0..self.adj.len() as u64)
            .map(|v| Reveal {
                vertex: v,
                edges_to_prior: self.adj[v as usize].iter().copied().filter(|&u| u < v).collect(),
                bundle_code: self.bundle(v).code().map(|c| c.to_string()),
                ..Reveal::default()
            })
            .collect()
    }

    pub fn add_edge(&mut self, u: u64, v: u64) {
        if u == v {
            return;
        }
        let n = self.adj.len().max(u as usize + 1).max(v as usize + 1);
        self.adj.resize(n, Vec::new());
        for (a, b) in [(u, v), (v, u)] {
            let list = &mut self.adj[a as usize];
            if let Err(i) = list.binary_search(&b) {
                list.insert(i, b);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn degree(&self, v: u64) -> usize {
        self.adj.get(v as usize).map_or(0, Vec::len)
    }
}

impl HonestGraph for AdjGraph {
    fn nbhd(&self, v: u64) -> Vec<u64> {
        let mut out = self.adj.get(v as usize).cloned().unwrap_or_default();
        let i = out.binary_search(&v).unwrap_err();
        out.insert(i, v);
        out
    }
}

/// The infinite path `0 – 1 – 2 – …`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PathGraph;

impl HonestGraph for PathGraph {
    fn nbhd(&self, v: u64) -> Vec<u64> {
        (v.saturating_sub(1)..=v + 1).collect()
    }

    fn nbhd_big(&self, v: &BigUint) -> Vec<BigUint> {
        let one = BigUint::from(1u32);
        let mut out = Vec::with_capacity(3);
        if v >= &one {
            out.push(v - &one);
        }
        out.push(v.clone());
        out.push(v + one);
        out
    }
}

/// The infinite graph with no edges.
#[derive(Debug, Clone, Copy, Default)]
pub struct Edgeless;

impl HonestGraph for Edgeless {
    fn nbhd(&self, v: u64) -> Vec<u64> {
        vec![v]
    }

    fn nbhd_big(&self, v: &BigUint) -> Vec<BigUint> {
        vec![v.clone()]
    }
}

/// Relation of `u` to `v` in a revealed oriented graph or poset: `1` for
/// `u → v` (or `u < v`), `-1` for `v → u`, `0` if unrelated.
#[derive(Debug, Clone, Default)]
pub(crate) struct Orientation {
    rel: Vec<Vec<i8>>,
}

impl Orientation {
    pub(crate) fn from_reveals(reveals: &[Reveal]) -> Self {
        let n = reveals.len();
        let mut rel = vec![vec![0i8; n]; n];
        for r in reveals {
            let v = r.vertex as usize;
            for &u in &r.from_prior {
                rel[u as usize][v] = 1;
                rel[v][u as usize] = -1;
            }
            for &u in &r.to_prior {
                rel[u as usize][v] = -1;
                rel[v][u as usize] = 1;
            }
        }
        Orientation { rel }
    }

    pub(crate) fn get(&self, u: usize, v: usize) -> i8 {
        self.rel[u][v]
    }

    pub(crate) fn arc(&self, u: usize, v: usize) -> bool {
        self.rel[u][v] == 1
    }
}
