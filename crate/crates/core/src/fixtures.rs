//! Seeded instance generators shared by tests, benches and the CLI.
//!
//! Every generator is a pure function of its seed (ChaCha8), so fixtures can
//! be regenerated instead of stored.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::online::{AdjGraph, Reveal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `less[a][b]`: `a < b` in a random poset on `0..n`, the transitive closure
/// of random arcs along a shuffled ranking.
pub fn random_poset(n: usize, p: f64, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = rng(seed);
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(&mut rng);
    let mut less = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            if rank[a] < rank[b] && rng.random_bool(p) {
                less[a][b] = true;
            }
        }
    }
    // Warshall closure
    for k in 0..n {
        for a in 0..n {
            if less[a][k] {
                for b in 0..n {
                    if less[k][b] {
                        less[a][b] = true;
                    }
                }
            }
        }
    }
    less
}

/// Reveal records of a relation matrix: `from_prior` lists `u → v`, `to_prior` `v → u`.
pub fn reveals_of(rel: &[Vec<bool>]) -> Vec<Reveal> {
    (0..rel.len())
        .map(|v| Reveal {
            vertex: v as u64,
            from_prior: (0..v).filter(|&u| rel[u][v]).map(|u| u as u64).collect(),
            to_prior: (0..v).filter(|&u| rel[v][u]).map(|u| u as u64).collect(),
            ..Reveal::default()
        })
        .collect()
}

/// A random poset streamed in index order.
pub fn poset_stream(n: usize, p: f64, seed: u64) -> Vec<Reveal> {
    reveals_of(&random_poset(n, p, seed))
}

/// A transitive orientation of a random comparability graph with random
/// implication classes reversed, which keeps it pseudo-transitive. `None`
/// when the flips happen to break pseudo-transitivity.
pub fn pseudo_transitive(n: usize, p: f64, seed: u64) -> Option<Vec<Vec<bool>>> {
    let less = random_poset(n, p, seed);
    let mut rng = rng(seed ^ 0x5eed);
    let adj = |a: usize, b: usize| less[a][b] || less[b][a];
    // union-find over ordered pairs a·n + b
    let mut parent: Vec<usize> = (0..n * n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for a in 0..n {
        for b in (0..n).filter(|&b| adj(a, b)) {
            for c in (0..n).filter(|&c| c != b && adj(a, c) && !adj(b, c)) {
                let (x, y) = (find(&mut parent, a * n + b), find(&mut parent, a * n + c));
                parent[x] = y;
                let (x, y) = (find(&mut parent, b * n + a), find(&mut parent, c * n + a));
                parent[x] = y;
            }
        }
    }
    let mut flip = vec![None; n * n];
    let mut out = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            if less[a][b] {
                let r = find(&mut parent, a * n + b);
                if *flip[r].get_or_insert_with(|| rng.random_bool(0.5)) {
                    out[b][a] = true;
                } else {
                    out[a][b] = true;
                }
            }
        }
    }
    let ok = (0..n).all(|a| (0..n).all(|b| !out[a][b] || (0..n).all(|c| !out[b][c] || c == a || out[a][c] || out[c][a])));
    ok.then_some(out)
}

/// The first pseudo-transitive stream found from `seed` onwards.
pub fn pseudo_transitive_stream(n: usize, p: f64, seed: u64) -> Vec<Reveal> {
    (seed..).find_map(|s| pseudo_transitive(n, p, s)).map(|r| reveals_of(&r)).expect("some seed succeeds")
}

/// Random bipartite graph on `0..n` (parts by parity) of maximum degree `d`.
pub fn bipartite_bounded(n: usize, d: usize, seed: u64) -> AdjGraph {
    let mut rng = rng(seed);
    let mut g = AdjGraph::new(n);
    for _ in 0..n * d {
        let u = rng.random_range(0..n as u64);
        let v = rng.random_range(0..n as u64);
        if u % 2 != v % 2 && g.degree(u) < d && g.degree(v) < d {
            g.add_edge(u, v);
        }
    }
    g
}

/// Random graph on `0..n` with maximum degree `d`; edges join vertices at most `span` apart so neighbourhoods stay local.
pub fn local_graph(n: usize, d: usize, span: u64, seed: u64) -> AdjGraph {
    let mut rng = rng(seed);
    let mut g = AdjGraph::new(n);
    for _ in 0..n * d {
        let u = rng.random_range(0..n as u64);
        let v = (u + rng.random_range(1..=span)).min(n as u64 - 1);
        if u != v && g.degree(u) < d && g.degree(v) < d {
            g.add_edge(u, v);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn posets_are_strict_orders() {
        let less = random_poset(30, 0.1, 3);
        for a in 0..30 {
            assert!(!less[a][a]);
            for b in 0..30 {
                assert!(!(less[a][b] && less[b][a]));
            }
        }
    }

    #[test]
    fn generators_are_seed_determined() {
        assert_eq!(poset_stream(20, 0.2, 9), poset_stream(20, 0.2, 9));
        assert_eq!(bipartite_bounded(40, 3, 1), bipartite_bounded(40, 3, 1));
        assert_eq!(pseudo_transitive_stream(15, 0.3, 4), pseudo_transitive_stream(15, 0.3, 4));
    }

    #[test]
    fn bipartite_graph_respects_parity_and_degree() {
        let g = bipartite_bounded(50, 3, 2);
        for v in 0..50 {
            assert!(g.degree(v) <= 3);
            assert!(crate::online::HonestGraph::nbhd(&g, v).into_iter().all(|u| u == v || (u + v) % 2 == 1));
        }
    }
}
