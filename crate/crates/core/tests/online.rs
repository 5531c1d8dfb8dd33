use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigUint;
use punctual::clock::{certify_punctual, run_unbudgeted, Budget};
use punctual::fixtures;
use punctual::online::hall::{audit_matching, Ladder};
use punctual::online::reorient::{is_transitive, BUDGET as REORIENT_BUDGET};
use punctual::online::rival_sands::{audit, SetCode};
use punctual::online::schmerl::{audit_coloring, Backtracking};
use punctual::online::szpilrajn::is_linear_extension;
use punctual::online::*;

/// Transitive closure by repeated squaring, independent of the library's checks.
fn closure(n: usize, arcs: &[(u64, u64)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for &(a, b) in arcs {
        r[a as usize][b as usize] = true;
    }
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in 0..n {
                if r[a][b] {
                    for c in 0..n {
                        if r[b][c] && !r[a][c] {
                            r[a][c] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

#[test]
fn szpilrajn_extends_random_posets() {
    for seed in 0..6 {
        let reveals = fixtures::poset_stream(200, [0.005, 0.02, 0.1][seed as usize % 3], seed);
        let mut s = szpilrajn_extend(&reveals).unwrap();
        let cert = certify_punctual(&mut s, 200, Budget::new(2, 1)).unwrap();
        assert!(cert.outputs.iter().all(Option::is_some));
        let order = s.order().to_vec();
        // every pair related in the closure appears in that order
        let less = fixtures::random_poset(200, [0.005, 0.02, 0.1][seed as usize % 3], seed);
        let pos: Vec<usize> = {
            let mut p = vec![0; 200];
            order.iter().enumerate().for_each(|(i, &v)| p[v as usize] = i);
            p
        };
        for a in 0..200 {
            for b in 0..200 {
                assert!(!less[a][b] || pos[a] < pos[b]);
            }
        }
        assert!(is_linear_extension(&reveals, &order));
    }
}

#[test]
fn reorientation_is_transitive_at_every_stage() {
    for seed in 0..40 {
        let n = 20 + (seed as usize * 7) % 41;
        let p = [0.05, 0.1, 0.2, 0.4][seed as usize % 4];
        let reveals = fixtures::pseudo_transitive_stream(n, p, seed);
        let mut s = reorient(&reveals).unwrap();
        let mut arcs = Vec::new();
        for w in 0..n {
            let out = run_unbudgeted(&mut s, 1).pop().unwrap().unwrap().unwrap();
            arcs.extend(out);
            let c = closure(w + 1, &arcs);
            for &(a, b) in &arcs {
                assert!(!c[b as usize][a as usize], "seed {seed}: cycle through ({a}, {b})");
            }
            assert!(arcs.iter().all(|&(a, b)| arcs.iter().all(|&(c, d)| b != c || a == d || arcs.contains(&(a, d)))));
        }
        // every input edge is kept, possibly flipped
        let edges: usize = reveals.iter().map(|r| r.from_prior.len() + r.to_prior.len()).sum();
        assert_eq!(arcs.len(), edges);
        assert!(is_transitive(n, &arcs));
    }
}

#[test]
fn reorientation_meets_its_declared_budget() {
    let reveals = fixtures::pseudo_transitive_stream(60, 0.3, 11);
    let mut s = reorient(&reveals).unwrap();
    let cert = certify_punctual(&mut s, 60, REORIENT_BUDGET).unwrap();
    assert!(cert.outputs.iter().all(|o| o.is_ok()));
}

#[test]
fn rival_sands_audits_on_two_hundred_vertices() {
    let g = fixtures::local_graph(200, 3, 5, 8);
    audit_honest(&g, 200).unwrap();
    for code in [SetCode::Binary, SetCode::Bound] {
        let mut s = rival_sands(&g, code);
        let h: Vec<BigUint> = run_unbudgeted(&mut s, 40).into_iter().map_while(|x| x.ok()).collect();
        assert!(h.len() >= 2);
        assert!(h.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(audit(&g, &h, 200), None);
    }
}

#[test]
fn schmerl_three_colours_bipartite_graphs() {
    for seed in 0..4 {
        let g = fixtures::bipartite_bounded(150, 3, seed);
        audit_honest(&g, 150).unwrap();
        let mut s = schmerl_color(&g, 2, Arc::new(Backtracking::new())).unwrap();
        for out in run_unbudgeted(&mut s, 150) {
            out.unwrap();
            assert!(s.boundary_invariant());
        }
        assert_eq!(audit_coloring(&g, s.colors(), 150), None);
        let used: BTreeSet<u32> = s.colors().values().copied().collect();
        assert!(used.iter().all(|c| (1..=3).contains(c)));
    }
}

#[test]
fn schmerl_is_punctual_on_bounded_degree_graphs() {
    let g = fixtures::bipartite_bounded(150, 3, 5);
    let mut s = schmerl_color(&g, 2, Arc::new(Backtracking::new())).unwrap();
    certify_punctual(&mut s, 150, Budget::new(5_000, 1)).unwrap();
}

#[test]
fn hall_variants_on_hundred_vertex_prefixes() {
    let g = Ladder::new(2, 1);
    let h = |n: u64| n.saturating_sub(1);
    let mut s = hall_extended(&g, &h).unwrap();
    let pairs: Vec<(u64, u64)> = run_unbudgeted(&mut s, 100).into_iter().map(|p| p.unwrap()).collect();
    assert!(audit_matching(&g, &pairs));

    let left: Vec<u64> = (0..100).collect();
    let finite = hall_finite(&left, |a| g.left_nbrs(a)).unwrap();
    assert!(audit_matching(&g, &finite));
}

#[test]
fn online_algorithms_replay_bit_exactly() {
    let posets = fixtures::poset_stream(80, 0.05, 1);
    let prefix = &posets[..50];
    let mut full = szpilrajn_extend(&posets).unwrap();
    let mut short = szpilrajn_extend(prefix).unwrap();
    assert_eq!(run_unbudgeted(&mut full, 50), run_unbudgeted(&mut short, 50));

    let stream = fixtures::pseudo_transitive_stream(40, 0.2, 2);
    let mut full = reorient(&stream).unwrap();
    let mut short = reorient(&stream[..25]).unwrap();
    assert_eq!(run_unbudgeted(&mut full, 25), run_unbudgeted(&mut short, 25));

    let g = fixtures::bipartite_bounded(100, 3, 4);
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let mut s = schmerl_color(&g, 2, Arc::new(Backtracking::new())).unwrap();
            run_unbudgeted(&mut s, 100)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn planted_graph_decodes_planted_truth() {
    let mut rng = fixtures::rng(21);
    use rand::Rng;
    let truth: Vec<bool> = (0..12).map(|_| rng.random_bool(0.5)).collect();
    let delay: Vec<u64> = (0..12).map(|_| rng.random_range(0..15)).collect();
    let p = components::PlantedCoding { truth: truth.clone(), delay };
    let map = connected_components(p.graph(), &[0, 1], p.reach_bound()).unwrap();
    for n in 0..12 {
        assert_eq!(components::PlantedCoding::decode(&map, n).unwrap(), truth[n as usize]);
    }
}
