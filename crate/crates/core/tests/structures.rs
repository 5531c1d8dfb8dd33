use std::cell::RefCell;
use std::sync::Arc;

use punctual::clock::{certify_punctual, run_unbudgeted};
use punctual::structures::ba::{audit_axioms, audit_splits, AlgebraStream, D};
use punctual::structures::dlo::OrderStream;
use punctual::structures::rg::{audit_extension, decode_nodes, decode_starts, embed, GraphStream};
use punctual::structures::*;
use punctual::{Budget, Error, FinSet};
use rand::{Rng, SeedableRng};

/// `A_s` built literally: fresh numbers at both ends and in every gap.
fn literal_stages(s: usize) -> Vec<u64> {
    let mut order = vec![0u64, 1];
    let mut next = 2;
    for _ in 0..s {
        let mut out = Vec::with_capacity(2 * order.len() + 1);
        for &a in &order {
            out.push(next);
            next += 1;
            out.push(a);
        }
        out.push(next);
        next += 1;
        order = out;
    }
    order
}

#[test]
fn built_order_matches_literal_recursion() {
    let a = dlo_build();
    let lit = literal_stages(7);
    let pos: std::collections::HashMap<u64, usize> = lit.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    for x in 0..150 {
        for y in 0..150 {
            assert_eq!(a.less(x, y).unwrap(), pos[&x] < pos[&y], "{x} {y}");
        }
    }
}

#[test]
fn built_order_is_dense_without_endpoints() {
    let a = dlo_build();
    let lit = literal_stages(9);
    let pos: std::collections::HashMap<u64, usize> = lit.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    for x in 0..100 {
        assert!(pos[&a.below(x).unwrap()] < pos[&x]);
        assert!(pos[&a.above(x).unwrap()] > pos[&x]);
        for y in 0..100 {
            if pos[&x] < pos[&y] {
                let (c, d, e) = a.skolem(x, y).unwrap();
                assert!(pos[&c] < pos[&x] && pos[&x] < pos[&d] && pos[&d] < pos[&y] && pos[&y] < pos[&e]);
            }
        }
    }
}

fn back_and_forth_audit(a: &dyn LinearOrder, b: &dyn LinearOrder, n: u64) {
    let mut bf = dlo_backforth(a, b).unwrap();
    let pairs = run_unbudgeted(&mut bf, 4 * n).into_iter().collect::<Result<Vec<_>, _>>().unwrap();
    let iso = bf.into_iso();
    let all = iso.pairs();
    assert!(pairs.iter().all(|p| all.contains(p)));
    let h = |x: u64| all.iter().find(|p| p.0 == x).map(|p| p.1);
    let hinv = |y: u64| all.iter().find(|p| p.1 == y).map(|p| p.0);
    assert_eq!((h(0), h(1)), (Some(0), Some(1)));
    for x in 0..n {
        let y = h(x).expect("forth covers the prefix");
        assert_eq!(hinv(y), Some(x));
        assert!(hinv(x).is_some(), "back covers the prefix");
        for x2 in 0..n {
            assert_eq!(a.less(x, x2).unwrap(), b.less(y, h(x2).unwrap()).unwrap());
        }
    }
    let mut imgs: Vec<u64> = all.iter().map(|p| p.1).collect();
    imgs.sort_unstable();
    imgs.dedup();
    assert_eq!(imgs.len(), all.len());
}

#[test]
fn back_and_forth_between_built_orders() {
    back_and_forth_audit(&dlo_build(), &dlo_build(), 100);
    back_and_forth_audit(&dlo_build_seeded(3), &dlo_build_seeded(11), 100);
    back_and_forth_audit(&dlo_build(), &dlo_build_seeded(5), 60);
}

fn decode_dlo(theta: Predicate, n: u64) -> Result<Vec<u64>, Error> {
    let b = dlo_encode(theta.clone(), 60)?;
    let a = dlo_build();
    let iso = RefCell::new(PartialIso::new(&b, &a)?);
    dlo_decode(&*theta, &mut |x| iso.borrow_mut().forth(x), &mut |y| iso.borrow_mut().back(y), n)
}

#[test]
fn dlo_round_trip_instant() {
    let theta: Predicate = Arc::new(|k, y| y >= k);
    assert_eq!(decode_dlo(theta, 32).unwrap(), (0..32).collect::<Vec<_>>());
}

#[test]
fn dlo_round_trip_planted_delays() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..5 {
        let delays: Vec<u64> = (0..16).map(|_| rng.random_range(0..=16)).collect();
        let d = delays.clone();
        let theta: Predicate = Arc::new(move |k, y| y >= *d.get(k as usize).unwrap_or(&0));
        assert_eq!(decode_dlo(theta, 16).unwrap(), delays);
    }
}

#[test]
fn dlo_missing_witness_is_out_of_horizon() {
    let theta: Predicate = Arc::new(|k, y| k != 3 || y > 1000);
    assert!(matches!(decode_dlo(theta, 6), Err(Error::HorizonExceeded(_))));
}

#[test]
fn coded_order_parity_and_copy() {
    let theta: Predicate = Arc::new(|k, y| y >= 2 * k);
    let b = dlo_encode(theta, 40).unwrap();
    let a = dlo_build();
    for s in 0..9 {
        let order = b.stage_order(s).unwrap();
        let first_code = order.iter().position(|&x| x == 2).unwrap();
        assert!(order[..first_code].iter().all(|x| x % 4 == 0), "copy of A sits below 2");
        let mut inside = false;
        for &x in &order[first_code..] {
            if x % 4 == 2 {
                inside = true;
            } else {
                assert!(inside && x % 2 == 1, "element {x} inside a coding interval is odd");
            }
        }
    }
    for x in 0..60 {
        for y in 0..60 {
            assert_eq!(b.less(4 * x, 4 * y).unwrap(), a.less(x, y).unwrap());
        }
    }
    // dense without endpoints on the prefix, using the witness-searching oracle
    for x in 0..200 {
        assert!(b.less(b.below(x).unwrap(), x).unwrap() && b.less(x, b.above(x).unwrap()).unwrap());
    }
}

#[test]
fn order_builders_are_punctual() {
    let cert = certify_punctual(&mut OrderStream::new(dlo_build()), 200, Budget::new(2, 1)).unwrap();
    assert!(cert.outputs.iter().all(|r| r.is_ok()));
    let b = dlo_encode(Arc::new(|k, y| y >= k), 40).unwrap();
    let cert = certify_punctual(&mut OrderStream::new(b), 200, Budget::new(2, 1)).unwrap();
    assert!(cert.outputs.iter().all(|r| r.is_ok()));
    let a = dlo_build();
    let mut bf = dlo_backforth(&a, &a).unwrap();
    certify_punctual(&mut bf, 300, Budget::new(100, 1)).unwrap();
}

#[test]
fn random_graph_extension_property() {
    let g = rg_build();
    for (x, y) in rg::extension_demands(40, 3) {
        let z = g.skolem(&FinSet::from_elements(x.iter().copied()), &FinSet::from_elements(y.iter().copied())).unwrap();
        assert!(x.iter().all(|&u| g.adjacent(z, u).unwrap()) && y.iter().all(|&u| !g.adjacent(z, u).unwrap()));
    }
    // the bounded search agrees on a small prefix
    assert_eq!(audit_extension(&g, 6, 3, 200).unwrap(), None);
    let mut s1 = GraphStream::new(rg_build());
    let mut s2 = GraphStream::new(rg_build());
    assert_eq!(run_unbudgeted(&mut s1, 100), run_unbudgeted(&mut s2, 100));
    certify_punctual(&mut GraphStream::new(rg_build()), 300, Budget::new(2, 1)).unwrap();
}

fn decode_rg(psi: Predicate, truth: &[u64], nodes: u64) -> Result<Vec<u64>, Error> {
    let mut b = rg_encode(psi.clone());
    b.grow_to(nodes);
    let a = rg_build();
    let starts = decode_starts(truth);
    let domain = decode_nodes(*starts.last().unwrap());
    let img = embed(&a, &domain, &b, nodes).unwrap().expect("embedding within the prefix");
    let table: std::collections::HashMap<u64, u64> = domain.iter().copied().zip(img).collect();
    rg_decode(&*psi, &mut |x| table.get(&x).copied().ok_or_else(|| Error::HorizonExceeded(format!("{x}"))), truth.len() as u64)
}

#[test]
fn rg_first_witness_at_stage_three() {
    let psi: Predicate = Arc::new(|n, s| s >= 3 + n);
    let f = decode_rg(psi, &[3], 400).unwrap();
    assert_eq!(f, vec![3]);
}

#[test]
fn rg_round_trip_instant_and_delayed() {
    let psi: Predicate = Arc::new(|n, s| s >= n);
    let truth: Vec<u64> = (0..8).collect();
    assert_eq!(decode_rg(psi, &truth, 3000).unwrap(), truth);
    let delays = [4u64, 0, 9, 2, 13, 1, 6, 0];
    let psi: Predicate = Arc::new(move |n, s| s >= delays[n as usize % 8]);
    assert_eq!(decode_rg(psi, &delays, 3000).unwrap(), delays.to_vec());
}

#[test]
fn rg_encoding_keeps_the_extension_property() {
    let mut b = rg_encode(Arc::new(|n, s| s >= n));
    b.grow_to(1200);
    assert_eq!(audit_extension(&b, 7, 3, 1200).unwrap(), None);
    // a delayed phase only postpones requirements
    let mut slow = rg_encode(Arc::new(|n, s| s >= if n == 3 { 300 } else { n }));
    slow.grow_to(1600);
    assert_eq!(audit_extension(&slow, 6, 3, 1600).unwrap(), None);
    assert!(slow.phases().iter().any(|p| p.phase == 3 && p.marker == 300));
    let mut enc = rg_encode(Arc::new(|n, s| s >= n));
    certify_punctual(&mut enc, 400, Budget::new(4, 1)).unwrap();
}

#[test]
fn boolean_algebras_on_prefixes() {
    let a = ba_build();
    assert_eq!(audit_axioms(&a, 50).unwrap(), None);
    assert_eq!(audit_splits(&a, 50).unwrap(), None);
    let b = ba_encode(Arc::new(|n, y| y >= n), 40);
    assert_eq!(audit_axioms(&b, 50).unwrap(), None);
    assert_eq!(audit_splits(&b, 50).unwrap(), None);
    certify_punctual(&mut AlgebraStream::new(ba_build()), 200, Budget::new(3, 1)).unwrap();
    certify_punctual(&mut AlgebraStream::new(b), 200, Budget::new(3, 1)).unwrap();
}

fn decode_ba(psi: Predicate, m: usize, d_pre: u64, reverse: bool) -> Result<Vec<u64>, Error> {
    let a = ba_build();
    let b = ba_encode(psi.clone(), 40);
    let src = a.partition(d_pre, m + 1)?;
    let mut dst = b.partition(D, m + 1)?;
    if reverse {
        dst.reverse();
    }
    // the table is an isomorphism of the finite subalgebras generated by the pieces
    for (i, (&p, &q)) in src.iter().zip(&dst).enumerate() {
        for (&p2, &q2) in src.iter().zip(&dst).skip(i + 1) {
            assert_eq!(a.meet(p, p2)?, 0);
            assert_eq!(b.meet(q, q2)?, 0);
        }
        assert!(p != 0 && q != 0);
    }
    assert!(b.below(*dst.iter().max().unwrap(), D)?);
    let table: std::collections::HashMap<u64, u64> = src.into_iter().zip(dst).collect();
    ba_decode(&*psi, d_pre, &mut |x| table.get(&x).copied().ok_or(Error::HorizonExceeded(format!("{x}"))), m)
}

#[test]
fn ba_round_trips() {
    for m in 1..=8 {
        let psi: Predicate = Arc::new(|n, y| y >= n);
        for (d_pre, rev) in [(2, false), (5, true), (13, false)] {
            assert_eq!(decode_ba(psi.clone(), m, d_pre, rev).unwrap(), (0..m as u64).collect::<Vec<_>>());
        }
    }
    let delays = [3u64, 7, 0, 5, 11, 2];
    let psi: Predicate = Arc::new(move |n, y| y >= delays[n as usize % 6]);
    assert_eq!(decode_ba(psi, 6, 6, true).unwrap(), delays.to_vec());
}

/// All `Σ cᵢ bᵢ` computed on coordinates, independently of the presentation.
fn combos(v: &CoordinateSpace, basis: &[u64]) -> Vec<(Vec<u64>, u64)> {
    let k = v.field().size();
    let f = v.field();
    let total = k.pow(basis.len() as u32);
    (0..total)
        .map(|mut c| {
            let coeffs: Vec<u64> = (0..basis.len()).map(|_| { let d = c % k; c /= k; d }).collect();
            let mut acc: Vec<u64> = Vec::new();
            for (&co, &b) in coeffs.iter().zip(basis) {
                for (i, x) in v.coords(b).into_iter().enumerate() {
                    if acc.len() <= i {
                        acc.resize(i + 1, 0);
                    }
                    acc[i] = f.add(acc[i], f.mul(co, x));
                }
            }
            (coeffs, v.vector(&acc).unwrap())
        })
        .collect()
}

#[test]
fn f2_basis_spans_the_prefix() {
    let v = CoordinateSpace::relabelled(FiniteField::prime(2).unwrap(), vec![vec![0, 1]]).unwrap();
    let b: Vec<u64> = run_unbudgeted(&mut basis_finite_field(&v), 6).into_iter().collect::<Result<_, _>>().unwrap();
    assert_eq!(b[0], 1);
    let c = combos(&v, &b);
    let zeros = c.iter().filter(|(_, s)| *s == 0).count();
    assert_eq!(zeros, 1, "independent");
    let mut span: Vec<u64> = c.iter().map(|(_, s)| *s).collect();
    span.sort_unstable();
    assert_eq!(span, (0..64).collect::<Vec<_>>());
}

#[test]
fn f3_and_f4_bases_are_independent() {
    let v3 = CoordinateSpace::relabelled(FiniteField::prime(3).unwrap(), vec![vec![0, 2, 1], vec![0, 1, 2], vec![0, 2, 1]]).unwrap();
    let v4 = CoordinateSpace::relabelled(FiniteField::f4(), vec![vec![0, 3, 1, 2]]).unwrap();
    for v in [v3, v4] {
        let mut s = basis_finite_field(&v);
        let b: Vec<u64> = run_unbudgeted(&mut s, 5).into_iter().collect::<Result<_, _>>().unwrap();
        assert_eq!(b[0], 1);
        let c = combos(&v, &b);
        assert_eq!(c.iter().filter(|(_, s)| *s == 0).count(), 1);
        // each b(n+1) is the least vector outside the span of the earlier ones
        for n in 1..b.len() {
            let span: std::collections::HashSet<u64> = combos(&v, &b[..n]).into_iter().map(|(_, s)| s).collect();
            assert_eq!(Some(b[n]), (0..).find(|z| !span.contains(z)));
        }
    }
}

#[test]
fn presentation_errors_surface() {
    struct Bounded(FiniteField);
    impl VectorSpace for Bounded {
        fn field(&self) -> &FiniteField {
            &self.0
        }
        // F₂ coordinates, refusing vectors beyond the first three coordinates
        fn add(&self, u: u64, v: u64) -> punctual::Result<u64> {
            if u.max(v) >= 8 {
                return Err(Error::HorizonExceeded(format!("vector {}", u.max(v))));
            }
            Ok(u ^ v)
        }
        fn scale(&self, a: u64, v: u64) -> punctual::Result<u64> {
            Ok(if a == 0 { 0 } else { v })
        }
    }
    let t = Bounded(FiniteField::prime(2).unwrap());
    let out = run_unbudgeted(&mut basis_finite_field(&t), 5);
    assert_eq!(out[..3], [Ok(1), Ok(2), Ok(4)]);
    // b(3) = 8 is found, but combining it is refused
    assert_eq!(out[3], Ok(8));
    assert!(matches!(out[4], Err(Error::HorizonExceeded(_))));
}
