//! Instance files: one JSON record per line. Oracle-backed instances use
//! `{"x": query, "t_converge": stage, "value": answer}`, with the types of
//! `x` and `value` fixed per problem. Every kind also has a seeded generator,
//! used by `punctual fixture` and whenever `--instance` is omitted.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use punctual::clock::{parse_jsonl, FixtureRecord};
use punctual::finset::pair;
use punctual::online::hall::{Bipartite, Ladder};
use punctual::rat::{dyadic, from_wire, probe, to_wire, Rat};
use punctual::transform::{index_of, strings_of_len, Bits};
use punctual::{fixtures, online};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::exit::parse_error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record<X, V> {
    pub x: X,
    pub t_converge: u64,
    pub value: V,
}

/// Delayed lookup table; unlisted queries answer `default` at stage 0.
#[derive(Debug, Clone)]
pub struct Table<X, V> {
    map: BTreeMap<X, (u64, V)>,
    default: V,
}

impl<X: Ord + std::fmt::Debug, V: Clone> Table<X, V> {
    pub fn new(records: Vec<Record<X, V>>, default: V) -> Result<Self> {
        let mut map = BTreeMap::new();
        for r in records {
            let dup = format!("duplicate record for x = {:?}", r.x);
            if map.insert(r.x, (r.t_converge, r.value)).is_some() {
                return Err(parse_error(dup));
            }
        }
        Ok(Table { map, default })
    }

    pub fn get(&self, x: &X) -> (u64, V) {
        self.map.get(x).cloned().unwrap_or((0, self.default.clone()))
    }

    /// The listed entry at or below `x`, if any.
    pub fn floor(&self, x: &X) -> Option<(&X, &(u64, V))> {
        self.map.range(..=x).next_back()
    }
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn records<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    Ok(parse_jsonl(text)?)
}

pub fn bits(s: &str) -> Result<Bits> {
    s.bytes()
        .map(|b| match b {
            b'0' => Ok(0),
            b'1' => Ok(1),
            _ => Err(parse_error(format!("{s:?} is not a bit string"))),
        })
        .collect()
}

pub fn bit_string(b: &[u8]) -> String {
    b.iter().map(|&x| if x == 0 { '0' } else { '1' }).collect()
}

pub fn rational(s: &str) -> Result<Rat> {
    from_wire(s).ok_or_else(|| parse_error(format!("{s:?} is not a rational num/den")))
}

/// One left vertex of a bipartite instance and its right neighbours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallRecord {
    pub left: u64,
    pub right: Vec<u64>,
}

/// Finite bipartite graph revealed in file order.
#[derive(Debug, Clone)]
pub struct FileBipartite {
    order: Vec<u64>,
    nbrs: BTreeMap<u64, Vec<u64>>,
}

impl FileBipartite {
    pub fn from_records(rs: Vec<HallRecord>) -> Result<Self> {
        let mut nbrs = BTreeMap::new();
        let mut order = Vec::new();
        for mut r in rs {
            r.right.sort_unstable();
            r.right.dedup();
            if nbrs.insert(r.left, r.right).is_some() {
                return Err(parse_error(format!("left vertex {} listed twice", r.left)));
            }
            order.push(r.left);
        }
        Ok(FileBipartite { order, nbrs })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn lefts(&self) -> &[u64] {
        &self.order
    }
}

impl Bipartite for FileBipartite {
    fn left(&self, i: u64) -> u64 {
        self.order.get(i as usize).copied().unwrap_or(u64::MAX)
    }

    fn left_nbrs(&self, a: u64) -> Vec<u64> {
        self.nbrs.get(&a).cloned().unwrap_or_default()
    }

    fn right_nbrs(&self, b: u64) -> Vec<u64> {
        self.nbrs.iter().filter(|(_, r)| r.binary_search(&b).is_ok()).map(|(&a, _)| a).collect()
    }
}

/// Planted predicate `ψ(k, y) ⇔ y ≥ d_k`, read from `{x: k, t_converge: d_k, value}`
/// records; unlisted `k` have `d_k = 0`.
pub fn planted_delays(text: &str) -> Result<Vec<u64>> {
    let rs: Vec<FixtureRecord> = records(text)?;
    let n = rs.iter().map(|r| r.x + 1).max().unwrap_or(0);
    let mut d = vec![0; n as usize];
    for r in rs {
        d[r.x as usize] = r.t_converge;
    }
    Ok(d)
}

/// Isomorphism table entry, `from ↦ to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoPair {
    pub from: u64,
    pub to: u64,
}

// ---------------------------------------------------------------------------
// seeded generators

pub fn mix(seed: u64, x: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(x.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FixtureKind {
    Tree,
    Cauchy,
    Ramsey,
    Coh,
    Ivt,
    HeineBorel,
    Table,
    Bounds,
    Poset,
    PseudoTransitive,
    Bipartite,
    LocalGraph,
    Ladder,
    Predicate,
    Planted,
}

impl FixtureKind {
    pub fn default_size(self) -> usize {
        match self {
            FixtureKind::Tree => 10,
            FixtureKind::Cauchy => 48,
            FixtureKind::Ramsey => 24,
            FixtureKind::Coh => 40,
            FixtureKind::Ivt => 8,
            FixtureKind::HeineBorel => 200,
            FixtureKind::Table => 20,
            FixtureKind::Bounds => 3,
            FixtureKind::Poset | FixtureKind::Bipartite | FixtureKind::LocalGraph => 100,
            FixtureKind::PseudoTransitive => 40,
            FixtureKind::Ladder => 100,
            FixtureKind::Predicate => 8,
            FixtureKind::Planted => 12,
        }
    }
}

fn line<T: Serialize>(out: &mut String, v: &T) {
    let _ = writeln!(out, "{}", serde_json::to_string(v).expect("fixture records serialize"));
}

/// JSONL text of a seeded instance of `kind`.
pub fn generate(kind: FixtureKind, seed: u64, size: usize) -> String {
    let mut out = String::new();
    let n = size as u64;
    match kind {
        FixtureKind::Tree => {
            // a planted path plus each other node with probability 7/10, closed under prefixes
            let path = mix(seed, 0xa);
            let member = |s: &[u8]| {
                (1..=s.len()).all(|k| {
                    let on_path = s[..k].iter().enumerate().all(|(i, &b)| u64::from(b) == (path >> (i % 64)) & 1);
                    on_path || mix(seed, index_of(&s[..k])) % 10 < 7
                })
            };
            for len in 0..=size {
                for s in strings_of_len(len) {
                    line(&mut out, &Record { x: bit_string(&s), t_converge: mix(seed ^ 0x55, index_of(&s)) % 8, value: member(&s) });
                }
            }
        }
        FixtureKind::Cauchy => {
            let limit = mix(seed, 1);
            for j in 0..n {
                let noisy = mix(seed, j + 100);
                let s: String = (0..j)
                    .map(|i| {
                        let b = (limit >> (i % 64)) & 1;
                        let b = if i + 3 >= j { b ^ ((noisy >> i % 64) & 1) } else { b };
                        if b == 1 { '1' } else { '0' }
                    })
                    .collect();
                line(&mut out, &Record { x: j, t_converge: mix(seed, j) % (3 * j + 8), value: s });
            }
        }
        FixtureKind::Ramsey => {
            for b in 0..n {
                for a in 0..b {
                    let stable = b > a + mix(seed, a) % 5;
                    let c = if stable { mix(seed, a) >> 8 & 1 } else { mix(seed, pair(a, b)) & 1 };
                    line(&mut out, &Record { x: [a, b], t_converge: mix(seed ^ 3, pair(a, b)) % (2 * b + 3), value: c });
                }
            }
        }
        FixtureKind::Coh => {
            for j in 0..n {
                let s: String = (0..j).map(|x| if mix(seed, pair(j, x)) % 3 == 0 { '1' } else { '0' }).collect();
                line(&mut out, &Record { x: j, t_converge: mix(seed ^ 9, j) % (4 * j + 6), value: s });
            }
        }
        FixtureKind::Ivt => {
            // an odd number of crossings at (3k+1)/192, signs listed on the 2^-size grid
            let count = [1, 3, 5][(mix(seed, 0) % 3) as usize];
            let mut ks: Vec<i128> = (1..63).collect();
            for i in 0..count {
                let j = i + (mix(seed, i as u64 + 1) as usize) % (ks.len() - i);
                ks.swap(i, j);
            }
            let crossings: Vec<Rat> = ks[..count].iter().map(|&k| Rat::new(3 * k + 1, 192)).collect();
            let sign = |q: &Rat| (crossings.iter().filter(|c| *c < q).count() % 2) as u64;
            let mut pts = vec![dyadic(0, 0), dyadic(1, 0)];
            pts.extend((0..(1u64 << size.min(20)) - 1).map(probe));
            for (i, q) in pts.iter().enumerate() {
                line(&mut out, &Record { x: to_wire(q), t_converge: mix(seed, i as u64) % 40, value: sign(q) });
            }
        }
        FixtureKind::HeineBorel => {
            let gaps: Vec<Rat> = (0..1 + mix(seed, 0) % 3).map(|i| Rat::new(3 * (mix(seed, i + 1) % 63 + 1) as i128 + 1, 192)).collect();
            for j in 0..n {
                let m = 2 + (mix(seed, j) % 7) as u32;
                let k = (mix(seed ^ 1, j) % (1 << m)) as i128;
                let (lo, hi) = (dyadic(k, m), dyadic(k + 1, m) + dyadic(1, m + 2));
                let value = (!gaps.iter().any(|g| lo < *g && *g < hi)).then(|| [to_wire(&lo), to_wire(&hi)]);
                line(&mut out, &Record { x: j, t_converge: mix(seed ^ 2, j) % (3 * j + 11), value });
            }
        }
        FixtureKind::Table => {
            // entry 0 is g(i) = 2i with delay i; the rest vary delays and values
            for e in 0..n {
                for x in 0..16 {
                    let (t, v) = match (e, e % 5) {
                        (0, _) => (x, 2 * x),
                        (_, 1) => (e * x % 13, (x * x + e) % 4),
                        (_, 2) => (2 * x, x % (e % 4 + 1)),
                        (_, 3) => (x * x % 50 + e, x + e),
                        (_, 4) => (e + 3 * x, (x ^ e) % 3),
                        _ => (x + e + mix(seed, e) % 3, (e + mix(seed, pair(e, x))) % 4),
                    };
                    line(&mut out, &FixtureRecord { e: Some(e as usize), x, t_converge: t, value: v });
                }
            }
        }
        FixtureKind::Bounds => {
            for e in 0..n {
                for x in 0..16 {
                    let v = (mix(seed, pair(e, x)) % 3).max(u64::from(x == 0));
                    line(&mut out, &FixtureRecord { e: Some(e as usize), x, t_converge: x * (e + 1) + 1, value: v });
                }
            }
        }
        FixtureKind::Poset => fixtures::poset_stream(size, 0.02, seed).iter().for_each(|r| line(&mut out, r)),
        FixtureKind::PseudoTransitive => fixtures::pseudo_transitive_stream(size, 0.2, seed).iter().for_each(|r| line(&mut out, r)),
        FixtureKind::Bipartite => fixtures::bipartite_bounded(size, 3, seed).to_reveals().iter().for_each(|r| line(&mut out, r)),
        FixtureKind::LocalGraph => fixtures::local_graph(size, 3, 5, seed).to_reveals().iter().for_each(|r| line(&mut out, r)),
        FixtureKind::Ladder => {
            let g = if seed % 2 == 0 { Ladder::new(2, 1) } else { Ladder::new(2, 1).block_reversed(5) };
            for i in 0..n {
                let a = g.left(i);
                line(&mut out, &HallRecord { left: a, right: g.left_nbrs(a) });
            }
        }
        FixtureKind::Predicate => {
            for k in 0..n {
                // a long first wait pushes the random-graph decode set far out
                let cap = if k == 0 { 8 } else { 12 };
                line(&mut out, &FixtureRecord { e: None, x: k, t_converge: mix(seed, k) % (cap + 1), value: 0 });
            }
        }
        FixtureKind::Planted => {
            // bit g(n) witnessed at stage delay(n)
            for k in 0..n {
                line(&mut out, &FixtureRecord { e: None, x: k, t_converge: mix(seed ^ 7, k) % 15, value: mix(seed, k) & 1 });
            }
        }
    }
    out
}

/// Reveal records of an online instance, checked for stage order.
pub fn reveals(text: &str) -> Result<Vec<online::Reveal>> {
    Ok(online::parse_reveals(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_instances_parse() {
        for kind in <FixtureKind as clap::ValueEnum>::value_variants() {
            let text = generate(*kind, 3, kind.default_size().min(12));
            assert!(!text.is_empty(), "{kind:?}");
            for l in text.lines() {
                serde_json::from_str::<serde_json::Value>(l).unwrap();
            }
        }
    }

    #[test]
    fn generators_are_seeded() {
        assert_eq!(generate(FixtureKind::Ramsey, 1, 10), generate(FixtureKind::Ramsey, 1, 10));
        assert_ne!(generate(FixtureKind::Ramsey, 1, 10), generate(FixtureKind::Ramsey, 2, 10));
    }

    #[test]
    fn tables_reject_duplicates_and_fall_back() {
        let t = Table::new(vec![Record { x: 1u64, t_converge: 2, value: 5u64 }], 0).unwrap();
        assert_eq!(t.get(&1), (2, 5));
        assert_eq!(t.get(&7), (0, 0));
        let dup = vec![Record { x: 1u64, t_converge: 2, value: 5u64 }, Record { x: 1, t_converge: 0, value: 1 }];
        assert!(Table::new(dup, 0).is_err());
    }

    #[test]
    fn bit_strings_round_trip() {
        assert_eq!(bit_string(&bits("0110").unwrap()), "0110");
        assert!(bits("012").is_err());
    }
}
