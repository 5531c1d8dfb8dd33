//! `punctual structures build|encode|decode`: presented structures, coding
//! presentations of planted predicates, and decoding through isomorphisms.

use std::cell::RefCell;
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Result;
use punctual::clock::Budget;
use punctual::structures::ba::{audit_axioms, audit_splits, AlgebraStream, D};
use punctual::structures::dlo::OrderStream;
use punctual::structures::rg::{audit_extension, decode_nodes, decode_starts, embed, GraphStream};
use punctual::structures::{
    ba_build, ba_decode, ba_encode, dlo_build, dlo_build_seeded, dlo_decode, dlo_encode, rg_build, rg_decode, rg_encode, BooleanAlgebra, Graph, LinearOrder,
    PartialIso, Predicate,
};
use punctual::Error;
use serde_json::json;

use super::{jsonl, lift, record_stages, Ctx};
use crate::exit::parse_error;
use crate::instance::{planted_delays, read, records, FixtureKind, IsoPair};
use crate::report::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Dlo,
    Rg,
    Ba,
}

#[derive(Debug, Clone, clap::Subcommand)]
pub enum StructuresCmd {
    /// Build the standard presentation and audit its axioms on a prefix.
    Build {
        #[arg(value_enum)]
        kind: Kind,
        /// Elements revealed.
        #[arg(long, default_value_t = 64)]
        prefix: u64,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Build the presentation coding a planted predicate `ψ(k, y) ⇔ y ≥ d_k`.
    Encode {
        #[arg(value_enum)]
        kind: Kind,
        /// Elements revealed; defaults to 64, or 3000 for `rg`.
        #[arg(long)]
        prefix: Option<u64>,
        /// Element `d` of the built algebra whose pieces are matched below `D`.
        #[arg(long, default_value_t = 2)]
        d_pre: u64,
        /// Write a finite isomorphism table from the built structure to the coding one.
        #[arg(long)]
        emit_iso: Option<PathBuf>,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Decode the planted predicate's witnesses through an isomorphism table.
    Decode {
        #[arg(value_enum)]
        kind: Kind,
        /// JSONL `{from, to}` pairs, built structure to coding structure.
        #[arg(long)]
        iso: PathBuf,
        #[arg(long, default_value_t = 2)]
        d_pre: u64,
    },
}

/// Declared per-stage budgets of the builder streams.
pub const ORDER_BUDGET: Budget = Budget { c: 2, k: 1 };
pub const GRAPH_BUDGET: Budget = Budget { c: 2, k: 1 };
pub const ALGEBRA_BUDGET: Budget = Budget { c: 3, k: 1 };
pub const ENCODER_BUDGET: Budget = Budget { c: 4, k: 1 };
/// Stage horizon of the order coder.
const DLO_CODE_HORIZON: u32 = 60;
/// Cell levels of the algebra coder.
const BA_CODE_LEVELS: usize = 40;
/// Back-and-forth steps behind an emitted order isomorphism table.
const DLO_ISO_STEPS: u64 = 64;

pub fn run(cmd: &StructuresCmd, ctx: &Ctx) -> Result<Outcome> {
    match cmd {
        StructuresCmd::Build { kind, prefix, emit } => build(*kind, *prefix, emit.as_ref(), ctx),
        StructuresCmd::Encode { kind, prefix, d_pre, emit_iso, emit } => encode(*kind, *prefix, *d_pre, emit_iso.as_ref(), emit.as_ref(), ctx),
        StructuresCmd::Decode { kind, iso, d_pre } => decode(*kind, iso, *d_pre, ctx),
    }
}

fn build(kind: Kind, prefix: u64, emit: Option<&PathBuf>, ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let n = prefix.min(24);
    match kind {
        Kind::Dlo => {
            let a = dlo_build_seeded(ctx.seed);
            let cert = ctx.certify(&mut OrderStream::new(a), &mut out, prefix, ORDER_BUDGET)?;
            let ranks = lift(&cert.outputs)?;
            record_stages(&mut out, &cert, emit, |r| json!(r.as_ref().ok()));
            out.solution = json!({ "ranks": ranks });
            if ctx.audit {
                out.audit("the order is strict and total", order_fault(&a, n)?.is_none(), format!("on {n} elements"));
                let mut bad = None;
                'pairs: for x in 0..n {
                    for y in 0..n {
                        if a.less(x, y)? {
                            let (c, d, e) = a.skolem(x, y)?;
                            if !(a.less(c, x)? && a.less(x, d)? && a.less(d, y)? && a.less(y, e)?) {
                                bad = Some((x, y));
                                break 'pairs;
                            }
                        }
                    }
                }
                out.audit("Skolem witnesses lie below, between and above", bad.is_none(), bad.map_or(String::new(), |p| format!("{p:?}")));
            }
        }
        Kind::Rg => {
            let g = rg_build();
            let cert = ctx.certify(&mut GraphStream::new(g), &mut out, prefix, GRAPH_BUDGET)?;
            let nbrs = lift(&cert.outputs)?;
            record_stages(&mut out, &cert, emit, |r| json!(r.as_ref().ok()));
            out.solution = json!({ "earlier_neighbours": nbrs });
            if ctx.audit {
                let bad = audit_extension(&g, prefix.min(6), 3, 200)?;
                out.audit("extension demands on the prefix have witnesses", bad.is_none(), bad.map_or("|X ∪ Y| ≤ 3".into(), |p| format!("{p:?}")));
            }
        }
        Kind::Ba => {
            let b = ba_build();
            let cert = ctx.certify(&mut AlgebraStream::new(b.clone()), &mut out, prefix, ALGEBRA_BUDGET)?;
            let rows = lift(&cert.outputs)?;
            record_stages(&mut out, &cert, emit, |r| json!(r.as_ref().ok()));
            out.solution = json!({ "negations": rows.iter().map(|r| r.neg).collect::<Vec<_>>() });
            if ctx.audit {
                let bad = audit_axioms(&b, n)?;
                out.audit("Boolean algebra axioms hold", bad.is_none(), bad.map_or(format!("on {n} elements"), |t| format!("{t:?}")));
                let bad = audit_splits(&b, n)?;
                out.audit("Skolem splits are disjoint and nonzero", bad.is_none(), bad.map_or(String::new(), |x| format!("{x}")));
            }
        }
    }
    Ok(out)
}

/// A pair or triple on `0..n` breaking irreflexivity, totality or transitivity.
fn order_fault(o: &dyn LinearOrder, n: u64) -> Result<Option<(u64, u64, u64)>> {
    for x in 0..n {
        for y in 0..n {
            let (xy, yx) = (o.less(x, y)?, o.less(y, x)?);
            if (x == y && xy) || (x != y && xy == yx) {
                return Ok(Some((x, y, y)));
            }
            for z in 0..n {
                if xy && o.less(y, z)? && !o.less(x, z)? {
                    return Ok(Some((x, y, z)));
                }
            }
        }
    }
    Ok(None)
}

fn planted(ctx: &Ctx) -> Result<(Vec<u64>, Predicate)> {
    let d = planted_delays(&ctx.text(FixtureKind::Predicate))?;
    if d.is_empty() {
        return Err(parse_error("the predicate file lists no k"));
    }
    let dd = d.clone();
    Ok((d, Arc::new(move |k, y| y >= dd.get(k as usize).copied().unwrap_or(0))))
}

fn missing(x: u64) -> Error {
    Error::HorizonExceeded(format!("the isomorphism table has no entry for {x}"))
}

fn lookup(table: &HashMap<u64, u64>) -> impl FnMut(u64) -> punctual::Result<u64> + '_ {
    move |x| table.get(&x).copied().ok_or_else(|| missing(x))
}

fn encode(kind: Kind, prefix: Option<u64>, d_pre: u64, emit_iso: Option<&PathBuf>, emit: Option<&PathBuf>, ctx: &Ctx) -> Result<Outcome> {
    let (delays, psi) = planted(ctx)?;
    let mut out = Outcome::default();
    let iso: Vec<IsoPair>;
    match kind {
        Kind::Dlo => {
            let b = dlo_encode(psi.clone(), DLO_CODE_HORIZON)?;
            let cert = ctx.certify(&mut OrderStream::new(b.clone()), &mut out, prefix.unwrap_or(64), ORDER_BUDGET)?;
            let ranks = lift(&cert.outputs)?;
            record_stages(&mut out, &cert, emit, |r| json!(r.as_ref().ok()));
            let a = dlo_build();
            let p = RefCell::new(PartialIso::new(&b, &a)?);
            for x in 0..DLO_ISO_STEPS {
                p.borrow_mut().forth(x)?;
                p.borrow_mut().back(x)?;
            }
            // run the decoder live once so the table answers every query it makes
            dlo_decode(&*psi, &mut |x| p.borrow_mut().forth(x), &mut |y| p.borrow_mut().back(y), delays.len() as u64)?;
            let p = p.into_inner();
            iso = p.pairs().iter().map(|&(x, y)| IsoPair { from: y, to: x }).collect();
            out.solution = json!({ "ranks": ranks, "iso_pairs": iso.len() });
            if ctx.audit {
                let mut bad = None;
                for p in &iso {
                    for q in &iso {
                        if a.less(p.from, q.from)? != b.less(p.to, q.to)? {
                            bad = Some((p.from, q.from));
                        }
                    }
                }
                out.audit("the table preserves the order", bad.is_none(), bad.map_or(format!("{} pairs", iso.len()), |p| format!("{p:?}")));
            }
        }
        Kind::Rg => {
            let mut b = rg_encode(psi.clone());
            let cert = ctx.certify(&mut b, &mut out, prefix.unwrap_or(3000), ENCODER_BUDGET)?;
            record_stages(&mut out, &cert, emit, |r| json!(r));
            let a = rg_build();
            let domain = decode_nodes(*decode_starts(&delays).last().expect("non-empty"));
            let img = embed(&a, &domain, &b, out.horizon)?.ok_or_else(|| Error::HorizonExceeded(format!("no embedding below node {}", out.horizon)))?;
            iso = domain.iter().zip(&img).map(|(&from, &to)| IsoPair { from, to }).collect();
            out.solution = json!({ "phases": b.phases(), "iso_pairs": iso.len() });
            if ctx.audit {
                let mut bad = None;
                for (i, p) in iso.iter().enumerate() {
                    for q in &iso[i + 1..] {
                        if a.adjacent(p.from, q.from)? != b.adjacent(p.to, q.to)? {
                            bad = Some((p.from, q.from));
                        }
                    }
                }
                out.audit("the table preserves adjacency", bad.is_none(), bad.map_or(format!("{} pairs", iso.len()), |p| format!("{p:?}")));
            }
        }
        Kind::Ba => {
            let b = ba_encode(psi.clone(), BA_CODE_LEVELS);
            let cert = ctx.certify(&mut AlgebraStream::new(b.clone()), &mut out, prefix.unwrap_or(64), ALGEBRA_BUDGET)?;
            let rows = lift(&cert.outputs)?;
            record_stages(&mut out, &cert, emit, |r| json!(r.as_ref().ok()));
            let a = ba_build();
            let m = delays.len();
            let src = a.partition(d_pre, m + 1)?;
            let mut dst = b.partition(D, m + 1)?;
            dst.reverse();
            iso = src.iter().zip(&dst).map(|(&from, &to)| IsoPair { from, to }).collect();
            out.solution = json!({ "negations": rows.iter().map(|r| r.neg).collect::<Vec<_>>(), "ell": b.ell(), "iso_pairs": iso.len() });
            if ctx.audit {
                let mut bad = None;
                for (i, p) in iso.iter().enumerate() {
                    let fits = p.from != 0 && p.to != 0 && a.below(p.from, d_pre)? && b.below(p.to, D)?;
                    let disjoint = iso[i + 1..].iter().map(|q| Ok(a.meet(p.from, q.from)? == 0 && b.meet(p.to, q.to)? == 0)).collect::<punctual::Result<Vec<bool>>>()?;
                    if !fits || disjoint.contains(&false) {
                        bad = Some(p.from);
                    }
                }
                out.audit("matched pieces are disjoint, nonzero and below d", bad.is_none(), bad.map_or(format!("{} pieces", iso.len()), |x| format!("piece {x}")));
            }
        }
    }
    if let Some(path) = emit_iso {
        out.emits.push((path.clone(), jsonl(&iso)));
    }
    if ctx.audit {
        let table: HashMap<u64, u64> = iso.iter().map(|p| (p.from, p.to)).collect();
        let back: HashMap<u64, u64> = iso.iter().map(|p| (p.to, p.from)).collect();
        let f = decode_with(kind, &*psi, &table, &back, d_pre, delays.len())?;
        out.audit("decoding through the table recovers the planted witnesses", f == delays, format!("{f:?}"));
    }
    Ok(out)
}

fn decode_with(kind: Kind, psi: &dyn Fn(u64, u64) -> bool, table: &HashMap<u64, u64>, back: &HashMap<u64, u64>, d_pre: u64, n: usize) -> punctual::Result<Vec<u64>> {
    match kind {
        Kind::Dlo => {
            // h runs from the coding order to the built one
            dlo_decode(psi, &mut lookup(back), &mut lookup(table), n as u64)
        }
        Kind::Rg => rg_decode(psi, &mut lookup(table), n as u64),
        Kind::Ba => ba_decode(psi, d_pre, &mut lookup(table), n),
    }
}

fn decode(kind: Kind, iso: &PathBuf, d_pre: u64, ctx: &Ctx) -> Result<Outcome> {
    let (delays, psi) = planted(ctx)?;
    let pairs: Vec<IsoPair> = records(&read(iso)?)?;
    let table: HashMap<u64, u64> = pairs.iter().map(|p| (p.from, p.to)).collect();
    let back: HashMap<u64, u64> = pairs.iter().map(|p| (p.to, p.from)).collect();
    if table.len() != pairs.len() || back.len() != pairs.len() {
        return Err(parse_error("the isomorphism table is not injective"));
    }
    let f = decode_with(kind, &*psi, &table, &back, d_pre, delays.len())?;
    let mut out = Outcome { horizon: f.len() as u64, budget: ctx.budget_or(Budget::default()), ..Outcome::default() };
    out.stages = f.iter().map(|v| json!(v)).collect();
    out.solution = json!({ "f": f });
    if ctx.audit {
        let wrong = f.iter().enumerate().find(|&(k, &y)| !psi(k as u64, y));
        out.audit("ψ(k, f(k)) holds for every k", wrong.is_none(), wrong.map_or(format!("{} values", f.len()), |(k, y)| format!("ψ({k}, {y}) fails")));
        let early = f.iter().enumerate().find(|&(k, &y)| (0..y).any(|z| psi(k as u64, z)));
        out.audit("each f(k) is the least witness", early.is_none(), early.map_or(String::new(), |(k, y)| format!("f({k}) = {y}")));
    }
    Ok(out)
}
