//! `punctual online <algo>`: run an online algorithm on a revealed graph or
//! poset, certify it under its declared budget and audit the result.

use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Result;
use punctual::clock::{run_unbudgeted, Budget, FixtureRecord};
use punctual::online::components::{audit_equivalence, PlantedCoding, ReachBound};
use punctual::online::hall::{audit_matching, hall_finite_counted};
use punctual::online::reorient::{self, is_transitive};
use punctual::online::rival_sands::{self, SetCode};
use punctual::online::schmerl::{audit_coloring, Backtracking};
use punctual::online::szpilrajn::is_linear_extension;
use punctual::online::{
    audit_honest, connected_components, hall_extended, rival_sands as rival_sands_stream, schmerl_color, szpilrajn_extend, AdjGraph, Bipartite, HonestGraph,
    PredicateGraph, Reveal,
};
use serde_json::json;

use super::{lift, record_stages, Ctx};
use crate::exit::parse_error;
use crate::instance::{records, reveals, FileBipartite, FixtureKind, HallRecord};
use crate::report::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Algo {
    Szpilrajn,
    Reorient,
    Schmerl,
    RivalSands,
    HallExtended,
    HallFinite,
    Components,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Code {
    Binary,
    Bound,
}

#[derive(Debug, Clone, clap::Args)]
pub struct OnlineOpts {
    /// `n` for Schmerl colouring; it uses at most `2n − 1` colours.
    #[arg(long, default_value_t = 2)]
    pub colors: u32,
    /// Finite-set code of the Rival–Sands output.
    #[arg(long, value_enum, default_value_t = Code::Binary)]
    pub code: Code,
    /// Extended Hall witness `h(n) = n − slack`.
    #[arg(long, default_value_t = 1)]
    pub slack: u64,
    /// Component representatives.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub reps: Vec<u64>,
    /// Path searches from `v` stay below `max(v, reach)`; defaults to the graph size.
    #[arg(long)]
    pub reach: Option<u64>,
    /// Write the per-stage trace as JSONL records `{stage, output, fuel}`.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

/// Declared per-stage budgets.
pub const SZPILRAJN_BUDGET: Budget = Budget { c: 2, k: 1 };
pub const SCHMERL_BUDGET: Budget = Budget { c: 5_000, k: 1 };
/// Rival–Sands stages by default; output codes grow quickly.
pub const RIVAL_SANDS_HORIZON: u64 = 40;

pub fn run(algo: Algo, opts: &OnlineOpts, ctx: &Ctx) -> Result<Outcome> {
    match algo {
        Algo::Szpilrajn => szpilrajn(opts, ctx),
        Algo::Reorient => reorientation(opts, ctx),
        Algo::Schmerl => schmerl(opts, ctx),
        Algo::RivalSands => rival(opts, ctx),
        Algo::HallExtended => hall_ext(opts, ctx),
        Algo::HallFinite => hall_fin(opts, ctx),
        Algo::Components => components(opts, ctx),
    }
}

fn replay_audit<T: PartialEq>(out: &mut Outcome, first: &[T], again: Vec<T>) {
    let same = first == again.as_slice();
    out.audit("a second run replays identically", same, format!("{} stages", first.len()));
}

fn stages_of(reveals: &[Reveal]) -> u64 {
    (reveals.len() as u64).max(1)
}

fn szpilrajn(opts: &OnlineOpts, ctx: &Ctx) -> Result<Outcome> {
    let rs = reveals(&ctx.text(FixtureKind::Poset))?;
    let mut s = szpilrajn_extend(&rs)?;
    let mut out = Outcome::default();
    let cert = ctx.certify(&mut s, &mut out, stages_of(&rs), SZPILRAJN_BUDGET)?;
    record_stages(&mut out, &cert, opts.emit.as_ref(), |p| json!(p));
    let order = s.order().to_vec();
    out.solution = json!({ "order": order });
    if ctx.audit {
        let complete = order.len() == rs.len();
        out.audit("the order is a linear extension", complete && is_linear_extension(&rs, &order), format!("{} of {} elements placed", order.len(), rs.len()));
        let again = run_unbudgeted(&mut szpilrajn_extend(&rs)?, out.horizon);
        replay_audit(&mut out, &cert.outputs, again);
    }
    Ok(out)
}

fn reorientation(opts: &OnlineOpts, ctx: &Ctx) -> Result<Outcome> {
    let rs = reveals(&ctx.text(FixtureKind::PseudoTransitive))?;
    let mut s = reorient::reorient(&rs)?;
    let mut out = Outcome::default();
    let cert = ctx.certify(&mut s, &mut out, stages_of(&rs), reorient::BUDGET)?;
    let outputs = lift(&cert.outputs)?;
    record_stages(&mut out, &cert, opts.emit.as_ref(), |o| json!(o.as_ref().ok()));
    let mut arcs = Vec::new();
    let mut broken = None;
    for (t, o) in outputs.iter().enumerate() {
        arcs.extend(o.iter().flatten().copied());
        if broken.is_none() && !is_transitive(rs.len(), &arcs) {
            broken = Some(t);
        }
    }
    out.solution = json!({ "arcs": arcs });
    if ctx.audit {
        out.audit("every stage's orientation is transitive", broken.is_none(), broken.map_or(format!("{} arcs", arcs.len()), |t| format!("stage {t}")));
        let revealed: usize = rs.iter().take(outputs.len()).map(|r| r.from_prior.len() + r.to_prior.len()).sum();
        out.audit("every revealed edge is oriented once", arcs.len() == revealed, format!("{} arcs for {revealed} edges", arcs.len()));
        let again = run_unbudgeted(&mut reorient::reorient(&rs)?, out.horizon);
        replay_audit(&mut out, &cert.outputs, again);
    }
    Ok(out)
}

fn honest_graph(ctx: &Ctx, kind: FixtureKind) -> Result<(AdjGraph, u64)> {
    let rs = reveals(&ctx.text(kind))?;
    let g = AdjGraph::from_reveals(&rs)?;
    let n = g.len() as u64;
    audit_honest(&g, n)?;
    Ok((g, n))
}

fn schmerl(opts: &OnlineOpts, ctx: &Ctx) -> Result<Outcome> {
    let (g, n) = honest_graph(ctx, FixtureKind::Bipartite)?;
    let oracle = Arc::new(Backtracking::new());
    let mut s = schmerl_color(&g, opts.colors, oracle.clone())?;
    let mut out = Outcome::default();
    let cert = ctx.certify(&mut s, &mut out, n.max(1), SCHMERL_BUDGET)?;
    lift(&cert.outputs)?;
    record_stages(&mut out, &cert, opts.emit.as_ref(), |o| json!(o.as_ref().ok()));
    let colors = s.colors().clone();
    out.solution = json!({ "colors": colors });
    if ctx.audit {
        let clash = audit_coloring(&g, &colors, n);
        out.audit("the colouring is proper", clash.is_none(), clash.map_or(format!("{} vertices", colors.len()), |e| format!("edge {e:?}")));
        let most = 2 * opts.colors - 1;
        let over = colors.iter().find(|(_, &c)| !(1..=most).contains(&c));
        out.audit(&format!("at most {most} colours"), over.is_none(), over.map_or(String::new(), |(v, c)| format!("vertex {v} has colour {c}")));
        let again = run_unbudgeted(&mut schmerl_color(&g, opts.colors, oracle)?, out.horizon);
        replay_audit(&mut out, &cert.outputs, again);
    }
    Ok(out)
}

fn rival(opts: &OnlineOpts, ctx: &Ctx) -> Result<Outcome> {
    let (g, n) = honest_graph(ctx, FixtureKind::LocalGraph)?;
    let code = match opts.code {
        Code::Binary => SetCode::Binary,
        Code::Bound => SetCode::Bound,
    };
    let mut s = rival_sands_stream(&g, code);
    let mut out = Outcome::default();
    let cert = ctx.certify(&mut s, &mut out, RIVAL_SANDS_HORIZON, rival_sands::BUDGET)?;
    // a member whose code outgrows the cap ends the run; earlier members stand
    let h: Vec<_> = cert.outputs.iter().map_while(|o| o.as_ref().ok().cloned()).collect();
    let stopped = cert.outputs.iter().find_map(|o| o.as_ref().err().map(|e| e.to_string()));
    record_stages(&mut out, &cert, opts.emit.as_ref(), |o| json!(o.as_ref().ok().map(|v| v.to_string())));
    out.solution = json!({ "h": h.iter().map(|v| v.to_string()).collect::<Vec<_>>(), "stopped": stopped });
    if ctx.audit {
        let increasing = h.len() >= 2 && h.windows(2).all(|w| w[0] < w[1]);
        out.audit("h is strictly increasing", increasing, format!("{} elements", h.len()));
        let bad = rival_sands::audit(&g, &h, n);
        out.audit("no neighbourhood meets h twice", bad.is_none(), bad.map_or(format!("{n} vertices"), |v| format!("N({v})")));
        let again = run_unbudgeted(&mut rival_sands_stream(&g, code), out.horizon);
        replay_audit(&mut out, &cert.outputs, again);
    }
    Ok(out)
}

fn bipartite(ctx: &Ctx) -> Result<FileBipartite> {
    let rs: Vec<HallRecord> = records(&ctx.text(FixtureKind::Ladder))?;
    FileBipartite::from_records(rs)
}

fn hall_ext(opts: &OnlineOpts, ctx: &Ctx) -> Result<Outcome> {
    let g = bipartite(ctx)?;
    let slack = opts.slack;
    let h = move |n: u64| n.saturating_sub(slack);
    let mut s = hall_extended(&g, &h)?;
    let mut out = Outcome::default();
    let cert = ctx.certify(&mut s, &mut out, (g.len() as u64).max(1), Budget::default())?;
    if out.horizon > g.len() as u64 {
        return Err(parse_error(format!("horizon {} exceeds the {} listed left vertices", out.horizon, g.len())));
    }
    let pairs = lift(&cert.outputs)?;
    record_stages(&mut out, &cert, opts.emit.as_ref(), |o| json!(o.as_ref().ok()));
    out.solution = json!({ "matching": pairs });
    if ctx.audit {
        out.audit("the matching is injective and uses edges", audit_matching(&g, &pairs), format!("{} pairs", pairs.len()));
        let again = run_unbudgeted(&mut hall_extended(&g, &h)?, out.horizon);
        replay_audit(&mut out, &cert.outputs, again);
    }
    Ok(out)
}

fn hall_fin(_: &OnlineOpts, ctx: &Ctx) -> Result<Outcome> {
    let g = bipartite(ctx)?;
    let (pairs, work) = hall_finite_counted(g.lefts(), |a| g.left_nbrs(a));
    let pairs = pairs?;
    // a single offline computation: one stage per matched pair, no fuel column
    let mut out = Outcome { horizon: pairs.len() as u64, budget: ctx.budget_or(Budget::default()), ..Outcome::default() };
    out.stages = pairs.iter().map(|p| json!(p)).collect();
    out.solution = json!({ "matching": pairs, "work": work });
    if ctx.audit {
        out.audit("the matching is injective and uses edges", audit_matching(&g, &pairs), format!("{} pairs", pairs.len()));
        out.audit("every left vertex is matched", pairs.len() == g.len(), format!("{} of {}", pairs.len(), g.len()));
    }
    Ok(out)
}

/// Components of a finite revealed graph, by breadth-first search.
fn bfs_labels(g: &AdjGraph) -> Vec<usize> {
    let n = g.len();
    let mut label = vec![usize::MAX; n];
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = s;
        let mut queue = VecDeque::from([s as u64]);
        while let Some(v) = queue.pop_front() {
            for u in g.nbhd(v) {
                if label[u as usize] == usize::MAX {
                    label[u as usize] = s;
                    queue.push_back(u);
                }
            }
        }
    }
    label
}

fn components(opts: &OnlineOpts, ctx: &Ctx) -> Result<Outcome> {
    let text = ctx.text(FixtureKind::Planted);
    // reveal records describe a finite graph; anything else is a planted coding
    let graph_file = text.lines().find(|l| !l.trim().is_empty()).is_some_and(|l| l.contains("\"vertex\""));
    let mut out = Outcome::default();
    if graph_file {
        let rs = reveals(&text)?;
        let g = Arc::new(AdjGraph::from_reveals(&rs)?);
        let n = g.len() as u64;
        let reach = opts.reach.unwrap_or(n);
        if let Some(&r) = opts.reps.iter().find(|&&r| r >= n) {
            return Err(parse_error(format!("representative {r} is not a vertex")));
        }
        let adj = g.clone();
        let map = connected_components(PredicateGraph::new(move |u, v| adj.adjacent(u, v)), &opts.reps, ReachBound::explicit(move |_| reach))?;
        let cert = ctx.certify(&mut map.stream(), &mut out, n.max(1), Budget::default())?;
        let reps = lift(&cert.outputs)?;
        record_stages(&mut out, &cert, opts.emit.as_ref(), |o| json!(o.as_ref().ok()));
        out.solution = json!({ "chosen": map.chosen(), "rep": reps });
        if ctx.audit {
            let label = bfs_labels(&g);
            let wrong = reps.iter().enumerate().find(|&(v, &r)| label[v] != label[r as usize]);
            out.audit("each vertex maps into its own component", wrong.is_none(), wrong.map_or(format!("{} vertices", reps.len()), |(v, r)| format!("{v} ↦ {r}")));
            out.audit("f is an equivalence", audit_equivalence(&map, n.min(40))?, format!("on {} vertices", n.min(40)));
            let again = run_unbudgeted(&mut map.stream(), out.horizon);
            replay_audit(&mut out, &cert.outputs, again);
        }
    } else {
        let rs: Vec<FixtureRecord> = records(&text)?;
        let size = rs.iter().map(|r| r.x + 1).max().unwrap_or(0) as usize;
        let (mut truth, mut delay) = (vec![false; size], vec![0; size]);
        for r in &rs {
            truth[r.x as usize] = r.value == 1;
            delay[r.x as usize] = r.t_converge;
        }
        let p = PlantedCoding { truth: truth.clone(), delay };
        let map = connected_components(p.graph(), &[PlantedCoding::A, PlantedCoding::B], p.reach_bound())?;
        let cert = ctx.certify(&mut map.stream(), &mut out, 60, Budget::default())?;
        record_stages(&mut out, &cert, opts.emit.as_ref(), |o| json!(o.as_ref().ok()));
        let decoded = (0..size as u64).map(|n| PlantedCoding::decode(&map, n)).collect::<punctual::Result<Vec<bool>>>()?;
        out.solution = json!({ "chosen": map.chosen(), "decoded": decoded });
        if ctx.audit {
            let wrong = decoded.iter().zip(&truth).position(|(a, b)| a != b);
            out.audit("the planted set decodes", wrong.is_none(), wrong.map_or(format!("{size} bits"), |n| format!("bit {n}")));
            out.audit("f is an equivalence", audit_equivalence(&map, 40)?, "on 40 vertices");
            let again = run_unbudgeted(&mut map.stream(), out.horizon);
            replay_audit(&mut out, &cert.outputs, again);
        }
    }
    Ok(out)
}
