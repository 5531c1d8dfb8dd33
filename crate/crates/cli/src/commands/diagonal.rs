//! `punctual diagonal baire|baire-bounded|uc`: run an adversary against a
//! table of delayed functions and audit what it listed.

use std::path::PathBuf;

use anyhow::Result;
use punctual::clock::{Budget, Step, UniversalTable};
use punctual::diagonal::{baire_adversary, baire_bounded_adversary, density_profile, modulus_check, uc_adversary, OpenSetLog};
use punctual::diagonal::uc::ModulusVerdict;
use punctual::rat::big_pow2_neg;
use serde_json::{json, Value};

use super::{jsonl, Ctx};
use crate::exit::parse_error;
use crate::instance::FixtureKind;
use crate::report::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Adversary {
    Baire,
    BaireBounded,
    Uc,
}

#[derive(Debug, Clone, clap::Args)]
pub struct DiagonalOpts {
    /// Open sets per bound for `baire-bounded`.
    #[arg(long, default_value_t = 5)]
    pub ks: usize,
    /// Breakpoint rows `uc` lays down at least.
    #[arg(long, default_value_t = 8)]
    pub rows: u64,
    /// Write the listed open sets as JSONL `{balls}` records, one per set.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

/// Stages the Baire adversaries run by default.
pub const BAIRE_HORIZON: u64 = 1000;
/// Stages the continuity adversary runs by default before filling its rows.
pub const UC_HORIZON: u64 = 64;
/// Alphabet and string length of the density probes.
const PROBE_ALPHABET: u64 = 4;
const PROBE_LEN: usize = 3;

pub fn run(adv: Adversary, opts: &DiagonalOpts, ctx: &Ctx) -> Result<Outcome> {
    match adv {
        Adversary::Baire => baire(opts, ctx),
        Adversary::BaireBounded => bounded(opts, ctx),
        Adversary::Uc => uc(opts, ctx),
    }
}

/// `f_e(x)` if it ever converges.
fn limit(table: &UniversalTable, e: usize, x: u64) -> Option<u64> {
    table.lookup(e, x, u64::MAX).done()
}

fn ball_json(b: &Option<Vec<u64>>) -> Value {
    json!(b)
}

/// Runs each stream under the budget; stage `t` of the report lists every
/// stream's output and the fuel column holds the maximum over streams.
fn certify_all<S: punctual::PunctualStream>(streams: Vec<S>, out: &mut Outcome, ctx: &Ctx) -> Result<(Vec<Vec<S::Item>>, Vec<S>)> {
    let mut outputs = Vec::new();
    let mut done = Vec::new();
    let mut fuel: Vec<u64> = Vec::new();
    for mut s in streams {
        let cert = ctx.certify(&mut s, out, BAIRE_HORIZON, Budget::default())?;
        fuel.resize(fuel.len().max(cert.fuel.len()), 0);
        for (m, f) in fuel.iter_mut().zip(&cert.fuel) {
            *m = (*m).max(*f);
        }
        outputs.push(cert.outputs);
        done.push(s);
    }
    out.fuel = fuel;
    Ok((outputs, done))
}

fn table(ctx: &Ctx, kind: FixtureKind) -> Result<UniversalTable> {
    let t = UniversalTable::from_jsonl(&ctx.text(kind))?;
    if t.is_empty() {
        return Err(parse_error("the table has no entries"));
    }
    Ok(t)
}

fn baire(opts: &DiagonalOpts, ctx: &Ctx) -> Result<Outcome> {
    let table = table(ctx, FixtureKind::Table)?;
    let mut out = Outcome::default();
    let (outputs, pairs) = certify_all(baire_adversary(&table), &mut out, ctx)?;
    // log 2e + d is V_{2e+d}
    let mut logs = Vec::new();
    for run in &outputs {
        let mut sides = [OpenSetLog::default(), OpenSetLog::default()];
        for [a, b] in run {
            sides[0].balls.push(a.clone());
            sides[1].balls.push(b.clone());
        }
        logs.extend(sides);
    }
    out.stages = (0..out.fuel.len()).map(|t| json!(outputs.iter().map(|r| [ball_json(&r[t][0]), ball_json(&r[t][1])]).collect::<Vec<_>>())).collect();
    let sides: Vec<Option<usize>> = pairs.iter().map(|p| p.diagonal_side()).collect();
    if let Some(path) = &opts.emit {
        out.emits.push((path.clone(), jsonl(&logs)));
    }
    let profiles: Vec<std::result::Result<Vec<usize>, Vec<u64>>> = logs.iter().map(|l| density_profile(l, PROBE_ALPHABET, PROBE_LEN)).collect();
    out.solution = json!({
        "sets": logs.len(),
        "diagonal_side": sides,
        "density": profiles.iter().map(|p| p.as_ref().ok()).collect::<Vec<_>>(),
    });
    if ctx.audit {
        // f_e lies in no ball of the set carrying its diagonalization
        let mut caught = None;
        for (e, side) in sides.iter().enumerate() {
            let Some(d) = side else { continue };
            let hit = logs[2 * e + d].balls.iter().flatten().find(|b| b.iter().enumerate().all(|(i, &v)| limit(&table, e, i as u64) == Some(v)));
            if let Some(b) = hit {
                caught = Some(format!("f_{e} lies in {b:?}"));
                break;
            }
        }
        let chosen = sides.iter().flatten().count();
        out.audit("each f_e avoids its diagonal set", caught.is_none(), caught.unwrap_or(format!("{chosen} of {} pairs diagonalized", sides.len())));
        let sparse = profiles.iter().enumerate().find_map(|(n, p)| p.as_ref().err().map(|s| format!("V_{n} misses {s:?}")));
        out.audit("every set is dense on the probes", sparse.is_none(), sparse.unwrap_or(format!("strings of length ≤ {PROBE_LEN} over {PROBE_ALPHABET} letters")));
    }
    Ok(out)
}

fn bounded(opts: &DiagonalOpts, ctx: &Ctx) -> Result<Outcome> {
    let table = table(ctx, FixtureKind::Bounds)?;
    let ks = opts.ks;
    let mut out = Outcome::default();
    let (outputs, advs) = certify_all(baire_bounded_adversary(&table, ks), &mut out, ctx)?;
    // log n·ks + k is V_{n,k}
    let mut logs = vec![OpenSetLog::default(); outputs.len() * ks];
    for (n, run) in outputs.iter().enumerate() {
        for row in run {
            for (k, b) in row.iter().enumerate() {
                logs[n * ks + k].balls.push(b.clone());
            }
        }
    }
    out.stages = (0..out.fuel.len()).map(|t| json!(outputs.iter().map(|r| r[t].iter().map(ball_json).collect::<Vec<_>>()).collect::<Vec<_>>())).collect();
    let flags: Vec<Option<Vec<bool>>> = advs.iter().map(|a| a.surviving()).collect();
    if let Some(path) = &opts.emit {
        out.emits.push((path.clone(), jsonl(&logs)));
    }
    out.solution = json!({ "sets": logs.len(), "surviving": flags });
    if ctx.audit {
        // no short ball of a surviving set lies pointwise below f_n
        let mut inside = None;
        let mut audited = 0;
        'outer: for (n, f) in flags.iter().enumerate() {
            let Some(f) = f else { continue };
            for k in (0..ks).filter(|&k| f[k]) {
                audited += 1;
                let below = logs[n * ks + k].balls.iter().flatten().filter(|b| b.len() <= 10).find(|b| {
                    b.iter().enumerate().all(|(i, &v)| limit(&table, n, i as u64).is_some_and(|bound| v <= bound))
                });
                if let Some(b) = below {
                    inside = Some(format!("V_{n},{k} lists {b:?}"));
                    break 'outer;
                }
            }
        }
        out.audit("surviving sets exclude the bounded subspace", inside.is_none(), inside.unwrap_or(format!("{audited} surviving sets")));
    }
    Ok(out)
}

fn uc(opts: &DiagonalOpts, ctx: &Ctx) -> Result<Outcome> {
    let table = table(ctx, FixtureKind::Table)?;
    let g = table.entry(0).clone();
    let mut a = uc_adversary(g.clone());
    let horizon = ctx.horizon_or(UC_HORIZON);
    let mut out = Outcome { horizon, budget: ctx.budget_or(Budget::default()), ..Outcome::default() };
    // the construction is not metered; each stage makes one query of g
    let mut stages = Vec::new();
    while a.stage() < horizon || (a.rows().len() as u64) < opts.rows {
        a.step();
        stages.push(json!({"level": a.level(), "rows": a.rows().len()}));
    }
    out.fuel = vec![1; stages.len()];
    out.stages = stages;
    let rows = a.rows().to_vec();
    out.solution = json!({ "rows": rows });
    if ctx.audit {
        let gap = rows.iter().find(|r| r.gap != big_pow2_neg(r.i - 1));
        out.audit("row i jumps by 2^-(i-1)", gap.is_none(), gap.map_or(format!("{} rows", rows.len()), |r| format!("row {}", r.i)));
        let wide = rows.iter().find(|r| !(r.m > r.g && &r.x - &r.z == big_pow2_neg(r.m) && &r.w - &r.y == big_pow2_neg(r.m)));
        out.audit("both pairs of row i are closer than 2^-g(i)", wide.is_none(), wide.map_or(String::new(), |r| format!("row {}", r.i)));
        let gi = |i: u64| match g.eval(&i, u64::MAX) {
            Step::Done(v) => v,
            Step::NotYet => u64::MAX,
        };
        let verdict = modulus_check(&rows, gi);
        out.audit("g is refuted as a modulus", verdict != ModulusVerdict::Accepted, format!("{verdict:?}"));
    }
    Ok(out)
}
