//! `punctual transform <problem>`: punctualize an oracle instance, certify it
//! under the budget, then decode brute-force solutions and audit them against
//! the oracle's limit.

use std::sync::Arc;

use anyhow::Result;
use punctual::clock::{Budget, Certificate, Delayed, PunctualStream};
use punctual::rat::{big_pow2_neg, big_to_wire, from_big, one, to_wire, zero, BigRat, Rat};
use punctual::transform::coh::{coh_decode, coh_punctualize};
use punctual::transform::heine_borel::heine_borel_punctualize;
use punctual::transform::interval::{covers, uncovered};
use punctual::transform::ivt::{ivt_punctualize, sign_changes_near, NEGATIVE};
use punctual::transform::ramsey::{ramsey_punctualize, ColoringInstance};
use punctual::transform::tree::tree_punctualize;
use punctual::transform::{cauchy::cauchy_punctualize, extendible, extendible_strings, strings_of_len, BinaryTree, Bits, FueledTree, Interval};
use serde_json::{json, Value};

use super::Ctx;
use crate::exit::parse_error;
use crate::instance::{bit_string, bits, rational, records, FixtureKind, Record, Table};
use crate::report::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Problem {
    Tree,
    Cauchy,
    Ramsey,
    Coh,
    Ivt,
    HeineBorel,
}

#[derive(Debug, Clone, clap::Args)]
pub struct TransformOpts {
    /// Level of the tree solutions that are decoded and audited.
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    /// Number of colours of a Ramsey instance.
    #[arg(long, default_value_t = 2)]
    pub colors: u64,
    /// Write the per-stage trace as JSONL records `{stage, output, fuel}`.
    #[arg(long)]
    pub emit: Option<std::path::PathBuf>,
}

/// Default horizon; every transformer is certified under the default budget.
pub const HORIZON: u64 = 200;

fn certified<S: PunctualStream>(s: &mut S, out: &mut Outcome, ctx: &Ctx) -> Result<Certificate<S::Item>> {
    ctx.certify(s, out, HORIZON, Budget::default())
}

fn record_stages<T>(out: &mut Outcome, cert: &Certificate<T>, opts: &TransformOpts, show: impl Fn(&T) -> Value) {
    super::record_stages(out, cert, opts.emit.as_ref(), show);
}

pub fn run(problem: Problem, opts: &TransformOpts, ctx: &Ctx) -> Result<Outcome> {
    match problem {
        Problem::Tree => tree(opts, ctx),
        Problem::Cauchy => cauchy(opts, ctx),
        Problem::Ramsey => ramsey(opts, ctx),
        Problem::Coh => coh(opts, ctx),
        Problem::Ivt => ivt(opts, ctx),
        Problem::HeineBorel => heine_borel(opts, ctx),
    }
}

fn tree(opts: &TransformOpts, ctx: &Ctx) -> Result<Outcome> {
    let rs: Vec<Record<String, bool>> = records(&ctx.text(FixtureKind::Tree))?;
    let rs = rs.into_iter().map(|r| Ok(Record { x: bits(&r.x)?, t_converge: r.t_converge, value: r.value })).collect::<Result<Vec<_>>>()?;
    let table = Arc::new(Table::new(rs, false)?);
    let tb = table.clone();
    let t = tree_punctualize(Delayed::<[u8]>::new("tree", move |s: &[u8]| {
        let (d, v) = tb.get(&s.to_vec());
        (d, u64::from(v))
    }));
    let mut out = Outcome::default();
    let cert = certified(&mut t.membership_stream(), &mut out, ctx)?;
    record_stages(&mut out, &cert, opts, |&b| json!(b));
    let reach = opts.depth + 2;
    let sols = extendible_strings(&t, opts.depth, reach);
    out.solution = json!({ "depth": opts.depth, "extendible": sols.iter().map(|s| bit_string(s)).collect::<Vec<_>>() });
    if ctx.audit {
        let limit = |s: &[u8]| table.get(&s.to_vec()).1;
        let bad = sols.iter().find(|s| !extendible(&limit, s, reach));
        out.audit("decoded strings extend in the oracle tree", bad.is_none(), bad.map_or(format!("{} strings", sols.len()), |s| bit_string(s)));
        let open = (1..=opts.depth).flat_map(strings_of_len).find(|s| t.member(s) && !t.member(&s[..s.len() - 1]));
        out.audit("punctual tree is prefix-closed", open.is_none(), open.map_or(String::new(), |s| bit_string(&s)));
    }
    Ok(out)
}

fn cauchy(opts: &TransformOpts, ctx: &Ctx) -> Result<Outcome> {
    let rs: Vec<Record<u64, String>> = records(&ctx.text(FixtureKind::Cauchy))?;
    let rs = rs.into_iter().map(|r| Ok(Record { x: r.x, t_converge: r.t_converge, value: bits(&r.value)? })).collect::<Result<Vec<_>>>()?;
    let n = rs.iter().map(|r| r.x + 1).max().unwrap_or(0);
    let table = Arc::new(Table::new(rs, Vec::new())?);
    let tb = table.clone();
    // unlisted ρ_j repeat the nearest listed string below them
    let mut s = cauchy_punctualize(Delayed::<u64, Bits>::new("rho", move |j| tb.floor(j).map_or((0, Vec::new()), |(_, (t, v))| (*t, v.clone()))));
    let mut out = Outcome::default();
    let cert = certified(&mut s, &mut out, ctx)?;
    record_stages(&mut out, &cert, opts, |b| json!(bit_string(b)));
    let last = cert.outputs.last().cloned().unwrap_or_default();
    out.solution = json!({ "latest": bit_string(&last) });
    if ctx.audit {
        // positions on which every listed ρ_j from the second half on agrees
        let rho = |j: u64| {
            let mut r = table.get(&j).1;
            r.resize(j as usize, 0);
            r
        };
        let settled: Vec<usize> = (0..(n / 2) as usize).filter(|&i| (n / 2..n).all(|j| rho(j)[i] == rho(n - 1)[i])).collect();
        let bad = settled.iter().find(|&&i| last.get(i).is_some_and(|&b| b != rho(n - 1)[i]));
        out.audit("settled positions carry the limit", bad.is_none(), format!("{} settled positions", settled.len()));
    }
    Ok(out)
}

fn ramsey(opts: &TransformOpts, ctx: &Ctx) -> Result<Outcome> {
    let rs: Vec<Record<[u64; 2], u64>> = records(&ctx.text(FixtureKind::Ramsey))?;
    if let Some(r) = rs.iter().find(|r| r.x[0] >= r.x[1] || r.value >= opts.colors) {
        return Err(parse_error(format!("record {:?} is not an increasing pair with a colour below {}", r.x, opts.colors)));
    }
    let table = Arc::new(Table::new(rs, 0)?);
    let tb = table.clone();
    let c = Delayed::<[u64]>::new("c", move |x: &[u64]| tb.get(&[x[0], x[1]]));
    let mut s = ramsey_punctualize(ColoringInstance::new(2, opts.colors, c)?);
    let mut out = Outcome::default();
    let cert = certified(&mut s, &mut out, ctx)?;
    record_stages(&mut out, &cert, opts, |p| json!(p));
    let h = out.horizon;
    let window: Vec<u64> = (h.saturating_sub(12)..h).collect();
    let mut decoded = Vec::new();
    for col in 0..opts.colors {
        // greedy maximal ĉ-homogeneous set of colour `col` on the window
        let mut y: Vec<u64> = Vec::new();
        for &b in &window {
            let mut fits = true;
            for &a in &y {
                fits &= s.c_hat(&[a, b])? == Some(col);
            }
            if fits {
                y.push(b);
            }
        }
        decoded.push((col, y.clone(), s.decode(&y)));
    }
    out.solution = json!({
        "p": s.p(),
        "homogeneous": decoded.iter().map(|(c, y, h)| json!({"color": c, "stages": y, "decoded": h})).collect::<Vec<_>>(),
    });
    if ctx.audit {
        for (col, _, h) in &decoded {
            let bad = h.iter().enumerate().flat_map(|(i, &a)| h[i + 1..].iter().map(move |&b| (a, b))).find(|&(a, b)| table.get(&[a, b]).1 != *col);
            out.audit(&format!("decoded set of colour {col} is homogeneous"), bad.is_none(), bad.map_or(format!("{} elements", h.len()), |p| format!("{p:?}")));
        }
    }
    Ok(out)
}

fn coh(opts: &TransformOpts, ctx: &Ctx) -> Result<Outcome> {
    let rs: Vec<Record<u64, String>> = records(&ctx.text(FixtureKind::Coh))?;
    let rs = rs.into_iter().map(|r| Ok(Record { x: r.x, t_converge: r.t_converge, value: bits(&r.value)? })).collect::<Result<Vec<_>>>()?;
    let table = Arc::new(Table::new(rs, Vec::new())?);
    let tb = table.clone();
    let mut s = coh_punctualize(Delayed::<u64, Bits>::new("rho", move |j| tb.get(j)));
    let mut out = Outcome::default();
    let cert = certified(&mut s, &mut out, ctx)?;
    record_stages(&mut out, &cert, opts, |st| json!({"sigma": bit_string(&st.sigma), "due": st.due}));
    let stages = &cert.outputs;
    let mut sols = Vec::new();
    for b in strings_of_len(2) {
        // stages along which the first two positions are constant
        let g_hat: Vec<u64> = (2..stages.len() as u64).filter(|&t| stages[t as usize].sigma.get(..2) == Some(&b[..])).collect();
        let g = coh_decode(stages, &g_hat);
        sols.push((b, g_hat.len(), g));
    }
    out.solution = json!(sols.iter().map(|(b, n, g)| json!({"pattern": bit_string(b), "stages": n, "decoded": g})).collect::<Vec<_>>());
    if ctx.audit {
        for (b, _, g) in &sols {
            let bad = g.iter().filter(|&&g| g >= 2).find(|&&g| {
                let mut r = table.get(&g).1;
                r.resize(2.max(r.len()), 0);
                r[..2] != b[..]
            });
            out.audit(&format!("decoded set follows pattern {}", bit_string(b)), bad.is_none(), bad.map_or(format!("{} elements", g.len()), |g| format!("ρ_{g}")));
        }
    }
    Ok(out)
}

fn ivt(opts: &TransformOpts, ctx: &Ctx) -> Result<Outcome> {
    let rs: Vec<Record<String, u64>> = records(&ctx.text(FixtureKind::Ivt))?;
    let rs = rs.into_iter().map(|r| Ok(Record { x: rational(&r.x)?, t_converge: r.t_converge, value: r.value })).collect::<Result<Vec<_>>>()?;
    let table = Arc::new(Table::new(rs, NEGATIVE)?);
    // unlisted points take the sign of the nearest listed point below them
    let sign = Delayed::<BigRat>::new("sign", move |q: &BigRat| match from_big(q) {
        Some(r) => match table.floor(&r) {
            Some((x, &(t, v))) if *x == r => (t, v),
            Some((_, &(_, v))) => (0, v),
            None => (0, NEGATIVE),
        },
        None => (0, NEGATIVE),
    });
    let mut s = ivt_punctualize(sign.clone())?;
    let mut out = Outcome::default();
    let cert = certified(&mut s, &mut out, ctx)?;
    record_stages(&mut out, &cert, opts, |st| json!({"probe": big_to_wire(&st.probe), "decided": st.decided}));
    let zero = s.presentation().bisect(24);
    out.solution = json!({ "zero": big_to_wire(&zero) });
    if ctx.audit {
        let eps = big_pow2_neg(10);
        out.audit("the zero is a sign change of X", sign_changes_near(&sign, &zero, &eps), "within 2^-10");
    }
    Ok(out)
}

fn heine_borel(opts: &TransformOpts, ctx: &Ctx) -> Result<Outcome> {
    let rs: Vec<Record<u64, Option<[String; 2]>>> = records(&ctx.text(FixtureKind::HeineBorel))?;
    let rs = rs
        .into_iter()
        .map(|r| {
            let value = r.value.map(|[lo, hi]| Ok::<_, anyhow::Error>(Interval::new(rational(&lo)?, rational(&hi)?))).transpose()?;
            Ok(Record { x: r.x, t_converge: r.t_converge, value })
        })
        .collect::<Result<Vec<_>>>()?;
    let listed: Vec<Interval> = rs.iter().filter_map(|r| r.value).collect();
    if covers(&listed, zero(), one()) {
        return Err(punctual::Error::PromiseViolation("the listed intervals cover [0, 1]".into()).into());
    }
    let table = Arc::new(Table::new(rs, None)?);
    let mut s = heine_borel_punctualize(Delayed::<u64, Option<Interval>>::new("cover", move |j| table.get(j)));
    let mut out = Outcome::default();
    let cert = certified(&mut s, &mut out, ctx)?;
    record_stages(&mut out, &cert, opts, |i| json!(i));
    let seen: Vec<Interval> = cert.outputs.iter().flatten().copied().collect();
    let gaps = uncovered(&seen, zero(), one());
    let wire = |r: &Rat| to_wire(r);
    out.solution = json!({ "uncovered": gaps.iter().map(|(a, b)| [wire(a), wire(b)]).collect::<Vec<_>>() });
    if ctx.audit {
        let mut prefix = Vec::new();
        let mut covered_at = None;
        for (t, i) in cert.outputs.iter().enumerate() {
            prefix.extend(i.iter().copied());
            if covered_at.is_none() && covers(&prefix, zero(), one()) {
                covered_at = Some(t);
            }
        }
        out.audit("no prefix covers [0, 1]", covered_at.is_none(), covered_at.map_or(String::new(), |t| format!("stage {t}")));
        let foreign = seen.iter().find(|i| !listed.contains(i));
        out.audit("every listed interval comes from the instance", foreign.is_none(), format!("{} intervals", seen.len()));
        // points missed by the whole instance are missed by the punctual cover
        let full = uncovered(&listed, zero(), one());
        let lost = full.iter().find(|(a, b)| !gaps.iter().any(|(c, d)| c <= a && b <= d));
        out.audit("instance gaps stay uncovered", lost.is_none(), lost.map_or(format!("{} gaps", full.len()), |(a, b)| format!("({}, {})", wire(a), wire(b))));
    }
    Ok(out)
}
