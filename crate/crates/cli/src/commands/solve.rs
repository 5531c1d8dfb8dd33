//! `punctual solve bct`: build a point meeting every listed dense open set.

use anyhow::Result;
use punctual::clock::{Budget, UniversalTable};
use punctual::diagonal::bct::Requirement;
use punctual::diagonal::{bct_solve, run_pairs, DelaySchedule, OpenSetLog};
use serde_json::json;

use super::Ctx;
use crate::instance::{generate, records, FixtureKind};
use crate::report::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Problem {
    Bct,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SolveOpts {
    /// Block schedule: `geometric:B`, `arithmetic:[A,]S` or `table:a,b,…`.
    #[arg(long, default_value = "geometric:2")]
    pub delay: String,
}

pub const HORIZON: u64 = 2000;
/// Table entries behind the open sets generated when `--opens` is absent.
const GENERATED_ENTRIES: usize = 8;

pub fn run(_: Problem, opts: &SolveOpts, ctx: &Ctx) -> Result<Outcome> {
    let sched = DelaySchedule::parse(&opts.delay)?;
    let horizon = ctx.horizon_or(HORIZON);
    let opens: Vec<OpenSetLog> = match &ctx.instance {
        Some(text) => records(text)?,
        None => {
            let table = UniversalTable::from_jsonl(&generate(FixtureKind::Table, ctx.seed, GENERATED_ENTRIES))?;
            run_pairs(&table, horizon).0
        }
    };
    let sol = bct_solve(&opens, &sched, &[], horizon)?;
    // the solver is not metered; stage t fixes h(t)
    let mut out = Outcome { horizon, budget: ctx.budget_or(Budget::default()), ..Outcome::default() };
    out.stages = sol.h.iter().map(|v| json!(v)).collect();
    out.solution = json!({
        "met": sol.met,
        "pending_blocks": sol.pending_blocks,
        "filler": sol.filler,
    });
    if ctx.audit {
        let uneven = sol.pending_blocks.iter().find(|&&(a, b)| sol.h.get(a as usize..=b as usize).is_some_and(|s| s.iter().any(|&v| v != sol.filler)));
        out.audit("pending blocks hold the filler", uneven.is_none(), uneven.map_or(format!("{} blocks", sol.pending_blocks.len()), |b| format!("{b:?}")));
        let h = |i: usize| sol.h.get(i).copied().unwrap_or(u64::MAX);
        let claimed: Vec<usize> = sol.met.iter().filter_map(|(r, _)| if let Requirement::Dense(n) = r { Some(*n) } else { None }).collect();
        let missed = claimed.iter().find(|&&n| opens[n].first_containing(h).is_none());
        out.audit("met sets contain h", missed.is_none(), missed.map_or(format!("{} of {} sets met", claimed.len(), opens.len()), |n| format!("V_{n}")));
    }
    Ok(out)
}
