//! `punctual`: batch front end. Each run ingests an instance (or a seeded
//! fixture), executes one scenario, audits it and writes a JSON report.

mod commands;
mod exit;
mod instance;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::diagonal::{Adversary, DiagonalOpts};
use commands::online::{Algo, OnlineOpts};
use commands::solve::{Problem as SolveProblem, SolveOpts};
use commands::structures::StructuresCmd;
use commands::transform::{Problem, TransformOpts};
use commands::Ctx;
use exit::{code_of, parse_error, Exit};
use instance::{generate, FixtureKind};
use report::{compare, Outcome, Report, Scenario};

/// Environment variable naming the golden-trace directory.
const GOLDEN_DIR: &str = "PUNCTUAL_GOLDEN_DIR";

#[derive(Debug, Parser)]
#[command(name = "punctual", version, about = "Certify, decode and audit step-budgeted instance transformations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Args)]
struct Global {
    /// JSONL instance file; a seeded fixture is generated when omitted.
    #[arg(long, global = true, visible_aliases = ["table", "opens", "predicate"])]
    instance: Option<PathBuf>,
    /// Stages to run; each command has its own default.
    #[arg(long, global = true)]
    horizon: Option<u64>,
    /// Budget constant C in C·(t+1)^K.
    #[arg(long, global = true)]
    budget_c: Option<u64>,
    /// Budget exponent K in C·(t+1)^K.
    #[arg(long, global = true)]
    budget_k: Option<u32>,
    /// Seed of generated fixtures and seeded builders [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report path; the report goes to stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run the audits (the default).
    #[arg(long, global = true, overrides_with = "no_audit")]
    audit: bool,
    /// Skip the audits.
    #[arg(long, global = true, overrides_with = "audit")]
    no_audit: bool,
}

#[derive(Debug, Clone, Subcommand)]
enum Cmd {
    /// Punctualize an oracle instance and decode its solutions.
    Transform {
        #[arg(value_enum)]
        problem: Problem,
        #[command(flatten)]
        opts: TransformOpts,
    },
    /// Run a diagonalization adversary against a table of delayed functions.
    Diagonal {
        #[arg(value_enum)]
        adversary: Adversary,
        #[command(flatten)]
        opts: DiagonalOpts,
    },
    /// Meet a sequence of listed dense open sets.
    Solve {
        #[arg(value_enum)]
        problem: SolveProblem,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Run an online graph or poset algorithm.
    Online {
        #[arg(value_enum)]
        algo: Algo,
        #[command(flatten)]
        opts: OnlineOpts,
    },
    /// Build, encode and decode presented structures.
    Structures {
        #[command(subcommand)]
        cmd: StructuresCmd,
    },
    /// Print a seeded instance as JSONL.
    Fixture {
        #[arg(value_enum)]
        kind: FixtureKind,
        /// Instance size; each kind has its own default.
        #[arg(long)]
        size: Option<usize>,
    },
    /// Re-execute a report's scenario and compare the deterministic sections.
    Replay {
        report: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code_of(&e))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Fixture { kind, size } => {
            let text = generate(*kind, g.seed.unwrap_or(0), size.unwrap_or(kind.default_size()));
            write_or_print(g.out.as_deref(), &text)?;
            Ok(exit::OK)
        }
        Cmd::Replay { report } => replay(report, g),
        _ => {
            // output-only flags are dropped so a replay never overwrites files
            let args: Vec<String> = std::env::args_os().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
            let argv = without_flag(&args, "--out");
            let cwd = std::env::current_dir().context("reading the working directory")?;
            let report = execute(&cli, argv, cwd, true)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            write_or_print(g.out.as_deref(), &text)?;
            if let Some(dir) = std::env::var_os(GOLDEN_DIR) {
                golden(Path::new(&dir), &report)?;
            }
            Ok(if report.all_passed() { exit::OK } else { exit::AUDIT })
        }
    }
}

/// `args` without any `flag VALUE` or `flag=VALUE` occurrence.
fn without_flag(args: &[String], flag: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < args.len() {
        if args[i] == flag {
            i += 2;
            continue;
        }
        if !args[i].starts_with(&format!("{flag}=")) {
            out.push(args[i].clone());
        }
        i += 1;
    }
    out
}

fn validate(g: &Global) -> Result<()> {
    if g.horizon == Some(0) {
        return Err(parse_error("--horizon must be at least 1"));
    }
    if g.budget_c == Some(0) || g.budget_k == Some(0) {
        return Err(parse_error("budget parameters must be positive"));
    }
    Ok(())
}

/// Runs the scenario. Side files are written only when `live`.
fn execute(cli: &Cli, argv: Vec<String>, cwd: PathBuf, live: bool) -> Result<Report> {
    let g = &cli.global;
    validate(g)?;
    let instance = match &g.instance {
        Some(p) => Some(instance::read(&cwd.join(p))?),
        None => None,
    };
    let ctx = Ctx { instance, horizon: g.horizon, budget_c: g.budget_c, budget_k: g.budget_k, seed: g.seed.unwrap_or(0), audit: !g.no_audit };
    let start = Instant::now();
    let outcome: Outcome = match &cli.cmd {
        Cmd::Transform { problem, opts } => commands::transform::run(*problem, opts, &ctx)?,
        Cmd::Diagonal { adversary, opts } => commands::diagonal::run(*adversary, opts, &ctx)?,
        Cmd::Solve { problem, opts } => commands::solve::run(*problem, opts, &ctx)?,
        Cmd::Online { algo, opts } => commands::online::run(*algo, opts, &ctx)?,
        Cmd::Structures { cmd } => commands::structures::run(cmd, &ctx)?,
        Cmd::Fixture { .. } | Cmd::Replay { .. } => unreachable!("handled before execution"),
    };
    let elapsed_ms = start.elapsed().as_millis() as u64;
    if live {
        for (path, text) in &outcome.emits {
            std::fs::write(cwd.join(path), text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let scenario = Scenario { argv, cwd, horizon: outcome.horizon, budget: outcome.budget, seed: ctx.seed, audit: ctx.audit };
    Ok(Report::new(scenario, &outcome, elapsed_ms))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Re-parses the recorded command line, optionally under a different seed.
fn replay(path: &Path, g: &Global) -> Result<u8> {
    let text = instance::read(path)?;
    let recorded: Report = serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))?;
    let mut argv = recorded.scenario.argv.clone();
    if let Some(seed) = g.seed {
        argv = without_flag(&argv, "--seed");
        argv.extend(["--seed".into(), seed.to_string()]);
    }
    let cli = Cli::try_parse_from(std::iter::once("punctual".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| parse_error(format!("recorded command line does not parse: {e}")))?;
    if matches!(cli.cmd, Cmd::Replay { .. } | Cmd::Fixture { .. }) {
        return Err(parse_error("the report does not record a scenario"));
    }
    let fresh = execute(&cli, argv, recorded.scenario.cwd.clone(), false)?;
    match compare(&recorded, &fresh) {
        None => {
            println!("match: {} stages", fresh.stages.len());
            Ok(exit::OK)
        }
        Some(d) => Err(Exit { code: exit::AUDIT, msg: format!("divergence: {d}") }.into()),
    }
}

/// Compares against the stored golden report, recording it on first use.
fn golden(dir: &Path, report: &Report) -> Result<()> {
    let name: String = report.scenario.argv.join("_").chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    let path = dir.join(format!("{name}.json"));
    if path.exists() {
        let golden: Report = serde_json::from_str(&instance::read(&path)?).with_context(|| format!("parsing golden {}", path.display()))?;
        if let Some(d) = compare(&golden, report) {
            return Err(Exit { code: exit::AUDIT, msg: format!("golden {} diverges: {d}", path.display()) }.into());
        }
    } else {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(&path, serde_json::to_string_pretty(report)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
