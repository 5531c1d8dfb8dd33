//! A point meeting a finite family of dense open sets, built one value per
//! stage, with the local-delay property.
//!
//! Requirements are handled in order: `Dense(n)` copies the earliest listed
//! ball of `V_n` that is comparable with the current prefix, and `Escape(j)`
//! pads with the filler value until an operator computation on the prefix
//! disagrees with its target function. While a requirement is pending the
//! solver emits the filler; if a block `[ℓ(i), ℓ(i+1) − 1]` of the delay
//! schedule starts while pending, the whole block is filler.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{comparable, Ball, OpenSetLog};

/// Strictly increasing block boundaries `ℓ(0) < ℓ(1) < …`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DelaySchedule {
    /// `ℓ(i) = base^i`.
    Geometric { base: u64 },
    /// `ℓ(i) = start + step · i`.
    Arithmetic { start: u64, step: u64 },
    Table(Vec<u64>),
}

impl DelaySchedule {
    /// Parses `geometric:B`, `arithmetic:S` (start 0), `arithmetic:A,S` or `table:a,b,…`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad delay schedule {s:?}"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<u64> = args.split(',').map(|a| a.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        let sched = match (kind, nums.as_slice()) {
            ("geometric", [b]) => DelaySchedule::Geometric { base: *b },
            ("arithmetic", [step]) => DelaySchedule::Arithmetic { start: 0, step: *step },
            ("arithmetic", [start, step]) => DelaySchedule::Arithmetic { start: *start, step: *step },
            ("table", t) => DelaySchedule::Table(t.to_vec()),
            _ => return Err(bad()),
        };
        sched.validate()?;
        Ok(sched)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            DelaySchedule::Geometric { base } => *base >= 2,
            DelaySchedule::Arithmetic { step, .. } => *step >= 1,
            DelaySchedule::Table(t) => !t.is_empty() && t.windows(2).all(|w| w[0] < w[1]),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInstance(format!("delay schedule {self:?} is not strictly increasing")))
        }
    }

    pub fn ell(&self, i: u64) -> Option<u64> {
        match self {
            DelaySchedule::Geometric { base } => base.checked_pow(u32::try_from(i).ok()?),
            DelaySchedule::Arithmetic { start, step } => start.checked_add(step.checked_mul(i)?),
            DelaySchedule::Table(t) => t.get(i as usize).copied(),
        }
    }

    /// Blocks `[ℓ(i), ℓ(i+1) − 1]` lying inside `[0, horizon)`.
    pub fn blocks(&self, horizon: u64) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut i = 0;
        while let (Some(a), Some(b)) = (self.ell(i), self.ell(i + 1)) {
            if b > horizon {
                break;
            }
            out.push((a, b - 1));
            i += 1;
        }
        out
    }
}

/// Requirement that the point defeat an operator against a target function.
pub struct Escape {
    /// `op(ρ, i)`: the operator's value at `i` with oracle prefix `ρ`, or
    /// `None` if the computation reads past `ρ`.
    pub op: Box<dyn Fn(&[u64], u64) -> Option<u64> + Send + Sync>,
    pub g: Box<dyn Fn(u64) -> u64 + Send + Sync>,
}

/// Least `(n, i)` in the order "inputs first, then padding" with
/// `op(σ⌢mⁿ, i)` defined and different from `g(i)`, searching `n, i ≤ bound`.
pub fn dominate_escape(
    op: &dyn Fn(&[u64], u64) -> Option<u64>,
    g: &dyn Fn(u64) -> u64,
    sigma: &[u64],
    m: u64,
    bound: u64,
) -> Result<(u64, u64)> {
    let mut rho = sigma.to_vec();
    for i in 0..=bound {
        rho.truncate(sigma.len());
        for n in 0..=bound {
            if n > 0 {
                rho.push(m);
            }
            if let Some(v) = op(&rho, i) {
                if v != g(i) {
                    return Ok((n, i));
                }
                // the value at i is settled by the use principle
                break;
            }
        }
    }
    Err(Error::promise(format!("no escape with n, i ≤ {bound}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Requirement {
    Dense(usize),
    Escape(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BctSolution {
    pub h: Vec<u64>,
    /// Each requirement with the stage by which the prefix of `h` settled it.
    pub met: Vec<(Requirement, u64)>,
    /// Blocks that started while a requirement was pending; `h` is the filler there.
    pub pending_blocks: Vec<(u64, u64)>,
    pub filler: u64,
}

/// Builds `h` for `horizon` stages. At stage `t` only balls listed by stage
/// `t` are visible. Requirements alternate `Dense(0), Escape(0), Dense(1), …`.
pub fn bct_solve(opens: &[OpenSetLog], schedule: &DelaySchedule, escapes: &[Escape], horizon: u64) -> Result<BctSolution> {
    schedule.validate()?;
    let filler = 0;
    let mut reqs: VecDeque<Requirement> = VecDeque::new();
    for k in 0..opens.len().max(escapes.len()) {
        if k < opens.len() {
            reqs.push_back(Requirement::Dense(k));
        }
        if k < escapes.len() {
            reqs.push_back(Requirement::Escape(k));
        }
    }
    let mut h: Vec<u64> = Vec::with_capacity(horizon as usize);
    let mut met = Vec::new();
    let mut pending_blocks = Vec::new();
    let mut copying: Option<(Ball, Requirement)> = None;
    let mut pad_until = 0u64;
    let mut block = 0u64;
    // Dense search state: balls scanned so far and those still comparable.
    let mut scanned = 0usize;
    let mut candidates: Vec<Ball> = Vec::new();
    let mut escape_tried = false;

    for t in 0..horizon {
        let mut block_end = None;
        while let Some(start) = schedule.ell(block) {
            if start > t {
                break;
            }
            if start == t {
                block_end = schedule.ell(block + 1).map(|e| e - 1);
            }
            block += 1;
        }

        if copying.is_none() && t >= pad_until {
            while let Some(&r) = reqs.front() {
                match r {
                    Requirement::Dense(n) => {
                        let log = &opens[n];
                        let visible = log.balls.len().min(t as usize + 1);
                        for b in log.balls[scanned.min(visible)..visible].iter().flatten() {
                            candidates.push(b.clone());
                        }
                        scanned = visible;
                        candidates.retain(|b| comparable(b, &h));
                        match candidates.first() {
                            Some(b) if b.len() <= h.len() => {
                                met.push((r, t));
                            }
                            Some(b) => {
                                copying = Some((b.clone(), r));
                            }
                            None => break,
                        }
                    }
                    Requirement::Escape(j) => {
                        if escape_tried && block_end.is_none() {
                            break;
                        }
                        escape_tried = true;
                        let e = &escapes[j];
                        match dominate_escape(&*e.op, &*e.g, &h, filler, t) {
                            Ok((n, _)) => {
                                pad_until = t + n;
                                met.push((r, pad_until));
                            }
                            Err(_) => break,
                        }
                    }
                }
                reqs.pop_front();
                scanned = 0;
                candidates.clear();
                escape_tried = false;
                if copying.is_some() || t < pad_until {
                    break;
                }
            }
            if copying.is_none() && t >= pad_until && !reqs.is_empty() {
                if let Some(end) = block_end {
                    pending_blocks.push((t, end));
                    pad_until = end + 1;
                }
            }
        }

        let v = match &copying {
            Some((b, _)) => b[t as usize],
            None => filler,
        };
        h.push(v);
        if let Some((b, r)) = &copying {
            if h.len() == b.len() {
                met.push((*r, t));
                copying = None;
            }
        }
    }
    match reqs.front() {
        None => Ok(BctSolution { h, met, pending_blocks, filler }),
        Some(Requirement::Dense(n)) => Err(Error::DensityTimeout(*n)),
        Some(Requirement::Escape(j)) => Err(Error::promise(format!("escape {j} not found within {horizon} stages"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{Delayed, UniversalTable};
    use crate::diagonal::baire::run_pairs;

    fn whole(stages: usize) -> OpenSetLog {
        OpenSetLog { balls: (0..stages as u64).map(|j| Some(vec![j])).collect() }
    }

    #[test]
    fn schedules() {
        let g = DelaySchedule::parse("geometric:2").unwrap();
        assert_eq!(g.blocks(40), vec![(1, 1), (2, 3), (4, 7), (8, 15), (16, 31)]);
        assert_eq!(DelaySchedule::parse("arithmetic:3,5").unwrap().ell(2), Some(13));
        assert!(DelaySchedule::parse("table:1,1").is_err());
        assert!(DelaySchedule::parse("geometric:1").is_err());
        assert!(DelaySchedule::parse("cubic:2").is_err());
    }

    #[test]
    fn whole_spaces_give_the_filler_stream() {
        let opens = vec![whole(50); 3];
        let sol = bct_solve(&opens, &DelaySchedule::Geometric { base: 2 }, &[], 50).unwrap();
        assert!(sol.h.iter().all(|&v| v == 0));
        assert_eq!(sol.met.len(), 3);
    }

    #[test]
    fn escapes_from_constant_operator() {
        let r = dominate_escape(&|_, _| Some(0), &|i| u64::from(i == 0), &[], 0, 10).unwrap();
        assert_eq!(r, (0, 0));
    }

    #[test]
    fn escapes_from_running_max() {
        // op(ρ, i) = max ρ[0..=i]; g agrees except at 5
        let op = |rho: &[u64], i: u64| (rho.len() > i as usize).then(|| rho[..=i as usize].iter().copied().max().unwrap());
        let sigma = [3, 1];
        let g = move |i: u64| if i == 5 { 9 } else { 3 };
        let (n, i) = dominate_escape(&op, &g, &sigma, 2, 20).unwrap();
        assert_eq!((n, i), (4, 5));
        let mut rho = sigma.to_vec();
        rho.extend(std::iter::repeat_n(2, n as usize));
        assert_ne!(op(&rho, i), Some(g(i)));
        assert!(dominate_escape(&op, &|_| 3, &sigma, 2, 20).is_err());
    }

    #[test]
    fn solution_avoids_table_entries_and_pads_pending_blocks() {
        let fs: Vec<Delayed> = (0..4u64)
            .map(|e| Delayed::new(format!("f{e}"), move |&x| (3 * x + e, (x * (e + 2) + e) % 4)))
            .collect();
        let table = UniversalTable::from_delayed(fs.clone());
        let (logs, _) = run_pairs(&table, 3000);
        let sol = bct_solve(&logs, &DelaySchedule::Geometric { base: 2 }, &[], 3000).unwrap();
        for (n, log) in logs.iter().enumerate() {
            let stage = log.first_containing(|i| sol.h[i]).unwrap_or_else(|| panic!("h misses V_{n}"));
            assert!(log.balls[stage].as_ref().unwrap().len() < 32);
        }
        for (e, f) in fs.iter().enumerate() {
            assert!((0..32).any(|i| sol.h[i] != f.limit(&(i as u64))), "h agrees with f_{e}");
        }
        for &(a, b) in &sol.pending_blocks {
            assert!(sol.h[a as usize..=b as usize].iter().all(|&v| v == sol.filler));
        }
    }

    #[test]
    fn escape_requirements_are_met_by_padding() {
        let opens = vec![whole(400)];
        let esc = Escape {
            op: Box::new(|rho: &[u64], i: u64| (rho.len() > i as usize + 3).then(|| rho[i as usize + 3] + 1)),
            g: Box::new(|i| if i < 6 { 1 } else { 7 }),
        };
        let sol = bct_solve(&opens, &DelaySchedule::Arithmetic { start: 0, step: 4 }, &[esc], 400).unwrap();
        assert!(sol.met.iter().any(|(r, _)| *r == Requirement::Escape(0)));
        let ok = (0..20).any(|i| (sol.h.len() > i + 3) && sol.h[i + 3] + 1 != if i < 6 { 1 } else { 7 });
        assert!(ok);
    }

    #[test]
    fn empty_open_set_times_out() {
        let opens = vec![OpenSetLog { balls: vec![None; 20] }];
        let r = bct_solve(&opens, &DelaySchedule::Geometric { base: 2 }, &[], 20);
        assert!(matches!(r, Err(Error::DensityTimeout(0))));
    }
}
