//! Padding transformer for cohesiveness instances `ρ_j ∈ 2^j`.
//!
//! One oracle step per stage: if `ρ_j` (the next uncomputed string) converges
//! at stage `t`, then `σ_t` is `ρ_j` padded to length `t` and is due to `j`;
//! otherwise `σ_t` extends `σ_{t−1}` by a zero and is due to the same string.

use serde::{Deserialize, Serialize};

use crate::clock::{FuelMeter, PunctualStream, Step, StepOracle};
use crate::error::OutOfFuel;

use super::Bits;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohStage {
    pub sigma: Bits,
    pub due: u64,
}

#[derive(Debug, Clone)]
pub struct CohStream<O> {
    oracle: O,
    t: u64,
    next: u64,
    prev: CohStage,
}

pub fn coh_punctualize<O: StepOracle<u64, Bits>>(oracle: O) -> CohStream<O> {
    CohStream { oracle, t: 0, next: 0, prev: CohStage { sigma: Vec::new(), due: 0 } }
}

impl<O: StepOracle<u64, Bits>> PunctualStream for CohStream<O> {
    type Item = CohStage;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> Result<CohStage, OutOfFuel> {
        let t = self.t;
        fuel.charge(t)?;
        let out = match fuel.ask(&self.oracle, &self.next, t)? {
            Step::Done(mut rho) => {
                let j = self.next;
                rho.resize(j as usize, 0);
                rho.resize(t as usize, 0);
                self.next += 1;
                CohStage { sigma: rho, due: j }
            }
            Step::NotYet => {
                let mut sigma = self.prev.sigma.clone();
                sigma.resize(t as usize, 0);
                CohStage { sigma, due: self.prev.due }
            }
        };
        self.prev = out.clone();
        self.t += 1;
        Ok(out)
    }

    fn stage(&self) -> u64 {
        self.t
    }
}

/// Maps a solution `Ĝ = {j_i}` of `σ` to `G = {due(j_i)}` (sorted, without
/// repeats). Needs the whole `due` log, so it is not budgeted.
pub fn coh_decode(stages: &[CohStage], g_hat: &[u64]) -> Vec<u64> {
    let mut g: Vec<u64> = g_hat.iter().map(|&j| stages[j as usize].due).collect();
    g.sort_unstable();
    g.dedup();
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{run_unbudgeted, Delayed};

    fn rho(j: u64) -> Bits {
        (0..j).map(|x| ((j >> (x % 5)) & 1) as u8).collect()
    }

    #[test]
    fn instant_instance_is_due_to_every_index() {
        let mut s = coh_punctualize(Delayed::<u64, Bits>::instant("r", |&j| rho(j)));
        let out = run_unbudgeted(&mut s, 64);
        for (t, st) in out.iter().enumerate() {
            assert_eq!(st.due, t as u64);
            assert_eq!(st.sigma, rho(t as u64));
        }
    }

    #[test]
    fn delayed_instance_keeps_extensions() {
        let mut s = coh_punctualize(Delayed::<u64, Bits>::new("r", |&j| (4 * j, rho(j))));
        let out = run_unbudgeted(&mut s, 128);
        for t in 1..out.len() {
            assert!(out[t].due >= out[t - 1].due);
        }
        for (t, st) in out.iter().enumerate() {
            assert_eq!(st.sigma.len(), t);
            let r = rho(st.due);
            assert_eq!(&st.sigma[..r.len()], &r[..]);
        }
        // ρ_1 arrives at stage 4 and ρ_2 at stage 8
        assert_eq!(coh_decode(&out, &[0, 1, 2, 3, 8, 9]), vec![0, 2]);
    }
}
