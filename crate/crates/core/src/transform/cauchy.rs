//! Padding transformer for sequences of strings `ρ_n ∈ 2^n` with a limit.
//!
//! At stage `t` the stream catches up on as many `ρ_j` (with `j ≤ t`) as have
//! converged by stage `t`, then emits the latest known `ρ_j` padded with zeros
//! to length `t`. Every position settled in `ρ` is eventually settled in `σ`.

use crate::clock::{FuelMeter, PunctualStream, Step, StepOracle};
use crate::error::OutOfFuel;

use super::Bits;

#[derive(Debug, Clone)]
pub struct CauchyStream<O> {
    oracle: O,
    t: u64,
    next: u64,
    last: Bits,
}

/// `oracle(n)` yields `ρ_n`; strings of the wrong length are cut or zero-padded to `n`.
pub fn cauchy_punctualize<O: StepOracle<u64, Bits>>(oracle: O) -> CauchyStream<O> {
    CauchyStream { oracle, t: 0, next: 0, last: Vec::new() }
}

impl<O> CauchyStream<O> {
    /// Index of the latest `ρ_j` behind the most recent output.
    pub fn known(&self) -> Option<u64> {
        self.next.checked_sub(1)
    }
}

impl<O: StepOracle<u64, Bits>> PunctualStream for CauchyStream<O> {
    type Item = Bits;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> Result<Bits, OutOfFuel> {
        let t = self.t;
        while self.next <= t {
            match fuel.ask(&self.oracle, &self.next, t)? {
                Step::Done(mut s) => {
                    s.resize(self.next as usize, 0);
                    self.last = s;
                    self.next += 1;
                }
                Step::NotYet => break,
            }
        }
        fuel.charge(t)?;
        let mut out = self.last.clone();
        out.resize(t as usize, 0);
        self.t += 1;
        Ok(out)
    }

    fn stage(&self) -> u64 {
        self.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{certify_punctual, run_unbudgeted, Budget, Delayed};

    #[test]
    fn instant_zeros_pass_through() {
        let mut s = cauchy_punctualize(Delayed::<u64, Bits>::instant("0", |&n| vec![0; n as usize]));
        for (n, out) in run_unbudgeted(&mut s, 20).into_iter().enumerate() {
            assert_eq!(out, vec![0; n]);
        }
    }

    #[test]
    fn delayed_ones_settle() {
        let mut s = cauchy_punctualize(Delayed::<u64, Bits>::new("1", |&n| (3 * n, vec![1; n as usize])));
        let outs = run_unbudgeted(&mut s, 128);
        for (t, out) in outs.iter().enumerate() {
            assert_eq!(out.len(), t);
        }
        let settled = outs.iter().position(|o| o.len() >= 16 && o[..16].iter().all(|&b| b == 1)).unwrap();
        assert!(outs[settled..].iter().all(|o| o[..16].iter().all(|&b| b == 1)));
        assert_eq!(settled, 48);
    }

    #[test]
    fn certifies_at_horizon_1000() {
        let mut s = cauchy_punctualize(Delayed::<u64, Bits>::new("d", |&n| (n + n % 7, vec![1; n as usize])));
        let cert = certify_punctual(&mut s, 1000, Budget::default()).unwrap();
        assert_eq!(cert.outputs[999].len(), 999);
    }
}
