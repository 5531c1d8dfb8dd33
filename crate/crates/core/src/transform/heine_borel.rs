//! Padding transformer for Heine–Borel instances.
//!
//! One oracle step per stage: `Î_t = I_j` when the next unlisted interval
//! `I_j` has converged by stage `t`, and the empty interval otherwise. The
//! nonempty part of `Î` is `I` in order, so unions and every prefix
//! non-covering property carry over.

use crate::clock::{FuelMeter, PunctualStream, Step, StepOracle};
use crate::error::OutOfFuel;

use super::Interval;

#[derive(Debug, Clone)]
pub struct HeineBorelStream<O> {
    oracle: O,
    t: u64,
    next: u64,
    source: Vec<Option<u64>>,
}

pub fn heine_borel_punctualize<O: StepOracle<u64, Option<Interval>>>(oracle: O) -> HeineBorelStream<O> {
    HeineBorelStream { oracle, t: 0, next: 0, source: Vec::new() }
}

impl<O> HeineBorelStream<O> {
    /// For each emitted stage, the index `j` of the copied `I_j` (`None` for filler).
    pub fn source(&self) -> &[Option<u64>] {
        &self.source
    }
}

impl<O: StepOracle<u64, Option<Interval>>> PunctualStream for HeineBorelStream<O> {
    type Item = Option<Interval>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> Result<Option<Interval>, OutOfFuel> {
        let t = self.t;
        let out = match fuel.ask(&self.oracle, &self.next, t)? {
            Step::Done(iv) => {
                self.source.push(Some(self.next));
                self.next += 1;
                iv
            }
            Step::NotYet => {
                self.source.push(None);
                None
            }
        };
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
    use crate::rat::{dyadic, Rat};
    use crate::transform::interval::{covers, uncovered};

    fn instance(j: u64) -> Option<Interval> {
        // Intervals of width 1/16 around (2j+1)/64, skipping every third.
        (j % 3 != 2 && j < 32).then(|| Interval::new(dyadic(2 * j as i128 - 1, 6), dyadic(2 * j as i128 + 3, 6)))
    }

    fn on_grid(ivs: &[Option<Interval>]) -> Vec<bool> {
        (0..=1024).map(|k| ivs.iter().flatten().any(|iv| iv.contains(dyadic(k, 10)))).collect()
    }

    #[test]
    fn instant_instance_is_copied() {
        let mut s = heine_borel_punctualize(Delayed::<u64, Option<Interval>>::instant("i", |&j| instance(j)));
        let out = run_unbudgeted(&mut s, 40);
        assert_eq!(out, (0..40).map(instance).collect::<Vec<_>>());
    }

    #[test]
    fn delayed_instance_has_the_same_union() {
        let o = Delayed::<u64, Option<Interval>>::new("i", |&j| (3 * j + j % 5, instance(j)));
        let mut s = heine_borel_punctualize(o);
        let out = run_unbudgeted(&mut s, 512);
        let want: Vec<_> = (0..512).map(instance).collect();
        assert_eq!(on_grid(&out), on_grid(&want));
        for t in 0..=512 {
            assert!(!covers(out[..t].iter().flatten(), Rat::from_integer(0), Rat::from_integer(1)));
        }
    }

    #[test]
    fn all_empty_stays_empty() {
        let mut s = heine_borel_punctualize(Delayed::<u64, Option<Interval>>::new("e", |&j| (j * j, None)));
        let out = run_unbudgeted(&mut s, 64);
        assert!(out.iter().all(Option::is_none));
        let free = uncovered(out.iter().flatten(), Rat::from_integer(0), Rat::from_integer(1));
        assert_eq!(free, vec![(Rat::from_integer(0), Rat::from_integer(1))]);
    }

    #[test]
    fn certifies_at_horizon_1000() {
        let o = Delayed::<u64, Option<Interval>>::new("i", |&j| (j * j, instance(j)));
        let cert = certify_punctual(&mut heine_borel_punctualize(o), 1000, Budget::default()).unwrap();
        assert_eq!(cert.max_fuel(), 1);
    }
}
