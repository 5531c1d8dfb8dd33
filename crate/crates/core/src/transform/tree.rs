//! Punctual copy of an oracle-given binary tree with the same paths.
//!
//! `ρ ∉ T̂` iff at stage `|ρ|` the oracle has already reported some prefix
//! `σ ⪯ ρ` to be outside `T`. Membership of `ρ` costs `|ρ| + 1` oracle steps.

use crate::clock::{FuelMeter, Step, StepOracle};
use crate::error::OutOfFuel;

use super::{BinaryTree, FueledTree};

/// Tree oracle answers: `Done(1)` member, `Done(0)` non-member.
#[derive(Debug, Clone)]
pub struct PunctualTree<O> {
    oracle: O,
}

pub fn tree_punctualize<O: StepOracle<[u8]>>(oracle: O) -> PunctualTree<O> {
    PunctualTree { oracle }
}

impl<O: StepOracle<[u8]>> FueledTree for PunctualTree<O> {
    fn member_fueled(&self, s: &[u8], fuel: &mut FuelMeter) -> Result<bool, OutOfFuel> {
        let t = s.len() as u64;
        for k in 0..=s.len() {
            if fuel.ask(&self.oracle, &s[..k], t)? == Step::Done(0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl<O: StepOracle<[u8]>> BinaryTree for PunctualTree<O> {
    fn member(&self, s: &[u8]) -> bool {
        self.member_fueled(s, &mut FuelMeter::unlimited()).expect("unlimited meter")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{certify_punctual, Budget, Delayed};
    use crate::transform::{extendible, strings_of_len};

    #[test]
    fn instant_full_tree_admits_everything() {
        let t = tree_punctualize(Delayed::<[u8]>::instant("full", |_| 1));
        for n in 0..=8 {
            assert!(strings_of_len(n).all(|s| t.member(&s)));
        }
    }

    #[test]
    fn single_path_tree_with_length_delays() {
        let o = Delayed::<[u8]>::new("zeros", |s| (s.len() as u64, u64::from(s.iter().all(|&b| b == 0))));
        let t = tree_punctualize(o);
        for n in 0..=12 {
            for s in strings_of_len(n) {
                let on_path = s.iter().all(|&b| b == 0);
                assert_eq!(extendible(&t, &s, 12), on_path, "{s:?}");
            }
        }
    }

    #[test]
    fn late_rejection_prunes_from_that_length_on() {
        // "1" is rejected, but only at stage 5
        let o = Delayed::<[u8]>::new("late", |s| if s.first() == Some(&1) { (5, 0) } else { (0, 1) });
        let t = tree_punctualize(o);
        for n in 1..5 {
            assert!(strings_of_len(n).filter(|s| s[0] == 1).all(|s| t.member(&s)));
        }
        for n in 5..9 {
            assert!(strings_of_len(n).filter(|s| s[0] == 1).all(|s| !t.member(&s)));
        }
        assert!(!extendible(&t, &[1], 5));
        assert!(extendible(&t, &[0], 9));
    }

    #[test]
    fn membership_stream_certifies() {
        let o = Delayed::<[u8]>::new("d", |s| (3 * s.len() as u64, u64::from(s.len() < 2 || s[1] == 0)));
        let t = tree_punctualize(o);
        let cert = certify_punctual(&mut t.membership_stream(), 1000, Budget::default()).unwrap();
        assert_eq!(cert.outputs[0], true);
        assert!(cert.max_fuel() <= 2 * 10 + 2);
    }
}
