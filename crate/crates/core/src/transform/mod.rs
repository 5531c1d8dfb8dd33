//! Punctualization transformers. Each turns a step-oracle instance of a
//! problem into a budgeted instance of the same problem, together with a
//! decoder that maps solutions back.
//!
//! Also here: the Δ⁰₁-to-tree coding, leftmost paths through pruned trees,
//! the Heine–Borel/WKL reductions and Baer-type coding.

pub mod baer;
pub mod cauchy;
pub mod coh;
pub mod heine_borel;
pub mod interval;
pub mod ivt;
pub mod ramsey;
pub mod tree;
pub mod wkl;

pub use interval::{Interval, IntervalCover};

use crate::clock::{FuelMeter, PunctualStream};
use crate::error::OutOfFuel;

/// Finite binary string, one bit per byte.
pub type Bits = Vec<u8>;

/// The `i`-th binary string in length-lexicographic order: ε, 0, 1, 00, 01, …
pub fn string_at(i: u64) -> Bits {
    let len = 63 - (i + 1).leading_zeros();
    let k = (i + 1) - (1u64 << len);
    (0..len).rev().map(|b| ((k >> b) & 1) as u8).collect()
}

/// Inverse of [`string_at`].
pub fn index_of(s: &[u8]) -> u64 {
    let k = s.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
    (1u64 << s.len()) - 1 + k
}

/// All strings of length `n` in lexicographic order.
pub fn strings_of_len(n: usize) -> impl Iterator<Item = Bits> {
    (0..1u64 << n).map(move |k| (0..n).rev().map(|b| ((k >> b) & 1) as u8).collect())
}

/// Membership-coded binary tree.
pub trait BinaryTree: Sync {
    fn member(&self, s: &[u8]) -> bool;
}

impl<F: Fn(&[u8]) -> bool + Sync> BinaryTree for F {
    fn member(&self, s: &[u8]) -> bool {
        self(s)
    }
}

/// Tree whose membership test pays for its own work.
pub trait FueledTree: BinaryTree {
    fn member_fueled(&self, s: &[u8], fuel: &mut FuelMeter) -> Result<bool, OutOfFuel>;

    /// Membership of the `t`-th string in length-lexicographic order, one per stage.
    fn membership_stream(&self) -> MembershipStream<'_, Self> {
        MembershipStream { tree: self, t: 0 }
    }
}

pub struct MembershipStream<'a, T: ?Sized> {
    tree: &'a T,
    t: u64,
}

impl<T: FueledTree + ?Sized> PunctualStream for MembershipStream<'_, T> {
    type Item = bool;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> Result<bool, OutOfFuel> {
        let s = string_at(self.t);
        fuel.charge(s.len() as u64)?;
        let v = self.tree.member_fueled(&s, fuel)?;
        self.t += 1;
        Ok(v)
    }

    fn stage(&self) -> u64 {
        self.t
    }
}

/// Whether `s` has an extension of length `depth` inside `tree`.
pub fn extendible<T: BinaryTree + ?Sized>(tree: &T, s: &[u8], depth: usize) -> bool {
    if !tree.member(s) {
        return false;
    }
    if s.len() >= depth {
        return true;
    }
    let mut child = s.to_vec();
    child.push(0);
    if extendible(tree, &child, depth) {
        return true;
    }
    *child.last_mut().expect("pushed") = 1;
    extendible(tree, &child, depth)
}

/// Strings of length `len` that extend to length `depth` inside `tree`.
pub fn extendible_strings<T: BinaryTree + ?Sized>(tree: &T, len: usize, depth: usize) -> Vec<Bits> {
    fn walk<T: BinaryTree + ?Sized>(tree: &T, s: &mut Bits, len: usize, depth: usize, out: &mut Vec<Bits>) {
        if !tree.member(s) {
            return;
        }
        if s.len() == len {
            if extendible(tree, s, depth) {
                out.push(s.clone());
            }
            return;
        }
        for b in 0..2 {
            s.push(b);
            walk(tree, s, len, depth, out);
            s.pop();
        }
    }
    let mut out = Vec::new();
    walk(tree, &mut Vec::new(), len, depth, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_lex_order() {
        let got: Vec<Bits> = (0..7).map(string_at).collect();
        assert_eq!(got, vec![vec![], vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        for i in 0..500 {
            assert_eq!(index_of(&string_at(i)), i);
        }
    }

    #[test]
    fn extendibility_in_a_single_path_tree() {
        let zeros = |s: &[u8]| s.iter().all(|&b| b == 0);
        assert!(extendible(&zeros, &[0, 0], 10));
        assert!(!extendible(&zeros, &[0, 1], 10));
        assert_eq!(extendible_strings(&zeros, 3, 6), vec![vec![0, 0, 0]]);
    }
}
