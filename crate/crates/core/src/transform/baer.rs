//! Coding a set `S` into a rank-1 torsion-free abelian group.
//!
//! `G_S ⊆ ℚ` is generated by `1` and the `1/p_i` for `i ∈ S`, so the prime
//! `p_i` divides `1` in `G_S` exactly when `i ∈ S`, and `p_i²` never does.
//! The divisibility set of any nonzero element recovers `S` up to finitely
//! many primes.

use crate::error::{Error, Result};
use crate::finset::{nth_prime, unpair};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaerGroup {
    s: Vec<bool>,
}

/// `s[i]` says whether `i ∈ S`; indices past the end are outside `S`.
pub fn baer_encode(s: &[bool]) -> BaerGroup {
    BaerGroup { s: s.to_vec() }
}

impl BaerGroup {
    pub fn set(&self) -> &[bool] {
        &self.s
    }

    /// Whether `q ∈ G_S`: its denominator is a squarefree product of primes `p_i`, `i ∈ S`.
    pub fn contains(&self, q: Rat) -> bool {
        let mut d = *q.denom();
        for (i, &inside) in self.s.iter().enumerate() {
            if d == 1 {
                break;
            }
            let p = i128::from(nth_prime(i));
            if d % p == 0 {
                d /= p;
                if !inside || d % p == 0 {
                    return false;
                }
            }
        }
        d == 1
    }

    /// Whether `m` divides `g` inside `G_S`.
    pub fn divides(&self, m: u64, g: Rat) -> bool {
        m != 0 && self.contains(g / Rat::from_integer(i128::from(m)))
    }

    /// Surjective enumeration `ℕ → G_S`: `n = ⟨z, mask⟩` gives `zigzag(z) / ∏_{i ∈ mask ∩ S} p_i`.
    pub fn element(&self, n: u64) -> Rat {
        let (z, mask) = unpair(n);
        let a = if z % 2 == 0 { (z / 2) as i128 } else { -(z.div_ceil(2) as i128) };
        let d = (0..self.s.len().min(64))
            .filter(|&i| self.s[i] && (mask >> i) & 1 == 1)
            .fold(1i128, |acc, i| acc * i128::from(nth_prime(i)));
        Rat::new(a, d)
    }
}

/// `{m ≤ horizon : m | g in G}`.
pub fn baer_decode(g: &BaerGroup, x: Rat, horizon: u64) -> Result<Vec<u64>> {
    if x == Rat::from_integer(0) {
        return Err(Error::ZeroElement);
    }
    Ok((1..=horizon).filter(|&m| g.divides(m, x)).collect())
}

/// Indices `i < n` with `p_i` in a decoded divisibility set.
pub fn prime_indices(type_set: &[u64], n: usize) -> Vec<usize> {
    (0..n).filter(|&i| type_set.contains(&nth_prime(i))).collect()
}
