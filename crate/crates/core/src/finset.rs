//! Finite sets in two interchangeable forms: a bounded characteristic vector
//! and a prime-exponent code.
//!
//! `code(a_0, …, a_n) = p_0^{a_0+1} ⋯ p_n^{a_n+1}`; the codes form the set `CT`.
//! A set `{b_0 < … < b_k}` is coded by the tuple of its characteristic vector
//! up to `b_k`, so every non-empty set has a code in `CT` and the empty set has none.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn prime_cache() -> &'static Mutex<Vec<u64>> {
    static CACHE: OnceLock<Mutex<Vec<u64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(vec![2, 3, 5, 7, 11, 13]))
}

/// The `i`-th prime, `p_0 = 2`.
pub fn nth_prime(i: usize) -> u64 {
    let mut cache = prime_cache().lock().expect("prime cache poisoned");
    while cache.len() <= i {
        let mut c = cache.last().copied().unwrap_or(1) + 2;
        loop {
            if cache.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
                break;
            }
            c += 2;
        }
        cache.push(c);
    }
    cache[i]
}

/// `∏ p_i^{a_i+1}`. The empty tuple has no code.
pub fn code_tuple(a: &[u64]) -> Result<BigUint> {
    if a.is_empty() {
        return Err(Error::PreconditionFailed("the empty tuple has no code".into()));
    }
    let mut m = BigUint::one();
    for (i, &ai) in a.iter().enumerate() {
        let e = u32::try_from(ai).ok().and_then(|e| e.checked_add(1)).ok_or(Error::Overflow)?;
        m *= BigUint::from(nth_prime(i)).pow(e);
    }
    Ok(m)
}

/// [`code_tuple`] restricted to machine naturals.
pub fn code_tuple_u64(a: &[u64]) -> Result<u64> {
    code_tuple(a)?.to_u64().ok_or(Error::Overflow)
}

/// Largest `l` with `p_i^l | x`; 0 when `x = 0`.
pub fn ex(i: usize, x: &BigUint) -> u64 {
    if x.is_zero() {
        return 0;
    }
    let p = BigUint::from(nth_prime(i));
    let mut x = x.clone();
    let mut l = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return l;
        }
        x = q;
        l += 1;
    }
}

/// Largest `i` with `p_i | x`; 0 when `x ≤ 1`.
///
/// Trial division over the primes in order, so this is only practical when
/// `x` has no large prime factor beyond those already removed.
pub fn long(x: &BigUint) -> u64 {
    if *x <= BigUint::one() {
        return 0;
    }
    let mut rest = x.clone();
    let mut last = 0;
    let mut i = 0;
    while rest > BigUint::one() {
        let p = BigUint::from(nth_prime(i));
        if &p * &p > rest {
            // rest is itself prime
            let q = rest.to_u64().expect("prime cofactor beyond u64");
            let mut j = i;
            while nth_prime(j) != q {
                j += 1;
            }
            return j as u64;
        }
        let mut hit = false;
        loop {
            let (q, r) = rest.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            rest = q;
            hit = true;
        }
        if hit {
            last = i as u64;
        }
        i += 1;
    }
    last
}

/// Membership in `CT`: `m ≥ 2` and every prime up to the largest prime
/// divisor of `m` divides `m`.
pub fn is_code(m: &BigUint) -> bool {
    decode_tuple(m).is_some()
}

pub fn is_code_u64(m: u64) -> bool {
    is_code(&BigUint::from(m))
}

/// Inverse of [`code_tuple`]: `a_i = ex(i, m) − 1` for `i ≤ long(m)`.
pub fn decode_tuple(m: &BigUint) -> Option<Vec<u64>> {
    if *m < BigUint::from(2u8) {
        return None;
    }
    let mut rest = m.clone();
    let mut out = Vec::new();
    let mut i = 0;
    while rest > BigUint::one() {
        let p = BigUint::from(nth_prime(i));
        let mut e = 0u64;
        loop {
            let (q, r) = rest.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e == 0 {
            return None;
        }
        out.push(e - 1);
        i += 1;
    }
    Some(out)
}

/// Cantor pairing, used to code pairs inside products.
pub fn pair(x: u64, y: u64) -> u64 {
    (x + y) * (x + y + 1) / 2 + y
}

/// Inverse of [`pair`].
pub fn unpair(z: u64) -> (u64, u64) {
    let mut w = ((8.0 * z as f64 + 1.0).sqrt() as u64).saturating_sub(1) / 2;
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    let y = z - w * (w + 1) / 2;
    (w - y, y)
}

/// Finite set `(f, d)`: characteristic vector `f` on `[0, d]`.
///
/// Canonical form trims trailing zeros; the canonical empty set has an empty
/// vector and bound 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FinSet {
    bits: Vec<bool>,
}

impl FinSet {
    pub fn empty() -> Self {
        FinSet { bits: Vec::new() }
    }

    /// Vector `charvec` over `[0, charvec.len() − 1]`, kept as given.
    pub fn from_charvec(charvec: Vec<bool>) -> Self {
        FinSet { bits: charvec }
    }

    /// Empty set with an explicit support bound.
    pub fn zeros(bound: u64) -> Self {
        FinSet { bits: vec![false; bound as usize + 1] }
    }

    pub fn from_elements(xs: impl IntoIterator<Item = u64>) -> Self {
        let mut bits = Vec::new();
        for x in xs {
            let x = x as usize;
            if bits.len() <= x {
                bits.resize(x + 1, false);
            }
            bits[x] = true;
        }
        FinSet { bits }
    }

    /// The set coded by `m`; `None` unless `m ∈ CT` with every exponent in `{1, 2}`.
    pub fn from_code(m: &BigUint) -> Option<Self> {
        let a = decode_tuple(m)?;
        if a.iter().any(|&v| v > 1) {
            return None;
        }
        Some(FinSet { bits: a.into_iter().map(|v| v == 1).collect() })
    }

    pub fn bound(&self) -> u64 {
        self.bits.len().saturating_sub(1) as u64
    }

    pub fn charvec(&self) -> &[bool] {
        &self.bits
    }

    pub fn contains(&self, x: u64) -> bool {
        self.bits.get(x as usize).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, x: u64) {
        let x = x as usize;
        if self.bits.len() <= x {
            self.bits.resize(x + 1, false);
        }
        self.bits[x] = true;
    }

    pub fn canonical(&self) -> Self {
        let end = self.bits.iter().rposition(|&b| b).map_or(0, |i| i + 1);
        FinSet { bits: self.bits[..end].to_vec() }
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// `Σ_{i ≤ d} f(i)`.
    pub fn cardinality(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    pub fn elements(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64)
    }

    /// Code of the canonical form; `None` for the empty set.
    pub fn code(&self) -> Option<BigUint> {
        let c = self.canonical();
        if c.bits.is_empty() {
            return None;
        }
        let tuple: Vec<u64> = c.bits.iter().map(|&b| u64::from(b)).collect();
        Some(code_tuple(&tuple).expect("non-empty tuple"))
    }

    /// Increasing enumeration `g: [0, |S|−1] → S` built by bounded minimisation:
    /// `g(0) = μy ≤ d. f(y) = 1`, `g(k+1) = μy ≤ d. (y > g(k) ∧ f(y) = 1)`.
    pub fn card_witness(&self) -> Vec<u64> {
        let d = self.bits.len() as u64;
        let mut g = Vec::new();
        let mut from = 0u64;
        loop {
            let next = (from..d).find(|&y| self.contains(y));
            match next {
                Some(y) => {
                    g.push(y);
                    from = y + 1;
                }
                None => return g,
            }
        }
    }

    /// Least `x ∈ S ∖ K`, which exists whenever `|K| < |S|`.
    pub fn find_missing(&self, k: &FinSet) -> Result<u64> {
        if self.cardinality() <= k.cardinality() {
            return Err(Error::PreconditionFailed(format!(
                "|S| = {} is not larger than |K| = {}",
                self.cardinality(),
                k.cardinality()
            )));
        }
        Ok(self.elements().find(|&x| !k.contains(x)).expect("pigeonhole: S ∖ K is non-empty"))
    }

    pub fn union(&self, other: &FinSet) -> FinSet {
        let n = self.bits.len().max(other.bits.len());
        FinSet { bits: (0..n as u64).map(|i| self.contains(i) || other.contains(i)).collect() }
    }

    pub fn intersection(&self, other: &FinSet) -> FinSet {
        let n = self.bits.len().min(other.bits.len());
        FinSet { bits: (0..n as u64).map(|i| self.contains(i) && other.contains(i)).collect() }
    }

    pub fn is_subset(&self, other: &FinSet) -> bool {
        self.elements().all(|x| other.contains(x))
    }

    pub fn is_disjoint(&self, other: &FinSet) -> bool {
        self.elements().all(|x| !other.contains(x))
    }

    /// `S × K` with pairs coded by [`pair`].
    pub fn product(&self, other: &FinSet) -> FinSet {
        FinSet::from_elements(self.elements().flat_map(|x| other.elements().map(move |y| pair(x, y))))
    }

    /// `S^n` as iterated left-nested products; `S^1 = S`.
    pub fn power(&self, n: u32) -> FinSet {
        assert!(n >= 1, "power needs n ≥ 1");
        (1..n).fold(self.clone(), |acc, _| acc.product(self))
    }
}

/// Whether `g` is a bijection from `[0, m−1]` onto `S`.
pub fn is_bijection_onto(g: &[u64], s: &FinSet, m: u64) -> bool {
    if g.len() as u64 != m {
        return false;
    }
    let image = FinSet::from_elements(g.iter().copied());
    image.cardinality() == m && image.canonical() == s.canonical()
}
