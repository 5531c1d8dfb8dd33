//! Bases of countable vector spaces over finite fields, found by bounded
//! search: with `n + 1` basis vectors chosen, their span has at most
//! `k^{n+1}` members, so some `z ≤ k^{n+1}` lies outside it.

use crate::clock::{FuelMeter, PunctualStream};
use crate::error::{Error, Result};
use crate::OutOfFuel;

/// Finite field on `0..k` given by its tables; `0` and `1` are the units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteField {
    k: u64,
    add: Vec<Vec<u64>>,
    mul: Vec<Vec<u64>>,
}

impl FiniteField {
    /// `ℤ/p` for a prime `p`.
    pub fn prime(p: u64) -> Result<Self> {
        if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(Error::PreconditionFailed(format!("{p} is not prime")));
        }
        let t = |f: &dyn Fn(u64, u64) -> u64| (0..p).map(|a| (0..p).map(|b| f(a, b) % p).collect()).collect();
        Ok(FiniteField { k: p, add: t(&|a, b| a + b), mul: t(&|a, b| a * b) })
    }

    /// `F₄ = F₂[ω]/(ω² + ω + 1)` with `a + bω` numbered `a + 2b`.
    pub fn f4() -> Self {
        let mul_poly = |x: u64, y: u64| {
            let (a, b, c, d) = (x & 1, x >> 1, y & 1, y >> 1);
            // (a + bω)(c + dω) = ac + bd + (ad + bc + bd)ω
            ((a & c) ^ (b & d)) | (((a & d) ^ (b & c) ^ (b & d)) << 1)
        };
        FiniteField {
            k: 4,
            add: (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect(),
            mul: (0..4).map(|a| (0..4).map(|b| mul_poly(a, b)).collect()).collect(),
        }
    }

    pub fn size(&self) -> u64 {
        self.k
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        self.add[a as usize][b as usize]
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.mul[a as usize][b as usize]
    }

    /// Field axioms by exhaustive check.
    pub fn is_field(&self) -> bool {
        let f = 0..self.k;
        let units = f.clone().all(|a| self.add(a, 0) == a && self.mul(a, 1) == a);
        let inverses = f.clone().all(|a| f.clone().any(|b| self.add(a, b) == 0))
            && (1..self.k).all(|a| f.clone().any(|b| self.mul(a, b) == 1));
        let laws = f.clone().all(|a| {
            f.clone().all(|b| {
                self.add(a, b) == self.add(b, a)
                    && self.mul(a, b) == self.mul(b, a)
                    && f.clone().all(|c| {
                        self.add(self.add(a, b), c) == self.add(a, self.add(b, c))
                            && self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c))
                            && self.mul(a, self.add(b, c)) == self.add(self.mul(a, b), self.mul(a, c))
                    })
            })
        });
        units && inverses && laws
    }
}

/// Vector space on ℕ over a finite field, with `0` the zero vector.
pub trait VectorSpace: Send + Sync {
    fn field(&self) -> &FiniteField;
    fn add(&self, u: u64, v: u64) -> Result<u64>;
    fn scale(&self, a: u64, v: u64) -> Result<u64>;
}

/// Eventually-zero sequences over `F`: vector `n` has the base-`k` digits of
/// `n` as coordinates, optionally relabelled by a fixed digit permutation
/// per coordinate (`perm[i]` for coordinate `i mod perm.len()`) that keeps
/// `0` fixed.
#[derive(Debug, Clone)]
pub struct CoordinateSpace {
    field: FiniteField,
    perm: Vec<Vec<u64>>,
}

impl CoordinateSpace {
    pub fn new(field: FiniteField) -> Self {
        CoordinateSpace { field, perm: Vec::new() }
    }

    /// Relabelled presentation; each permutation must fix `0`.
    pub fn relabelled(field: FiniteField, perm: Vec<Vec<u64>>) -> Result<Self> {
        let k = field.size();
        for p in &perm {
            let mut seen = p.clone();
            seen.sort_unstable();
            if seen != (0..k).collect::<Vec<_>>() || p[0] != 0 {
                return Err(Error::PreconditionFailed("digit relabelling must permute the field and fix 0".into()));
            }
        }
        Ok(CoordinateSpace { field, perm })
    }

    fn relabel(&self, i: usize, d: u64, back: bool) -> u64 {
        if self.perm.is_empty() {
            return d;
        }
        let p = &self.perm[i % self.perm.len()];
        if back {
            p.iter().position(|&x| x == d).expect("permutation") as u64
        } else {
            p[d as usize]
        }
    }

    /// Coordinates of vector `n`.
    pub fn coords(&self, mut n: u64) -> Vec<u64> {
        let k = self.field.size();
        let mut out = Vec::new();
        while n > 0 {
            out.push(self.relabel(out.len(), n % k, true));
            n /= k;
        }
        out
    }

    pub fn vector(&self, coords: &[u64]) -> Result<u64> {
        let k = self.field.size();
        let mut n = 0u64;
        for (i, &c) in coords.iter().enumerate().rev() {
            n = n.checked_mul(k).and_then(|n| n.checked_add(self.relabel(i, c, false))).ok_or(Error::Overflow)?;
        }
        Ok(n)
    }
}

impl VectorSpace for CoordinateSpace {
    fn field(&self) -> &FiniteField {
        &self.field
    }

    fn add(&self, u: u64, v: u64) -> Result<u64> {
        let (a, b) = (self.coords(u), self.coords(v));
        let n = a.len().max(b.len());
        let c: Vec<u64> = (0..n).map(|i| self.field.add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0))).collect();
        self.vector(&c)
    }

    fn scale(&self, s: u64, v: u64) -> Result<u64> {
        let c: Vec<u64> = self.coords(v).into_iter().map(|x| self.field.mul(s, x)).collect();
        self.vector(&c)
    }
}

/// All `Σ cᵢ·bᵢ`, with the number of combinations tried before `target` was
/// hit (or all of them).
fn in_span(v: &dyn VectorSpace, basis: &[u64], target: u64) -> Result<(bool, u64)> {
    let k = v.field().size();
    let mut coeffs = vec![0u64; basis.len()];
    let mut tried = 0;
    loop {
        tried += 1;
        let mut sum = 0;
        for (&c, &b) in coeffs.iter().zip(basis) {
            sum = v.add(sum, v.scale(c, b)?)?;
        }
        if sum == target {
            return Ok((true, tried));
        }
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return Ok((false, tried));
            }
            coeffs[i] += 1;
            if coeffs[i] < k {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// Basis stream: `b(0) = 1` and `b(n+1)` is the least `z ≤ k^{n+1}` outside
/// `span(b(0..=n))`, with membership decided by enumerating coefficients.
/// Stage cost is exponential in the stage, as the bound is.
pub struct BasisStream<'a> {
    space: &'a dyn VectorSpace,
    basis: Vec<u64>,
    failed: Option<Error>,
}

pub fn basis_finite_field(space: &dyn VectorSpace) -> BasisStream<'_> {
    BasisStream { space, basis: Vec::new(), failed: None }
}

impl BasisStream<'_> {
    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    fn step(&mut self) -> Result<(u64, u64)> {
        if self.basis.is_empty() {
            return Ok((1, 1));
        }
        let k = self.space.field().size();
        let n = self.basis.len() as u32;
        let bound = k.checked_pow(n).and_then(|b| b.checked_add(1)).ok_or(Error::Overflow)?;
        let mut work = 0;
        for z in 0..=bound {
            let (inside, tried) = in_span(self.space, &self.basis, z)?;
            work += tried;
            if !inside {
                return Ok((z, work));
            }
        }
        Err(Error::InstanceInconsistent(format!("every vector up to {bound} lies in the span of {:?}", self.basis)))
    }
}

impl PunctualStream for BasisStream<'_> {
    type Item = Result<u64>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Result<u64>, OutOfFuel> {
        if let Some(e) = &self.failed {
            return Ok(Err(e.clone()));
        }
        match self.step() {
            Ok((z, work)) => {
                fuel.charge(work)?;
                self.basis.push(z);
                Ok(Ok(z))
            }
            Err(e) => {
                self.failed = Some(e.clone());
                Ok(Err(e))
            }
        }
    }

    fn stage(&self) -> u64 {
        self.basis.len() as u64 + self.failed.is_some() as u64
    }
}
