//! Rival–Sands sets in honestly presented graphs: an infinite `H` such that
//! every vertex is adjacent to at most one member.
//!
//! With `x_0, …, x_{s−1}` chosen, let `c` code the set of neighbours of
//! neighbours of those vertices and put `x_s = c + 1`. Any code exceeding
//! every member works; the default is the binary code `Σ 2^u`, which grows
//! like a tower, so only a handful of members fit in memory.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::clock::{Budget, FuelMeter, PunctualStream};
use crate::error::{Error, Result};
use crate::OutOfFuel;

use super::HonestGraph;

/// Declared per-stage envelope for graphs of bounded degree.
pub const BUDGET: Budget = Budget { c: 200_000, k: 1 };

/// Codes of finite sets used for `c`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetCode {
    /// `Σ_{u ∈ X} 2^u`.
    #[default]
    Binary,
    /// One more than the largest member, i.e. the length of the characteristic vector.
    Bound,
}

/// Codes wider than this many bits are refused rather than allocated.
pub const MAX_CODE_BITS: u64 = 1 << 26;

#[derive(Clone)]
pub struct RivalSandsStream<'g> {
    g: &'g dyn HonestGraph,
    code: SetCode,
    /// Neighbours of neighbours of the chosen vertices.
    nn: BTreeSet<BigUint>,
    chosen: Vec<BigUint>,
    failed: Option<Error>,
}

pub fn rival_sands(g: &dyn HonestGraph, code: SetCode) -> RivalSandsStream<'_> {
    RivalSandsStream { g, code, nn: BTreeSet::new(), chosen: Vec::new(), failed: None }
}

impl RivalSandsStream<'_> {
    pub fn chosen(&self) -> &[BigUint] {
        &self.chosen
    }

    fn next_member(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Result<BigUint>, OutOfFuel> {
        let c = match self.code {
            SetCode::Binary => {
                let top = self.nn.last().map_or(0, |m| m.to_u64().unwrap_or(u64::MAX));
                if top >= MAX_CODE_BITS {
                    return Ok(Err(Error::HorizonExceeded(format!(
                        "member {} needs a code of more than {MAX_CODE_BITS} bits",
                        self.chosen.len()
                    ))));
                }
                fuel.charge(self.nn.len() as u64 + top / 64)?;
                let mut c = BigUint::default();
                for u in &self.nn {
                    c.set_bit(u.to_u64().expect("checked against the bit cap"), true);
                }
                c
            }
            SetCode::Bound => {
                fuel.charge(1)?;
                self.nn.last().map_or_else(BigUint::default, |m| m + 1u32)
            }
        };
        let x = c + 1u32;
        for w in self.g.nbhd_big(&x) {
            fuel.charge(1)?;
            for u in self.g.nbhd_big(&w) {
                fuel.charge(1)?;
                self.nn.insert(u);
            }
        }
        self.chosen.push(x.clone());
        Ok(Ok(x))
    }
}

impl PunctualStream for RivalSandsStream<'_> {
    type Item = Result<BigUint>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Result<BigUint>, OutOfFuel> {
        fuel.charge(1)?;
        if let Some(e) = &self.failed {
            return Ok(Err(e.clone()));
        }
        let out = self.next_member(fuel)?;
        if let Err(e) = &out {
            self.failed = Some(e.clone());
        }
        Ok(out)
    }

    fn stage(&self) -> u64 {
        self.chosen.len() as u64 + self.failed.is_some() as u64
    }
}

/// First `v < n` whose neighbourhood (`v` included) meets `h` more than once.
pub fn audit(g: &dyn HonestGraph, h: &[BigUint], n: u64) -> Option<u64> {
    let members: BTreeSet<u64> = h.iter().filter_map(ToPrimitive::to_u64).collect();
    (0..n).find(|&v| g.nbhd(v).iter().filter(|u| members.contains(u)).count() > 1)
}
