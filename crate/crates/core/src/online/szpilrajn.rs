//! Online linear extension of a revealed poset.

use crate::clock::{FuelMeter, PunctualStream};
use crate::error::{Error, Result};
use crate::OutOfFuel;

use super::{check_reveals, Orientation, Reveal};

/// Stage `s` inserts `p_s` into the current linear order `≺_s` at the lowest
/// position above every revealed element below it, and yields that position.
#[derive(Debug, Clone)]
pub struct SzpilrajnStream {
    rel: Orientation,
    n: usize,
    order: Vec<u64>,
}

/// Validates every prefix as a strict partial order and prepares the stream.
pub fn szpilrajn_extend(reveals: &[Reveal]) -> Result<SzpilrajnStream> {
    check_reveals(reveals)?;
    for r in reveals {
        if let Some(u) = r.from_prior.iter().find(|u| r.to_prior.contains(u)) {
            return Err(Error::InvalidInstance(format!("{u} is both below and above {}", r.vertex)));
        }
    }
    let rel = Orientation::from_reveals(reveals);
    let n = reveals.len();
    // on each prefix, u < v < w with u, w earlier than v needs u < w already
    for v in 0..n {
        for u in 0..n {
            if !rel.arc(u, v) {
                continue;
            }
            for w in 0..n {
                if rel.arc(v, w) && !rel.arc(u, w) {
                    return Err(Error::InvalidInstance(format!("{u} < {v} < {w} but not {u} < {w}")));
                }
            }
        }
    }
    Ok(SzpilrajnStream { rel, n, order: Vec::with_capacity(n) })
}

impl SzpilrajnStream {
    /// `≺_s`, least element first.
    pub fn order(&self) -> &[u64] {
        &self.order
    }

    /// Number of revealed elements.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

impl PunctualStream for SzpilrajnStream {
    /// Insertion position, or `None` once the revealed stream is exhausted.
    type Item = Option<usize>;

    fn next_stage(&mut self, fuel: &mut FuelMeter) -> std::result::Result<Option<usize>, OutOfFuel> {
        let s = self.order.len();
        if s >= self.n {
            fuel.charge(1)?;
            return Ok(None);
        }
        fuel.charge(s as u64 + 1)?;
        let pos = self
            .order
            .iter()
            .rposition(|&u| self.rel.arc(u as usize, s))
            .map_or(0, |i| i + 1);
        self.order.insert(pos, s as u64);
        Ok(Some(pos))
    }

    fn stage(&self) -> u64 {
        self.order.len() as u64
    }
}

/// `order` lists `0..n` once each and respects every revealed relation.
pub fn is_linear_extension(reveals: &[Reveal], order: &[u64]) -> bool {
    let n = order.len();
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v as usize >= n || pos[v as usize] != usize::MAX {
            return false;
        }
        pos[v as usize] = i;
    }
    reveals[..n].iter().all(|r| {
        let v = pos[r.vertex as usize];
        r.from_prior.iter().all(|&u| pos[u as usize] < v) && r.to_prior.iter().all(|&u| pos[u as usize] > v)
    })
}
