//! Open rational intervals and exact union arithmetic.

use serde::{Deserialize, Serialize};

use crate::rat::{self, Rat};

/// Open interval `(lo, hi)`; empty when `lo ≥ hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "rat::wire")]
    pub lo: Rat,
    #[serde(with = "rat::wire")]
    pub hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: Rat) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }
}

/// Enumeration `I_0, I_1, …` of open intervals, `None` standing for the empty interval.
pub type IntervalCover = Vec<Option<Interval>>;

/// Whether the closed interval `[lo, hi]` lies inside the union of the open intervals.
pub fn covers<'a>(intervals: impl IntoIterator<Item = &'a Interval>, lo: Rat, hi: Rat) -> bool {
    let mut ivs: Vec<Interval> = intervals.into_iter().filter(|i| !i.is_empty()).copied().collect();
    ivs.sort_by(|a, b| a.lo.cmp(&b.lo));
    // `cur` is the least point of [lo, hi] not yet known to be covered.
    let mut cur = lo;
    let mut best: Option<Rat> = None;
    let mut i = 0;
    loop {
        while i < ivs.len() && ivs[i].lo < cur {
            best = Some(best.map_or(ivs[i].hi, |b: Rat| b.max(ivs[i].hi)));
            i += 1;
        }
        match best {
            Some(b) if b > cur => {
                if b > hi {
                    return true;
                }
                cur = b;
            }
            _ => return false,
        }
    }
}

/// Closed components of `[lo, hi] ∖ ⋃ intervals`, in increasing order.
pub fn uncovered<'a>(intervals: impl IntoIterator<Item = &'a Interval>, lo: Rat, hi: Rat) -> Vec<(Rat, Rat)> {
    let mut ivs: Vec<Interval> = intervals.into_iter().filter(|i| !i.is_empty()).copied().collect();
    ivs.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut out = Vec::new();
    let mut cur = lo;
    for iv in ivs {
        if cur > hi {
            break;
        }
        if iv.hi <= cur {
            continue;
        }
        if iv.lo >= cur {
            let end = iv.lo.min(hi);
            out.push((cur, end));
        }
        cur = cur.max(iv.hi);
    }
    if cur <= hi {
        out.push((cur, hi));
    }
    out
}
