//! Exact rationals and dyadic helpers.

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rat = Ratio<i128>;

/// Unbounded rationals, for constructions whose denominators grow with the stage.
pub type BigRat = num_rational::BigRational;

/// `2^{−m}` as a [`BigRat`].
pub fn big_pow2_neg(m: u64) -> BigRat {
    BigRat::new(num_bigint::BigInt::one(), num_bigint::BigInt::one() << m)
}

pub fn to_big(r: &Rat) -> BigRat {
    BigRat::new((*r.numer()).into(), (*r.denom()).into())
}

/// Exact conversion back to [`Rat`] when both parts fit.
pub fn from_big(r: &BigRat) -> Option<Rat> {
    use num_traits::ToPrimitive;
    Some(Rat::new(r.numer().to_i128()?, r.denom().to_i128()?))
}

pub fn big_to_wire(r: &BigRat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn big_from_wire(s: &str) -> Option<BigRat> {
    use num_bigint::BigInt;
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let d: BigInt = d.trim().parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRat::new(n.trim().parse().ok()?, d))
}

/// `k · 2^{−m}`.
pub fn dyadic(k: i128, m: u32) -> Rat {
    Rat::new(k, 1i128 << m)
}

/// `2^{−m}`.
pub fn pow2_neg(m: u32) -> Rat {
    dyadic(1, m)
}

pub fn int(k: i128) -> Rat {
    Rat::from_integer(k)
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

pub fn abs(r: Rat) -> Rat {
    if r < Rat::zero() {
        -r
    } else {
        r
    }
}

/// Midpoint-first breadth order of the dyadics in `(0, 1)`: 1/2, 1/4, 3/4, 1/8, …
pub fn probe(i: u64) -> Rat {
    let level = 63 - (i + 1).leading_zeros();
    let offset = (i + 1) - (1u64 << level);
    dyadic(2 * offset as i128 + 1, level + 1)
}

/// `"num/den"`, the wire format of every audited rational.
pub fn to_wire(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn from_wire(s: &str) -> Option<Rat> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: i128 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Rat::new(n.trim().parse().ok()?, d))
        }
        None => Some(Rat::from_integer(s.trim().parse().ok()?)),
    }
}

/// Serde adapter: `#[serde(with = "crate::rat::wire")]`.
pub mod wire {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        to_wire(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        from_wire(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

/// Serde adapter for [`BigRat`] in the same wire format.
pub mod big_wire {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRat, s: S) -> Result<S::Ok, S::Error> {
        big_to_wire(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRat, D::Error> {
        let s = String::deserialize(d)?;
        big_from_wire(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

/// Serde adapter for `Option<Rat>`.
pub mod wire_opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        r.as_ref().map(to_wire).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        match Option::<String>::deserialize(d)? {
            Some(s) => from_wire(&s).map(Some).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}"))),
            None => Ok(None),
        }
    }
}
