//! Exact rational numbers used for every coordinate, density and value.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::CakeError;

/// Arbitrary-precision rational, always stored reduced with a positive denominator.
pub type Rat = BigRational;

/// `p/q` as a [`Rat`]. Panics on `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

pub fn from_usize(p: usize) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

/// Parses `"p/q"` or `"p"`. Decimal points, exponents and whitespace are rejected.
pub fn parse_rat(s: &str) -> Result<Rat, CakeError> {
    let bad = || CakeError::Parse(format!("not a rational literal: {s:?}"));
    let digits = |t: &str| {
        let body = t.strip_prefix('-').unwrap_or(t);
        !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
    };
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    if !digits(num) || !digits(den) || den.starts_with('-') {
        return Err(bad());
    }
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(CakeError::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(num, den))
}

/// Canonical string form: `"p/q"`, or `"p"` for integers.
pub fn fmt_rat(r: &Rat) -> String {
    r.to_string()
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: scale through the bit lengths
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn pow(r: &Rat, e: u32) -> Rat {
    num_traits::pow(r.clone(), e as usize)
}

/// `floor(r * 2^bits)` for `r >= 0`.
pub fn floor_scaled(r: &Rat, bits: u32) -> BigUint {
    debug_assert!(!r.is_negative());
    let num = r.numer().magnitude() << bits as usize;
    num / r.denom().magnitude()
}

/// Largest dyadic `k / 2^bits` not exceeding `r`.
pub fn floor_dyadic(r: &Rat, bits: u32) -> Rat {
    let n = r.numer() << bits as usize;
    let q = n.div_floor(r.denom());
    Rat::new(q, BigInt::one() << bits as usize)
}

/// Smallest dyadic `k / 2^bits` not below `r`.
pub fn ceil_dyadic(r: &Rat, bits: u32) -> Rat {
    let n = r.numer() << bits as usize;
    let q = n.div_ceil(r.denom());
    Rat::new(q, BigInt::one() << bits as usize)
}

pub fn min_rat<'a>(a: &'a Rat, b: &'a Rat) -> &'a Rat {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max_rat<'a>(a: &'a Rat, b: &'a Rat) -> &'a Rat {
    if a >= b {
        a
    } else {
        b
    }
}

/// Exact integer `q`-th root of a non-negative rational, if it has one.
pub fn exact_root(r: &Rat, q: u32) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().magnitude();
    let d = r.denom().magnitude();
    let rn = n.nth_root(q);
    let rd = d.nth_root(q);
    if rn.pow(q) == *n && rd.pow(q) == *d {
        Some(Rat::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}

pub fn is_one(r: &Rat) -> bool {
    r.is_one()
}
