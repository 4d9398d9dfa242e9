//! Comparison layer for irrational welfare figures.
//!
//! Quantities such as `v^(1/2)`, geometric means or Euler's number are kept
//! as rational enclosures `[lo, hi]` with dyadic endpoints. Roots are taken
//! with integer `nth_root` on scaled numerators, so every enclosure is
//! certified: the true value always lies inside. Comparisons are decided
//! from the enclosures; when two enclosures still overlap at the working
//! precision the values are treated as equal within the relative tolerance.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{ceil_dyadic, exact_root, floor_dyadic, floor_scaled, pow, to_f64, Rat};

/// Working precision in bits (well beyond the 10⁻³⁰ relative tolerance).
pub const DEFAULT_BITS: u32 = 256;

/// `[lo, hi]` containing the true value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Rat,
    pub hi: Rat,
}

impl Enclosure {
    pub fn exact(r: Rat) -> Enclosure {
        Enclosure {
            lo: r.clone(),
            hi: r,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn exact_value(&self) -> Option<&Rat> {
        self.is_exact().then_some(&self.lo)
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint_f64(&self) -> f64 {
        to_f64(&((&self.lo + &self.hi) / Rat::from_integer(2.into())))
    }

    /// Rounds outward to `bits` fractional bits to keep numbers small.
    pub fn rounded(self, bits: u32) -> Enclosure {
        if self.is_exact() && self.lo.denom().bits() <= bits as u64 {
            return self;
        }
        Enclosure {
            lo: floor_dyadic(&self.lo, bits),
            hi: ceil_dyadic(&self.hi, bits),
        }
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// Product of two non-negative enclosures.
    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Enclosure {
            lo: &self.lo * &other.lo,
            hi: &self.hi * &other.hi,
        }
    }

    /// Multiplication by a non-negative rational.
    pub fn scale(&self, k: &Rat) -> Enclosure {
        debug_assert!(!k.is_negative());
        Enclosure {
            lo: &self.lo * k,
            hi: &self.hi * k,
        }
    }

    /// Reciprocal of a strictly positive enclosure.
    pub fn recip(&self) -> Enclosure {
        assert!(self.lo.is_positive(), "reciprocal of enclosure touching 0");
        Enclosure {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        }
    }

    /// `self^e` for a non-negative enclosure and a rational exponent `e > 0`.
    pub fn powr(&self, e: &Rat, bits: u32) -> Enclosure {
        if let Some(x) = self.exact_value() {
            return pow_rat(x, e, bits);
        }
        let lo = pow_rat(&self.lo, e, bits).lo;
        let hi = pow_rat(&self.hi, e, bits).hi;
        Enclosure { lo, hi }
    }

    /// Certified ordering, or `None` while the enclosures overlap.
    pub fn compare(&self, other: &Enclosure) -> Option<Ordering> {
        if self.hi < other.lo {
            return Some(Ordering::Less);
        }
        if other.hi < self.lo {
            return Some(Ordering::Greater);
        }
        if self.is_exact() && other.is_exact() {
            return Some(self.lo.cmp(&other.lo));
        }
        None
    }

    /// `self >= other`, certified or within relative tolerance.
    pub fn ge_within(&self, other: &Enclosure, rel_tol: &Rat) -> bool {
        if self.hi >= other.lo {
            if self.lo >= other.hi {
                return true;
            }
            // overlap: accept only if the overlap is tolerance-sized
            let scale = if other.hi.abs() > self.hi.abs() {
                other.hi.abs()
            } else {
                self.hi.abs()
            };
            let gap = &other.hi - &self.lo;
            return gap <= scale * rel_tol;
        }
        false
    }

    /// Decimal rendering of the midpoint with `digits` significant digits.
    pub fn decimal(&self, digits: usize) -> String {
        render_decimal(&((&self.lo + &self.hi) / Rat::from_integer(2.into())), digits)
    }
}

/// Relative tolerance used when two enclosures cannot be separated: 10⁻³⁰.
pub fn default_tolerance() -> Rat {
    Rat::new(BigInt::one(), BigInt::from(10u8).pow(30))
}

/// Enclosure of `x^(1/q)` for `x >= 0`, exact when the root is rational.
pub fn root(x: &Rat, q: u32, bits: u32) -> Enclosure {
    assert!(q >= 1 && !x.is_negative());
    if q == 1 {
        return Enclosure::exact(x.clone());
    }
    if let Some(r) = exact_root(x, q) {
        return Enclosure::exact(r);
    }
    // floor(x * 2^(bits*q))^(1/q) / 2^bits <= x^(1/q) < (that + 1) / 2^bits
    let scaled = floor_scaled(x, bits * q);
    let r = scaled.nth_root(q);
    let den = BigInt::one() << bits as usize;
    let lo = Rat::new(BigInt::from(r.clone()), den.clone());
    let hi = Rat::new(BigInt::from(r + 1u32), den);
    Enclosure { lo, hi }
}

/// Enclosure of `x^e` for `x >= 0` and rational `e >= 0`.
pub fn pow_rat(x: &Rat, e: &Rat, bits: u32) -> Enclosure {
    assert!(!e.is_negative(), "negative exponent");
    if e.is_zero() {
        return Enclosure::exact(Rat::one());
    }
    if x.is_zero() {
        return Enclosure::exact(Rat::zero());
    }
    let p: u32 = e.numer().try_into().expect("exponent numerator fits u32");
    let q: u32 = e.denom().try_into().expect("exponent denominator fits u32");
    root(&pow(x, p), q, bits)
}

/// Largest dyadic with `bits` fractional bits not exceeding `x^e`.
pub fn pow_floor(x: &Rat, e: &Rat, bits: u32) -> Rat {
    let enc = pow_rat(x, e, bits);
    match enc.exact_value() {
        Some(v) => v.clone(),
        None => enc.lo,
    }
}

/// Euler's number from the factorial series, truncated with a certified tail bound.
pub fn euler(bits: u32) -> Enclosure {
    let mut term = Rat::one();
    let mut sum = Rat::one();
    let mut k = 1u32;
    let eps = Rat::new(BigInt::one(), BigInt::one() << (bits as usize + 2));
    loop {
        term /= Rat::from_integer(k.into());
        sum += &term;
        k += 1;
        // tail after this term is < 2 * next term
        if term < eps {
            break;
        }
    }
    let tail = &term * Rat::from_integer(2.into());
    Enclosure {
        lo: sum.clone(),
        hi: sum + tail,
    }
    .rounded(bits)
}

/// `x` rendered with `digits` significant decimal digits (truncated toward zero).
pub fn render_decimal(x: &Rat, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let ax = x.abs();
    // find exponent so that 10^(digits-1) <= ax * 10^shift < 10^digits
    let ten = Rat::from_integer(10.into());
    let mut shift: i64 = 0;
    let mut scaled = ax.clone();
    let lower = Rat::from_integer(BigInt::from(10u8).pow(digits as u32 - 1));
    let upper = Rat::from_integer(BigInt::from(10u8).pow(digits as u32));
    while scaled < lower {
        scaled *= &ten;
        shift += 1;
    }
    while scaled >= upper {
        scaled /= &ten;
        shift -= 1;
    }
    let mantissa = scaled.trunc().to_integer().to_string();
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    // value = mantissa * 10^(-shift)
    let point = mantissa.len() as i64 - shift; // digits before decimal point
    if point <= 0 {
        s.push_str("0.");
        for _ in 0..(-point) {
            s.push('0');
        }
        s.push_str(&mantissa);
    } else if point as usize >= mantissa.len() {
        s.push_str(&mantissa);
        for _ in 0..(point as usize - mantissa.len()) {
            s.push('0');
        }
    } else {
        s.push_str(&mantissa[..point as usize]);
        s.push('.');
        s.push_str(&mantissa[point as usize..]);
    }
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn roots_are_certified() {
        let two = int(2);
        let s = root(&two, 2, 64);
        assert!(!s.is_exact());
        assert!(&s.lo * &s.lo < two && two < &s.hi * &s.hi);
        assert_eq!(s.width(), Rat::new(1.into(), BigInt::one() << 64));
    }

    #[test]
    fn rational_roots_stay_exact() {
        assert_eq!(root(&rat(1, 16), 2, 64), Enclosure::exact(rat(1, 4)));
        assert_eq!(pow_rat(&rat(1, 4), &int(2), 64), Enclosure::exact(rat(1, 16)));
        assert_eq!(pow_rat(&rat(1, 36), &rat(1, 2), 64), Enclosure::exact(rat(1, 6)));
    }

    #[test]
    fn euler_brackets_e() {
        let e = euler(128);
        assert!(e.lo < e.hi);
        assert!(e.width() < Rat::new(1.into(), BigInt::one() << 120));
        let approx = e.midpoint_f64();
        assert!((approx - std::f64::consts::E).abs() < 1e-15);
        // 2.718281828459045235360287...
        assert!(e.lo > rat(2718281828459045235, 1_000_000_000_000_000_000));
        assert!(e.hi < rat(2718281828459045236, 1_000_000_000_000_000_000));
    }

    #[test]
    fn tolerance_comparisons() {
        let tol = default_tolerance();
        let a = root(&int(2), 2, 200);
        let b = root(&int(2), 2, 200);
        assert!(a.ge_within(&b, &tol));
        assert_eq!(a.compare(&b), None);
        let c = Enclosure::exact(rat(3, 2));
        assert_eq!(a.compare(&c), Some(Ordering::Less));
        assert!(c.ge_within(&a, &tol));
        assert!(!a.ge_within(&c, &tol));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(render_decimal(&rat(1, 2), 12), "0.5");
        assert_eq!(render_decimal(&rat(1, 3), 12), "0.333333333333");
        assert_eq!(render_decimal(&int(12), 12), "12");
        assert_eq!(render_decimal(&rat(-5, 4), 3), "-1.25");
        assert_eq!(render_decimal(&rat(1, 400), 3), "0.0025");
        assert_eq!(root(&int(2), 2, 128).decimal(12), "1.41421356237");
    }
}
