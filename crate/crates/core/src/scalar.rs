//! Exact rational scalars and p-adic valuations of rationals.
//!
//! Rationals are always stored reduced with positive denominator, and all
//! comparisons are exact. Valuations take values in Q extended by a formal
//! infinity for the valuation of zero.

use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Exact rational number, stored reduced with positive denominator.
pub type Rat = BigRational;

/// Builds a rational from an integer pair. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds an integer rational.
pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Renders a rational as `a` or `a/b`, always in lowest terms.
pub fn render_rat(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Value of a valuation: a rational, or infinity for the value of zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtVal {
    Finite(Rat),
    Infinity,
}

impl ExtVal {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtVal::Infinity)
    }

    /// The finite value, or None for infinity.
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            ExtVal::Finite(q) => Some(q),
            ExtVal::Infinity => None,
        }
    }

    /// The finite value; panics on infinity.
    pub fn unwrap_finite(&self) -> &Rat {
        self.finite().expect("valuation is infinite")
    }
}

impl PartialOrd for ExtVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtVal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtVal::Infinity, ExtVal::Infinity) => Ordering::Equal,
            (ExtVal::Infinity, ExtVal::Finite(_)) => Ordering::Greater,
            (ExtVal::Finite(_), ExtVal::Infinity) => Ordering::Less,
            (ExtVal::Finite(a), ExtVal::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtVal::Finite(q) => write!(f, "{}", render_rat(q)),
            ExtVal::Infinity => write!(f, "inf"),
        }
    }
}

/// Deterministic primality test for u64 via Miller-Rabin on a fixed base set.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // This base set decides primality for every n below 2^64.
    'bases: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Exponent of p in a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> u64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0u64;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&n, &p);
        if r.is_zero() {
            n = q;
            v += 1;
        } else {
            return v;
        }
    }
}

/// Exponent of p in a nonzero unsigned integer.
pub fn vp_uint(n: &BigUint, p: u64) -> u64 {
    debug_assert!(!n.is_zero());
    let p = BigUint::from(p);
    let mut n = n.clone();
    let mut v = 0u64;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&n, &p);
        if r.is_zero() {
            n = q;
            v += 1;
        } else {
            return v;
        }
    }
}

/// p-adic valuation of a rational: v_p(a/b) = v_p(a) - v_p(b), with
/// v_p(0) = infinity. Rejects a non-prime p.
pub fn vp_rational(q: &Rat, p: u64) -> Result<ExtVal> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if q.is_zero() {
        return Ok(ExtVal::Infinity);
    }
    let vn = vp_int(q.numer(), p) as i64;
    let vd = vp_int(q.denom(), p) as i64;
    Ok(ExtVal::Finite(rat_int(vn - vd)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vp_examples() {
        assert_eq!(vp_rational(&rat_int(8), 2).unwrap(), ExtVal::Finite(rat_int(3)));
        assert_eq!(vp_rational(&rat_int(0), 5).unwrap(), ExtVal::Infinity);
        assert_eq!(vp_rational(&rat(9, 10), 3).unwrap(), ExtVal::Finite(rat_int(2)));
        assert_eq!(vp_rational(&rat(9, 10), 5).unwrap(), ExtVal::Finite(rat_int(-1)));
    }

    #[test]
    fn vp_rejects_composite_modulus() {
        assert!(matches!(vp_rational(&rat_int(4), 6), Err(Error::NotPrime(6))));
        assert!(matches!(vp_rational(&rat_int(4), 1), Err(Error::NotPrime(1))));
    }

    #[test]
    fn extval_total_order() {
        let fin = ExtVal::Finite(rat(7, 2));
        assert!(ExtVal::Infinity > fin);
        assert!(ExtVal::Finite(rat(1, 3)) < ExtVal::Finite(rat(1, 2)));
        assert_eq!(ExtVal::Infinity, ExtVal::Infinity);
    }

    #[test]
    fn primality_small_cases() {
        let primes: Vec<u64> = (0..60).filter(|n| is_prime(*n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(2u64.pow(61) - 1));
        assert!(!is_prime(2u64.pow(32) + 1));
    }

    #[test]
    fn rational_rendering() {
        assert_eq!(render_rat(&rat(3, 2)), "3/2");
        assert_eq!(render_rat(&rat(-4, 2)), "-2");
        assert_eq!(render_rat(&rat_int(0)), "0");
    }
}
