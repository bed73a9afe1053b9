//! Exact rationals extended by the single value `inf`, and the p-adic
//! valuation on them.
//!
//! Valuations of nonzero quantities are ordinary rationals; the valuation of
//! zero (and the final value of a pseudovaluation chain) is `inf`.  `inf`
//! absorbs addition and is the maximum for `min`/`max`, matching the
//! ultrametric conventions.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Exact rational number, reduced, with unbounded numerator and denominator.
pub type Rat = num_rational::BigRational;

/// Convenience constructor for a rational from machine integers.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Convenience constructor for an integer rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// A rational extended by the distinguished value `inf`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ExtRat {
    Finite(Rat),
    Infinity,
}

impl ExtRat {
    pub fn zero() -> Self {
        ExtRat::Finite(Rat::zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRat::Infinity)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    /// The finite value, or `None` for `inf`.
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            ExtRat::Finite(r) => Some(r),
            ExtRat::Infinity => None,
        }
    }

    /// The finite value; panics on `inf`.  Use where finiteness is an
    /// established invariant.
    pub fn expect_finite(&self, what: &str) -> &Rat {
        match self {
            ExtRat::Finite(r) => r,
            ExtRat::Infinity => panic!("expected finite value: {what}"),
        }
    }

    pub fn min(self, other: ExtRat) -> ExtRat {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: ExtRat) -> ExtRat {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl From<Rat> for ExtRat {
    fn from(r: Rat) -> Self {
        ExtRat::Finite(r)
    }
}

impl PartialOrd for ExtRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRat::Infinity, ExtRat::Infinity) => Ordering::Equal,
            (ExtRat::Infinity, ExtRat::Finite(_)) => Ordering::Greater,
            (ExtRat::Finite(_), ExtRat::Infinity) => Ordering::Less,
            (ExtRat::Finite(a), ExtRat::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for ExtRat {
    type Output = ExtRat;
    fn add(self, other: ExtRat) -> ExtRat {
        match (self, other) {
            (ExtRat::Finite(a), ExtRat::Finite(b)) => ExtRat::Finite(a + b),
            _ => ExtRat::Infinity,
        }
    }
}

impl Sub for ExtRat {
    type Output = ExtRat;
    fn sub(self, other: ExtRat) -> ExtRat {
        match (self, other) {
            (ExtRat::Finite(a), ExtRat::Finite(b)) => ExtRat::Finite(a - b),
            (ExtRat::Infinity, ExtRat::Finite(_)) => ExtRat::Infinity,
            _ => panic!("indeterminate difference of infinite valuations"),
        }
    }
}

impl Neg for ExtRat {
    type Output = ExtRat;
    fn neg(self) -> ExtRat {
        match self {
            ExtRat::Finite(a) => ExtRat::Finite(-a),
            ExtRat::Infinity => panic!("cannot negate inf"),
        }
    }
}

/// Scalar multiple n * x with n > 0 treated as repetition; 0 * inf = 0 by the
/// convention used in the augmented-valuation formula (the i = 0 term carries
/// no lambda contribution).
impl Mul<&ExtRat> for usize {
    type Output = ExtRat;
    fn mul(self, x: &ExtRat) -> ExtRat {
        if self == 0 {
            return ExtRat::zero();
        }
        match x {
            ExtRat::Finite(r) => ExtRat::Finite(r * Rat::from_integer(BigInt::from(self))),
            ExtRat::Infinity => ExtRat::Infinity,
        }
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRat::Finite(r) => write!(f, "{}", r),
            ExtRat::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Exponent of `p` in a nonzero integer.
fn int_p_valuation(n: &BigInt, p: u64) -> u64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0u64;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        v += 1;
        n = q;
    }
}

/// The p-adic valuation of an exact rational: the exponent of `p` in `x`,
/// with `inf` for x = 0.
pub fn p_valuation(x: &Rat, p: u64) -> ExtRat {
    if x.is_zero() {
        return ExtRat::Infinity;
    }
    let vn = int_p_valuation(x.numer(), p) as i64;
    let vd = int_p_valuation(x.denom(), p) as i64;
    ExtRat::Finite(rat_int(vn - vd))
}

/// Trial-division primality check, sufficient for the primes this engine
/// accepts as residue characteristics.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d.checked_mul(d).map(|sq| sq <= p).unwrap_or(false) {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Least denominator b such that `x` lies in (1/b)Z, i.e. the denominator of
/// `x` in lowest terms, as u64.
pub fn denominator_u64(x: &Rat) -> u64 {
    use num_traits::ToPrimitive;
    x.denom()
        .to_u64()
        .expect("denominator exceeds u64 range in lcm computation")
}

/// Floor of a rational as BigInt.
pub fn rat_floor(x: &Rat) -> BigInt {
    x.floor().to_integer()
}

/// Least element of (1/n)Z that is >= x.
pub fn ceil_to_grid(x: &Rat, n: u64) -> Rat {
    let n = BigInt::from(n);
    let scaled = x * Rat::from_integer(n.clone());
    let k = scaled.ceil().to_integer();
    Rat::new(k, n)
}

/// True iff x lies in (1/n)Z.
pub fn in_grid(x: &Rat, n: u64) -> bool {
    (x * Rat::from_integer(BigInt::from(n))).is_integer()
}

/// gcd over u64 with gcd(x, 0) = x.
pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// lcm over u64.
pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Least nonnegative r with r*a = 1 mod m (m >= 1); requires gcd(a, m) = 1.
/// For m = 1 this is 0.
pub fn mod_inverse(a: i64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let m_i = m as i64;
    let a = a.rem_euclid(m_i);
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (m_i, a);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m_i) as u64)
}
