//! Dense polynomials over the prime field F_p and their factorization.
//!
//! Factorization runs squarefree decomposition, then distinct-degree
//! splitting, then equal-degree splitting (Cantor-Zassenhaus for odd p,
//! exhaustive search as the fallback).  The inputs this engine feeds in are
//! residual polynomials of small degree, so none of this needs to be fast.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::qpoly::QPoly;
use super::rat::Rat;
use crate::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>, // lowest first, all in [0, p), last nonzero
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

impl FpPoly {
    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: vec![] }
    }

    pub fn one(p: u64) -> Self {
        FpPoly::from_coeffs(p, vec![1])
    }

    pub fn var(p: u64) -> Self {
        FpPoly::from_coeffs(p, vec![0, 1])
    }

    pub fn from_coeffs(p: u64, coeffs: Vec<u64>) -> Self {
        let mut f = FpPoly {
            p,
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
        };
        f.normalize();
        f
    }

    /// Reduce a p-integral rational polynomial mod p.
    pub fn from_qpoly(f: &QPoly, p: u64) -> Result<Self, Error> {
        let pb = BigInt::from(p);
        let mut coeffs = Vec::with_capacity(f.coeffs().len());
        for c in f.coeffs() {
            coeffs.push(reduce_rat_mod_p(c, &pb, p)?);
        }
        Ok(FpPoly::from_coeffs(p, coeffs))
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        assert!(!self.is_zero(), "degree of zero polynomial");
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn leading_coeff(&self) -> u64 {
        *self.coeffs.last().expect("leading coefficient of zero")
    }

    pub fn is_monic(&self) -> bool {
        !self.is_zero() && self.leading_coeff() == 1
    }

    pub fn make_monic(&self) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = inv_mod(self.leading_coeff(), self.p);
        FpPoly::from_coeffs(
            self.p,
            self.coeffs.iter().map(|&c| mul_mod(c, inv, self.p)).collect(),
        )
    }

    pub fn add(&self, other: &FpPoly) -> FpPoly {
        let p = self.p;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push((self.coeff(i) + other.coeff(i)) % p);
        }
        FpPoly::from_coeffs(p, out)
    }

    pub fn sub(&self, other: &FpPoly) -> FpPoly {
        let p = self.p;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push((self.coeff(i) + p - other.coeff(i) % p) % p);
        }
        FpPoly::from_coeffs(p, out)
    }

    pub fn mul(&self, other: &FpPoly) -> FpPoly {
        let p = self.p;
        if self.is_zero() || other.is_zero() {
            return FpPoly::zero(p);
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(a, b, p)) % p;
            }
        }
        FpPoly::from_coeffs(p, out)
    }

    pub fn div_rem(&self, divisor: &FpPoly) -> (FpPoly, FpPoly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let p = self.p;
        if self.is_zero() || self.degree() < divisor.degree() {
            return (FpPoly::zero(p), self.clone());
        }
        let dd = divisor.degree();
        let lead_inv = inv_mod(divisor.leading_coeff(), p);
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i] == 0 {
                continue;
            }
            let q = mul_mod(rem[i], lead_inv, p);
            quot[i - dd] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                let sub = mul_mod(dc, q, p);
                let tgt = i - dd + j;
                rem[tgt] = (rem[tgt] + p - sub) % p;
            }
        }
        (FpPoly::from_coeffs(p, quot), FpPoly::from_coeffs(p, rem))
    }

    pub fn rem(&self, divisor: &FpPoly) -> FpPoly {
        self.div_rem(divisor).1
    }

    pub fn gcd(&self, other: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.make_monic()
    }

    pub fn derivative(&self) -> FpPoly {
        if self.is_zero() || self.degree() == 0 {
            return FpPoly::zero(self.p);
        }
        let p = self.p;
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mul_mod(c, (i as u64) % p, p))
            .collect();
        FpPoly::from_coeffs(p, out)
    }

    /// self^e mod m.
    pub fn pow_mod(&self, mut e: u128, m: &FpPoly) -> FpPoly {
        let mut base = self.rem(m);
        let mut acc = FpPoly::one(self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).rem(m);
            }
        }
        acc
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p;
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = (mul_mod(acc, x % p, p) + c) % p;
        }
        acc
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat; p prime.
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = mul_mod(result, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    result
}

fn reduce_rat_mod_p(c: &Rat, pb: &BigInt, p: u64) -> Result<u64, Error> {
    if (c.denom() % pb).is_zero() {
        return Err(Error::InvalidInput(format!(
            "coefficient {c} is not integral at p = {p}"
        )));
    }
    let num = c.numer().mod_floor_u64(p);
    let den = c.denom().mod_floor_u64(p);
    Ok(mul_mod(num, inv_mod(den, p), p))
}

trait ModFloorU64 {
    fn mod_floor_u64(&self, p: u64) -> u64;
}

impl ModFloorU64 for BigInt {
    fn mod_floor_u64(&self, p: u64) -> u64 {
        let pb = BigInt::from(p);
        let mut r = self % &pb;
        if r.is_negative() {
            r += &pb;
        }
        r.to_u64().unwrap()
    }
}

/// Squarefree decomposition: returns (g_i, m_i) with self = lc * prod g_i^m_i,
/// each g_i monic squarefree, m_i distinct.
fn squarefree_decomposition(f: &FpPoly) -> Vec<(FpPoly, u32)> {
    let p = f.p();
    let f = f.make_monic();
    if f.degree() == 0 {
        return vec![];
    }
    let d = f.derivative();
    if d.is_zero() {
        // f = h(t^p): extract the p-th root and recurse; over F_p the root of
        // sum a_i t^(p i) is sum a_i t^i.
        let mut root = Vec::new();
        for (i, &c) in f.coeffs().iter().enumerate() {
            if i % (p as usize) == 0 {
                root.push(c);
            } else {
                debug_assert_eq!(c, 0);
            }
        }
        let h = FpPoly::from_coeffs(p, root);
        return squarefree_decomposition(&h)
            .into_iter()
            .map(|(g, m)| (g, m * p as u32))
            .collect();
    }
    let mut out: Vec<(FpPoly, u32)> = Vec::new();
    let g = f.gcd(&d);
    let mut w = f.div_rem(&g).0; // product of squarefree part
    let mut rest = g;
    let mut mult = 1u32;
    while w.degree() > 0 {
        let y = w.gcd(&rest);
        let fac = w.div_rem(&y).0;
        if fac.degree() > 0 {
            out.push((fac, mult));
        }
        w = y.clone();
        rest = rest.div_rem(&y).0;
        mult += 1;
    }
    if !rest.is_zero() && rest.degree() > 0 {
        // remaining part is a p-th power
        for (g, m) in squarefree_decomposition(&rest) {
            out.push((g, m * p as u32));
        }
    }
    out
}

/// Distinct-degree splitting of a monic squarefree polynomial: returns
/// (product of irreducible factors of degree d, d) pairs.
fn distinct_degree(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.p();
    let mut out = Vec::new();
    let mut rest = f.clone();
    let mut frob = FpPoly::var(p); // t^(p^d) mod rest, iterated
    let mut d = 0usize;
    while rest.degree() >= 1 {
        d += 1;
        if rest.degree() < 2 * d {
            // what remains is irreducible
            out.push((rest.clone(), rest.degree()));
            break;
        }
        frob = frob.pow_mod(p as u128, &rest);
        let diff = frob.sub(&FpPoly::var(p));
        let g = rest.gcd(&diff);
        if g.degree() > 0 {
            out.push((g.clone(), d));
            rest = rest.div_rem(&g).0;
            frob = frob.rem(&rest);
        }
    }
    out
}

/// Exhaustive equal-degree splitting by trial division over all monic
/// polynomials of degree d; only viable for tiny p^d, which is all the
/// fallback needs to cover.
fn equal_degree_bruteforce(f: &FpPoly, d: usize) -> Vec<FpPoly> {
    let p = f.p();
    let mut factors = Vec::new();
    let mut rest = f.clone();
    let total = (p as u128).pow(d as u32);
    let mut idx = 0u128;
    while rest.degree() > d && idx < total {
        let mut coeffs = Vec::with_capacity(d + 1);
        let mut k = idx;
        for _ in 0..d {
            coeffs.push((k % p as u128) as u64);
            k /= p as u128;
        }
        coeffs.push(1);
        let cand = FpPoly::from_coeffs(p, coeffs);
        if rest.rem(&cand).is_zero() {
            factors.push(cand.clone());
            rest = rest.div_rem(&cand).0;
        } else {
            idx += 1;
        }
    }
    if rest.degree() >= 1 {
        factors.push(rest);
    }
    factors
}

/// Cantor-Zassenhaus equal-degree splitting for odd p.  Deterministic probe
/// sequence: linear shifts first, then higher-degree probes.
fn equal_degree_cz(f: &FpPoly, d: usize) -> Vec<FpPoly> {
    let p = f.p();
    if f.degree() == d {
        return vec![f.clone()];
    }
    if p == 2 || (p as u128).pow(d as u32) < 4_000 {
        return equal_degree_bruteforce(f, d);
    }
    let exp = ((p as u128).pow(d as u32) - 1) / 2;
    let mut probe_seed = 0u64;
    loop {
        probe_seed += 1;
        // probe polynomial: t^k + seed-derived lower terms, degree < 2d
        let mut coeffs = vec![0u64; (2 * d).min(f.degree())];
        let mut s = probe_seed;
        for c in coeffs.iter_mut() {
            *c = s % p;
            s = s / p + 1;
        }
        coeffs.push(1);
        let probe = FpPoly::from_coeffs(p, coeffs);
        let h = probe.pow_mod(exp, f).sub(&FpPoly::one(p));
        let g = f.gcd(&h);
        if g.degree() > 0 && g.degree() < f.degree() {
            let rest = f.div_rem(&g).0;
            let mut out = equal_degree_cz(&g, d);
            out.extend(equal_degree_cz(&rest, d));
            return out;
        }
        if probe_seed > 200 {
            // pathological: fall back to exhaustive search
            return equal_degree_bruteforce(f, d);
        }
    }
}

/// Full factorization of a nonzero polynomial over F_p: monic irreducible
/// factors with multiplicities, product equal to the input up to its leading
/// unit.  Deterministic order: by degree, then lexicographic coefficients.
pub fn factor_mod_p(f: &FpPoly) -> Vec<(FpPoly, u32)> {
    assert!(!f.is_zero(), "factoring the zero polynomial");
    let mut out: Vec<(FpPoly, u32)> = Vec::new();
    for (sqfree, mult) in squarefree_decomposition(f) {
        for (prod, d) in distinct_degree(&sqfree) {
            for irr in equal_degree_cz(&prod, d) {
                out.push((irr.make_monic(), mult));
            }
        }
    }
    out.sort_by(|a, b| {
        a.0.degree()
            .cmp(&b.0.degree())
            .then_with(|| a.0.coeffs().cmp(b.0.coeffs()))
    });
    out
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in (0..self.coeffs.len()).rev() {
            let c = self.coeffs[i];
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c != 1 || i == 0 {
                write!(f, "{}", c)?;
            }
            if i >= 1 {
                if c != 1 {
                    write!(f, "*")?;
                }
                write!(f, "t")?;
                if i >= 2 {
                    write!(f, "^{}", i)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self, self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64, coeffs: &[u64]) -> FpPoly {
        FpPoly::from_coeffs(p, coeffs.to_vec())
    }

    fn recompose(p: u64, factors: &[(FpPoly, u32)], lead: u64) -> FpPoly {
        let mut acc = fp(p, &[lead]);
        for (g, m) in factors {
            for _ in 0..*m {
                acc = acc.mul(g);
            }
        }
        acc
    }

    #[test]
    fn factor_t2_minus_1_mod_3() {
        // t^2 - 1 = (t - 1)(t + 1) over F_3
        let f = fp(3, &[2, 0, 1]);
        let factors = factor_mod_p(&f);
        assert_eq!(factors.len(), 2);
        assert!(factors.iter().all(|(_, m)| *m == 1));
        assert_eq!(recompose(3, &factors, 1), f);
    }

    #[test]
    fn factor_t2_plus_1_mod_3_is_irreducible() {
        let f = fp(3, &[1, 0, 1]);
        let factors = factor_mod_p(&f);
        assert_eq!(factors.len(), 1);
        assert_eq!(factors[0], (f, 1));
    }

    #[test]
    fn factor_t3_minus_2_mod_5() {
        // t^3 - 2 = (t - 3)(t^2 + 3t + 4) over F_5
        let f = fp(5, &[3, 0, 0, 1]);
        let factors = factor_mod_p(&f);
        assert_eq!(factors.len(), 2);
        assert_eq!(factors[0].0, fp(5, &[2, 1])); // t + 2 = t - 3
        assert_eq!(factors[1].0, fp(5, &[4, 3, 1]));
        assert_eq!(recompose(5, &factors, 1), f);
    }

    #[test]
    fn factor_with_multiplicity_and_unit() {
        // 2 (t - 1)^2 (t^2 + 1) over F_3
        let lin = fp(3, &[2, 1]);
        let quad = fp(3, &[1, 0, 1]);
        let f = fp(3, &[2]).mul(&lin).mul(&lin).mul(&quad);
        let factors = factor_mod_p(&f);
        assert_eq!(recompose(3, &factors, 2), f);
        assert!(factors.contains(&(lin, 2)));
        assert!(factors.contains(&(quad, 1)));
    }

    #[test]
    fn factor_pth_power() {
        // (t + 1)^3 over F_3 has zero derivative
        let lin = fp(3, &[1, 1]);
        let f = lin.mul(&lin).mul(&lin);
        let factors = factor_mod_p(&f);
        assert_eq!(factors, vec![(lin, 3)]);
    }

    #[test]
    fn irreducibility_brute_force_check_small_degrees() {
        // every reported irreducible factor of degree <= 4 has no monic
        // divisor of smaller positive degree
        let polys = [fp(3, &[1, 2, 0, 1]), fp(5, &[2, 0, 0, 0, 1]), fp(7, &[3, 1, 1])];
        for f in polys {
            for (g, _) in factor_mod_p(&f) {
                let d = g.degree();
                if d > 4 || d == 1 {
                    continue;
                }
                let p = g.p();
                for k in 1..d {
                    let total = (p as u64).pow(k as u32);
                    for idx in 0..total {
                        let mut coeffs = Vec::new();
                        let mut v = idx;
                        for _ in 0..k {
                            coeffs.push(v % p);
                            v /= p;
                        }
                        coeffs.push(1);
                        let cand = FpPoly::from_coeffs(p, coeffs);
                        assert!(
                            !g.rem(&cand).is_zero(),
                            "{g:?} is divisible by {cand:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn from_qpoly_reduces_rationals() {
        // (1/2) t + 1 over F_5: 1/2 = 3
        let q = QPoly::from_coeffs(vec![crate::arith::rat::rat_int(1), crate::arith::rat::rat(1, 2)]);
        let f = FpPoly::from_qpoly(&q, 5).unwrap();
        assert_eq!(f, fp(5, &[1, 3]));
        let bad = QPoly::from_coeffs(vec![crate::arith::rat::rat(1, 5)]);
        assert!(FpPoly::from_qpoly(&bad, 5).is_err());
    }
}
