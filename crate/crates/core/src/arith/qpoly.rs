//! Dense univariate polynomials over exact rationals.
//!
//! The variable is always printed as `t`.  Coefficients are stored
//! lowest-degree first; the zero polynomial has an empty coefficient vector.
//! Resultants are computed by the subresultant pseudo-remainder sequence over
//! integers after clearing denominators, so nothing ever leaves exact
//! arithmetic.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rat::{p_valuation, ExtRat, Rat};
use crate::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QPoly {
    coeffs: Vec<Rat>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        QPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = QPoly { coeffs: vec![c] };
        p.normalize();
        p
    }

    /// Build from coefficients, lowest degree first.
    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        let mut p = QPoly { coeffs };
        p.normalize();
        p
    }

    pub fn from_int_coeffs(coeffs: &[i64]) -> Self {
        QPoly::from_coeffs(coeffs.iter().map(|&c| super::rat::rat_int(c)).collect())
    }

    /// The monomial t.
    pub fn var() -> Self {
        QPoly::from_int_coeffs(&[0, 1])
    }

    /// t - c
    pub fn linear(c: Rat) -> Self {
        QPoly::from_coeffs(vec![-c, Rat::one()])
    }

    fn normalize(&mut self) {
        while self.coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree; the zero polynomial has no degree and panics, so callers must
    /// rule it out first.
    pub fn degree(&self) -> usize {
        assert!(!self.is_zero(), "degree of the zero polynomial");
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn leading_coeff(&self) -> Rat {
        assert!(!self.is_zero());
        self.coeffs.last().unwrap().clone()
    }

    pub fn is_monic(&self) -> bool {
        !self.is_zero() && self.leading_coeff().is_one()
    }

    /// All coefficient denominators prime to p.
    pub fn is_p_integral(&self, p: u64) -> bool {
        self.coeffs
            .iter()
            .all(|c| !(c.denom() % BigInt::from(p)).is_zero())
    }

    /// Minimum p-adic valuation over the coefficients: the Gauss valuation.
    pub fn gauss_valuation(&self, p: u64) -> ExtRat {
        self.coeffs
            .iter()
            .map(|c| p_valuation(c, p))
            .fold(ExtRat::Infinity, ExtRat::min)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, c: &Rat) -> QPoly {
        QPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Substitute t -> a + b*t.
    pub fn compose_linear(&self, a: &Rat, b: &Rat) -> QPoly {
        let mut acc = QPoly::zero();
        let sub = QPoly::from_coeffs(vec![a.clone(), b.clone()]);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &sub) + &QPoly::constant(c.clone());
        }
        acc
    }

    pub fn pow(&self, mut e: usize) -> QPoly {
        let mut base = self.clone();
        let mut acc = QPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Euclidean division; the divisor must be nonzero.
    pub fn div_rem(&self, divisor: &QPoly) -> (QPoly, QPoly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.is_zero() || self.degree() < divisor.degree() {
            return (QPoly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.leading_coeff();
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let q = &rem[i] / &lead;
            quot[i - dd] = q.clone();
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                let tgt = i - dd + j;
                rem[tgt] = &rem[tgt] - &(dc * &q);
            }
        }
        (QPoly::from_coeffs(quot), QPoly::from_coeffs(rem))
    }

    pub fn divides(&self, other: &QPoly) -> bool {
        if other.is_zero() {
            return true;
        }
        if self.is_zero() {
            return false;
        }
        other.div_rem(self).1.is_zero()
    }

    /// phi-adic expansion: returns a_0, a_1, ... with self = sum a_i phi^i and
    /// deg a_i < deg phi.
    pub fn phi_adic(&self, phi: &QPoly) -> Vec<QPoly> {
        assert!(!phi.is_zero() && phi.degree() >= 1, "expansion base must be nonconstant");
        let mut out = Vec::new();
        let mut cur = self.clone();
        if cur.is_zero() {
            return vec![QPoly::zero()];
        }
        while !cur.is_zero() {
            let (q, r) = cur.div_rem(phi);
            out.push(r);
            cur = q;
        }
        out
    }

    /// Clear denominators: returns (integer coefficient vector, scale) with
    /// self * scale having those integer coefficients.
    fn to_int_scaled(&self) -> (Vec<BigInt>, BigInt) {
        let mut scale = BigInt::one();
        for c in &self.coeffs {
            scale = scale.lcm(c.denom());
        }
        let ints = self
            .coeffs
            .iter()
            .map(|c| (c * Rat::from_integer(scale.clone())).to_integer())
            .collect();
        (ints, scale)
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        QPoly::from_coeffs(out)
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) - other.coeff(i));
        }
        QPoly::from_coeffs(out)
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        QPoly::from_coeffs(out)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly::from_coeffs(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in (0..self.coeffs.len()).rev() {
            let c = &self.coeffs[i];
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else if sign == "-" {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let show_coeff = !mag.is_one() || i == 0;
            if show_coeff {
                write!(f, "{}", mag)?;
            }
            if i >= 1 {
                if show_coeff {
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

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn rat_pow(base: &Rat, e: usize) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc = acc * base;
    }
    acc
}

/// Resultant of two nonzero rational polynomials, by the polynomial remainder
/// sequence over exact rationals:
///   Res(f, g) = (-1)^(deg f * deg g) Res(g, f)
///   Res(f, g) = lc(f)^(deg g - deg r) Res(f, r)   for r = g mod f
///   Res(f, c) = c^(deg f)                          for constant c.
pub fn resultant(f: &QPoly, g: &QPoly) -> Rat {
    assert!(!f.is_zero() && !g.is_zero(), "resultant of zero polynomial");
    let mut a = f.clone();
    let mut b = g.clone();
    let mut acc = Rat::one();
    let mut sign_neg = false;
    loop {
        if b.degree() == 0 {
            acc = acc * rat_pow(&b.coeff(0), a.degree());
            return if sign_neg { -acc } else { acc };
        }
        if a.degree() == 0 {
            acc = acc * rat_pow(&a.coeff(0), b.degree());
            return if sign_neg { -acc } else { acc };
        }
        if a.degree() < b.degree() {
            if a.degree() % 2 == 1 && b.degree() % 2 == 1 {
                sign_neg = !sign_neg;
            }
            std::mem::swap(&mut a, &mut b);
            continue;
        }
        // deg a >= deg b >= 1: reduce a modulo b.
        let r = a.div_rem(&b).1;
        if r.is_zero() {
            return Rat::zero();
        }
        // Res(b, a) = lc(b)^(deg a - deg r) Res(b, r); first flip to (b, a).
        if a.degree() % 2 == 1 && b.degree() % 2 == 1 {
            sign_neg = !sign_neg;
        }
        acc = acc * rat_pow(&b.leading_coeff(), a.degree() - r.degree());
        a = b;
        b = r;
    }
}

/// Resultant as the Sylvester determinant, computed by fraction-free Bareiss
/// elimination over integers after clearing denominators.  This is the
/// independent second route used to validate `resultant`.
pub fn resultant_sylvester(f: &QPoly, g: &QPoly) -> Rat {
    assert!(!f.is_zero() && !g.is_zero());
    if f.degree() == 0 {
        return rat_pow(&f.coeff(0), g.degree());
    }
    if g.degree() == 0 {
        return rat_pow(&g.coeff(0), f.degree());
    }
    let (fi, fs) = f.to_int_scaled();
    let (gi, gs) = g.to_int_scaled();
    let m = fi.len() - 1;
    let n = gi.len() - 1;
    let size = m + n;
    // Sylvester matrix: n rows of f's coefficients, m rows of g's.
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    for row in 0..n {
        for (k, c) in fi.iter().rev().enumerate() {
            mat[row][row + k] = c.clone();
        }
    }
    for row in 0..m {
        for (k, c) in gi.iter().rev().enumerate() {
            mat[n + row][row + k] = c.clone();
        }
    }
    // Bareiss fraction-free elimination.
    let mut sign_neg = false;
    let mut prev = BigInt::one();
    for k in 0..size - 1 {
        if mat[k][k].is_zero() {
            let swap = (k + 1..size).find(|&i| !mat[i][k].is_zero());
            match swap {
                Some(i) => {
                    mat.swap(k, i);
                    sign_neg = !sign_neg;
                }
                None => return Rat::zero(),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let num = &mat[i][j] * &mat[k][k] - &mat[i][k] * &mat[k][j];
                debug_assert!((&num % &prev).is_zero());
                mat[i][j] = num / &prev;
            }
            mat[i][k] = BigInt::zero();
        }
        prev = mat[k][k].clone();
    }
    let det = mat[size - 1][size - 1].clone();
    let det = if sign_neg { -det } else { det };
    Rat::from_integer(det) / (rat_pow(&Rat::from_integer(fs), n) * rat_pow(&Rat::from_integer(gs), m))
}

/// v_K(phi(theta)) for any root theta of the monic polynomial g, computed via
/// the resultant: the sum of v(phi(theta)) over all roots is v(Res(g, phi)),
/// and over a complete field the conjugate roots share one valuation.
/// Returns `inf` exactly when phi and g share a root.
pub fn root_valuation(phi: &QPoly, g: &QPoly, p: u64) -> Result<ExtRat, Error> {
    if phi.is_zero() {
        return Err(Error::InvalidInput("root_valuation of zero polynomial".into()));
    }
    if !g.is_monic() || !g.is_p_integral(p) {
        return Err(Error::InvalidInput(
            "root_valuation requires a monic p-integral reference polynomial".into(),
        ));
    }
    let res = resultant(g, phi);
    match p_valuation(&res, p) {
        ExtRat::Infinity => Ok(ExtRat::Infinity),
        ExtRat::Finite(v) => Ok(ExtRat::Finite(
            v / Rat::from_integer(BigInt::from(g.degree())),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat::{rat, rat_int};

    #[test]
    fn display_matches_convention() {
        let f = QPoly::from_int_coeffs(&[-9, 0, 0, 1]);
        assert_eq!(f.to_string(), "t^3 - 9");
        let g = QPoly::from_coeffs(vec![rat(1, 2), rat_int(-2), rat_int(1)]);
        assert_eq!(g.to_string(), "t^2 - 2*t + 1/2");
        assert_eq!(QPoly::var().to_string(), "t");
        assert_eq!(QPoly::zero().to_string(), "0");
    }

    #[test]
    fn division_and_expansion() {
        let f = QPoly::from_int_coeffs(&[-9, 0, 0, 1]);
        let phi = QPoly::var();
        let exp = f.phi_adic(&phi);
        assert_eq!(exp.len(), 4);
        assert_eq!(exp[0], QPoly::from_int_coeffs(&[-9]));
        assert_eq!(exp[3], QPoly::one());
        // reassemble
        let mut acc = QPoly::zero();
        for a in exp.iter().rev() {
            acc = &(&acc * &phi) + a;
        }
        assert_eq!(acc, f);
    }

    #[test]
    fn resultant_small_cases() {
        // Res(t^2 - 3, t) = -3 up to sign: product of roots of t^2-3 evaluated in t
        let g = QPoly::from_int_coeffs(&[-3, 0, 1]);
        let phi = QPoly::var();
        let r = resultant(&g, &phi);
        assert_eq!(r, rat_int(-3));
        // Res of two linear polys (t-a, t-b) = b - a evaluated appropriately
        let a = QPoly::from_int_coeffs(&[-2, 1]);
        let b = QPoly::from_int_coeffs(&[-5, 1]);
        let r = resultant(&a, &b);
        assert!(r == rat_int(3) || r == rat_int(-3), "got {r}");
        // shared root -> 0
        let r = resultant(&a, &a);
        assert!(r.is_zero());
    }

    #[test]
    fn resultant_two_routes_agree() {
        let polys = [
            QPoly::from_int_coeffs(&[-9, 0, 0, 1]),
            QPoly::from_int_coeffs(&[3, 1]),
            QPoly::from_int_coeffs(&[1, 0, 1]),
            QPoly::from_coeffs(vec![rat(1, 2), rat_int(0), rat_int(1), rat_int(2)]),
            QPoly::from_int_coeffs(&[-1, 5, 0, 0, 1]),
        ];
        for f in &polys {
            for g in &polys {
                if f == g {
                    continue;
                }
                assert_eq!(
                    resultant(f, g),
                    resultant_sylvester(f, g),
                    "resultant routes disagree for {f} and {g}"
                );
            }
        }
    }

    #[test]
    fn resultant_agrees_with_root_products() {
        // g = (t-1)(t-2)(t-6) and phi = t^2 + 1:
        // Res(g, phi) = phi(1)*phi(2)*phi(6) = 2*5*37 = 370
        let g = &(&QPoly::from_int_coeffs(&[-1, 1]) * &QPoly::from_int_coeffs(&[-2, 1]))
            * &QPoly::from_int_coeffs(&[-6, 1]);
        let phi = QPoly::from_int_coeffs(&[1, 0, 1]);
        assert_eq!(resultant(&g, &phi), rat_int(370));
    }

    #[test]
    fn root_valuation_examples() {
        // (t, t^2 - 3, p = 3) -> 1/2
        let g = QPoly::from_int_coeffs(&[-3, 0, 1]);
        assert_eq!(
            root_valuation(&QPoly::var(), &g, 3).unwrap(),
            ExtRat::Finite(rat(1, 2))
        );
        // (t, t^3 - 9, p = 3) -> 2/3
        let g = QPoly::from_int_coeffs(&[-9, 0, 0, 1]);
        assert_eq!(
            root_valuation(&QPoly::var(), &g, 3).unwrap(),
            ExtRat::Finite(rat(2, 3))
        );
        // shared root -> inf
        let lin = QPoly::from_int_coeffs(&[-1, 1]);
        assert_eq!(root_valuation(&lin, &lin, 5).unwrap(), ExtRat::Infinity);
    }

    #[test]
    fn root_valuation_is_additive_in_phi() {
        let g = QPoly::from_int_coeffs(&[-9, 0, 0, 1]);
        let phi = QPoly::var();
        let psi = QPoly::from_int_coeffs(&[3, 1]);
        let prod = &phi * &psi;
        let a = root_valuation(&phi, &g, 3).unwrap();
        let b = root_valuation(&psi, &g, 3).unwrap();
        let c = root_valuation(&prod, &g, 3).unwrap();
        assert_eq!(c, a + b);
    }

    #[test]
    fn compose_linear_substitution() {
        // f(t) = t^2 - 9, t -> 3t: 9t^2 - 9
        let f = QPoly::from_int_coeffs(&[-9, 0, 1]);
        let g = f.compose_linear(&rat_int(0), &rat_int(3));
        assert_eq!(g, QPoly::from_int_coeffs(&[-9, 0, 9]));
        // t -> 1 + t on (t-1): t
        let h = QPoly::from_int_coeffs(&[-1, 1]).compose_linear(&rat_int(1), &rat_int(1));
        assert_eq!(h, QPoly::var());
    }
}
