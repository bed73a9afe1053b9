//! Mac Lane inductive (pseudo)valuations on the polynomial ring over a
//! p-adically valued base.
//!
//! A valuation is presented as a chain of augmentations over the Gauss
//! valuation `v0`:
//!
//! ```text
//! [v0, v1(phi_1) = lambda_1, ..., vn(phi_n) = lambda_n]
//! ```
//!
//! where each `phi_i` is a monic integral key polynomial over the previous
//! stage and the values `lambda_i` strictly improve on what the previous
//! stage assigns.  In the minimal presentations kept here the key degrees
//! strictly increase and `deg(phi_i)` divides `deg(phi_{i+1})`.  A trailing
//! value of `inf` makes the chain a pseudovaluation: it sends exactly the
//! multiples of its last key to `inf`.
//!
//! The approximation chain `maclane_chain` attaches to every monic
//! irreducible polynomial the unique valuation over which it is a proper key
//! polynomial.  The residue field is fixed at F_p throughout: inputs whose
//! residual data would force an extension of F_p are rejected with
//! `RequiresResidueExtension`, and inputs that split over the p-adic base
//! with `ReducibleInput`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::arith::fppoly::{factor_mod_p, FpPoly};
use crate::arith::qpoly::{root_valuation, QPoly};
use crate::arith::rat::{denominator_u64, lcm_u64, rat_int, ExtRat, Rat};
use crate::Error;

/// One augmentation step: the key polynomial and its assigned value.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ChainEntry {
    pub key: QPoly,
    pub value: ExtRat,
}

/// A Mac Lane (pseudo)valuation.  The empty chain is the Gauss valuation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MacLaneVal {
    p: u64,
    chain: Vec<ChainEntry>,
}

impl MacLaneVal {
    /// The Gauss valuation v0.
    pub fn gauss(p: u64) -> Self {
        MacLaneVal { p, chain: vec![] }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Inductive length n of the minimal presentation.
    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_gauss(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn chain(&self) -> &[ChainEntry] {
        &self.chain
    }

    /// True for pseudovaluations (trailing value `inf`).
    pub fn is_pseudo(&self) -> bool {
        self.chain
            .last()
            .map(|e| e.value.is_infinite())
            .unwrap_or(false)
    }

    pub fn last_key(&self) -> Option<&QPoly> {
        self.chain.last().map(|e| &e.key)
    }

    pub fn last_value(&self) -> Option<&ExtRat> {
        self.chain.last().map(|e| &e.value)
    }

    /// The prefix valuation using the first `i` chain entries.
    pub fn prefix(&self, i: usize) -> MacLaneVal {
        MacLaneVal {
            p: self.p,
            chain: self.chain[..i].to_vec(),
        }
    }

    /// All proper prefixes `[v0, v_1, ..., v_{n-1}]`, shortest first.
    pub fn predecessors(&self) -> Vec<MacLaneVal> {
        (0..self.chain.len()).map(|i| self.prefix(i)).collect()
    }

    fn val_level(&self, level: usize, g: &QPoly) -> ExtRat {
        if g.is_zero() {
            return ExtRat::Infinity;
        }
        if level == 0 {
            return g.gauss_valuation(self.p);
        }
        let entry = &self.chain[level - 1];
        if g.degree() < entry.key.degree() {
            return self.val_level(level - 1, g);
        }
        let expansion = g.phi_adic(&entry.key);
        let mut best = ExtRat::Infinity;
        for (i, a) in expansion.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let term = if i == 0 {
                self.val_level(level - 1, a)
            } else {
                self.val_level(level - 1, a) + i * &entry.value
            };
            best = best.min(term);
        }
        best
    }

    /// v(g) by the recursive key-adic expansion.  Zero input is rejected.
    pub fn valuate(&self, g: &QPoly) -> Result<ExtRat, Error> {
        if g.is_zero() {
            return Err(Error::InvalidInput("valuation of the zero polynomial".into()));
        }
        Ok(self.val_level(self.chain.len(), g))
    }

    /// Infallible valuation with v(0) = inf, for internal use.
    pub(crate) fn val(&self, g: &QPoly) -> ExtRat {
        self.val_level(self.chain.len(), g)
    }

    /// e_v: the index of the value group over Z, i.e. the lcm of the value
    /// denominators.  Pseudovaluations have no ramification index.
    pub fn ram_index(&self) -> Result<u64, Error> {
        if self.is_pseudo() {
            return Err(Error::InvalidInput(
                "ramification index of a pseudovaluation".into(),
            ));
        }
        Ok(self.ram_index_prefix(self.chain.len()))
    }

    /// e of the prefix with the first `i` entries (all finite by invariant
    /// whenever i < n, or i = n on a valuation).
    pub fn ram_index_prefix(&self, i: usize) -> u64 {
        let mut e = 1u64;
        for entry in &self.chain[..i] {
            let v = entry
                .value
                .expect_finite("prefix of a chain has finite values");
            e = lcm_u64(e, denominator_u64(v));
        }
        e
    }

    /// The partial order: v <= w iff w(phi_i) >= lambda_i for every entry of
    /// v's chain.  Sufficient by ultrametric induction on key-adic
    /// expansions; the sampling oracle in the test suite cross-checks it.
    pub fn leq(&self, other: &MacLaneVal) -> bool {
        debug_assert_eq!(self.p, other.p);
        self.chain
            .iter()
            .all(|e| other.val(&e.key) >= e.value)
    }

    /// Equality as valuations, independent of presentation.
    pub fn same_valuation(&self, other: &MacLaneVal) -> bool {
        self.leq(other) && other.leq(self)
    }

    /// Append or merge an augmentation without key validation; values must
    /// already be consistent (value >= current value of the key).
    pub(crate) fn augment_unchecked(&self, key: QPoly, value: ExtRat) -> MacLaneVal {
        let cur = self.val(&key);
        debug_assert!(value >= cur);
        if value == cur {
            return self.clone();
        }
        let mut chain = self.chain.clone();
        if let Some(last) = chain.last() {
            if last.key.degree() == key.degree() {
                // same-degree augmentation replaces the last entry
                chain.pop();
            }
        }
        chain.push(ChainEntry { key, value });
        MacLaneVal { p: self.p, chain }
    }

    /// The augmented valuation `[v, v'(phi) = lambda]`, normalized to a
    /// minimal presentation.  `phi` must be a key polynomial over `v` and
    /// `lambda >= v(phi)`.
    pub fn augment(&self, phi: &QPoly, lambda: ExtRat) -> Result<MacLaneVal, Error> {
        if self.is_pseudo() {
            return Err(Error::InvalidAugmentation(
                "cannot augment a pseudovaluation".into(),
            ));
        }
        if !phi.is_monic() || !phi.is_p_integral(self.p) {
            return Err(Error::NotKeyPolynomial(format!(
                "{phi} is not monic and integral"
            )));
        }
        let cur = self.val(phi);
        if lambda < cur {
            return Err(Error::InvalidAugmentation(format!(
                "value {lambda} is below v({phi}) = {cur}"
            )));
        }
        // Key validation.
        let is_key = match self.last_key() {
            None => {
                if phi.degree() == 1 {
                    true
                } else {
                    // nonlinear keys over v0 do not exist; report precisely
                    maclane_chain(phi, self.p)?.same_valuation(self)
                }
            }
            Some(last) => {
                if phi == last {
                    true
                } else if phi.degree() == last.degree() {
                    // equivalent key at the same level: phi = last + c with
                    // v(c) >= v(last)
                    let diff = phi - last;
                    diff.is_zero() || self.val(&diff) >= self.val(last)
                } else if phi.degree() > last.degree() {
                    is_proper_key(self, phi)?
                } else {
                    false
                }
            }
        };
        if !is_key {
            return Err(Error::NotKeyPolynomial(format!(
                "{phi} is not a key polynomial over {self}"
            )));
        }
        Ok(self.augment_unchecked(phi.clone(), lambda))
    }

    /// The infimum: the maximal pseudovaluation below both arguments.  Scans
    /// this chain for the first entry whose value the other valuation fails
    /// to reach; everything below a fixed valuation is totally ordered, so
    /// clamping that one entry is enough.
    pub fn inf(&self, other: &MacLaneVal) -> MacLaneVal {
        debug_assert_eq!(self.p, other.p);
        for (i, entry) in self.chain.iter().enumerate() {
            let t = other.val(&entry.key);
            if t < entry.value {
                let prefix = self.prefix(i);
                let below = prefix.val(&entry.key);
                debug_assert!(t >= below);
                if t > below {
                    return prefix.augment_unchecked(entry.key.clone(), t);
                }
                return prefix;
            }
        }
        self.clone()
    }

    /// Canonical display form, the golden-test comparison format.
    pub fn canonical_string(&self) -> String {
        if self.chain.is_empty() {
            return "v0".to_string();
        }
        let mut s = String::from("[v0");
        for (i, e) in self.chain.iter().enumerate() {
            s.push_str(&format!(", v{}({}) = {}", i + 1, e.key, e.value));
        }
        s.push(']');
        s
    }
}

impl fmt::Display for MacLaneVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_string())
    }
}

impl fmt::Debug for MacLaneVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_string())
    }
}

/// The pseudovaluation sending the monic irreducible `g` to `inf`.
pub fn pseudovaluation(g: &QPoly, p: u64) -> Result<MacLaneVal, Error> {
    let base = maclane_chain(g, p)?;
    Ok(base.augment_unchecked(g.clone(), ExtRat::Infinity))
}

/// Check the structural conditions a proper key polynomial must satisfy
/// over `v` (the key-adic expansion value identities and the degree ratio).
fn check_key_structure(v: &MacLaneVal, g: &QPoly) -> Result<(), Error> {
    if v.is_gauss() {
        if g.degree() != 1 {
            return Err(Error::ReducibleInput(format!(
                "{g} cannot be a key over the Gauss valuation"
            )));
        }
        return Ok(());
    }
    let phi = v.last_key().unwrap();
    let lam = v.last_value().unwrap().clone();
    let e = g.degree() / phi.degree();
    if e * phi.degree() != g.degree() {
        return Err(Error::ReducibleInput(format!(
            "degree of {g} is not a multiple of its approximant degree"
        )));
    }
    let target = e * &lam;
    let expansion = g.phi_adic(phi);
    let a0 = &expansion[0];
    if a0.is_zero() || v.val(a0) != target {
        return Err(Error::ReducibleInput(format!(
            "constant term of the key-adic expansion of {g} has the wrong value"
        )));
    }
    for (i, a) in expansion.iter().enumerate().skip(1) {
        if a.is_zero() {
            continue;
        }
        let term = v.val(a) + i * &lam;
        if term < target {
            return Err(Error::ReducibleInput(format!(
                "interior term {i} of the key-adic expansion of {g} is too small"
            )));
        }
    }
    // deg(g)/deg(phi_n) must equal e(v_n / v_{n-1}).
    let e_v = v.ram_index()?;
    let e_prev = v.ram_index_prefix(v.len() - 1);
    if e_v % e_prev != 0 || (e_v / e_prev) as usize != e {
        return Err(Error::ReducibleInput(format!(
            "ramification jump of {g} does not match its degree ratio"
        )));
    }
    Ok(())
}

/// True iff `g` is a proper key polynomial over `v`, i.e. `v` is the unique
/// valuation `maclane_chain(g)` attaches to `g`.
pub fn is_proper_key(v: &MacLaneVal, g: &QPoly) -> Result<bool, Error> {
    if g.is_zero() || !g.is_monic() || !g.is_p_integral(v.p()) {
        return Err(Error::InvalidInput(
            "key polynomials are monic and integral".into(),
        ));
    }
    let vg = maclane_chain(g, v.p())?;
    if !vg.same_valuation(v) {
        return Ok(false);
    }
    check_key_structure(v, g).map_err(|e| {
        Error::StructureViolation(format!(
            "approximation chain of {g} violates the key structure conditions: {e}"
        ))
    })?;
    Ok(true)
}

/// Find a monomial pi^a * prod phi_j^{b_j} over the strictly earlier keys of
/// `v` with the exact value `target` and degree < `max_degree`.  Returns the
/// monomial as a polynomial.
fn value_monomial(v: &MacLaneVal, target: &Rat, max_degree: usize) -> Result<QPoly, Error> {
    let earlier: Vec<(&QPoly, &Rat)> = v.chain()[..v.len().saturating_sub(1)]
        .iter()
        .map(|e| (&e.key, e.value.expect_finite("earlier chain values are finite")))
        .collect();
    // Exponent bounds: each b_j below the relative ramification jump suffices
    // for a mixed-radix representation; widen if the residual search fails.
    for widen in [1u64, 4u64] {
        let mut bounds = Vec::new();
        for j in 0..earlier.len() {
            let rel = v.ram_index_prefix(j + 1) / v.ram_index_prefix(j);
            bounds.push((rel * widen) as usize);
        }
        let mut best: Option<(usize, Vec<usize>, BigInt)> = None;
        let mut counters = vec![0usize; earlier.len()];
        loop {
            // evaluate current exponent vector
            let mut value = target.clone();
            let mut degree = 0usize;
            for (j, &b) in counters.iter().enumerate() {
                value -= Rat::from_integer(BigInt::from(b)) * earlier[j].1;
                degree += b * earlier[j].0.degree();
            }
            if degree < max_degree && value.is_integer() && !value.is_negative() {
                let a = value.to_integer();
                let cand = (degree, counters.clone(), a);
                let better = match &best {
                    None => true,
                    Some(b) => cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1),
                };
                if better {
                    best = Some(cand);
                }
            }
            // increment mixed counter
            let mut k = 0;
            loop {
                if k == counters.len() {
                    break;
                }
                counters[k] += 1;
                if counters[k] < bounds[k] {
                    break;
                }
                counters[k] = 0;
                k += 1;
            }
            if k == counters.len() {
                break;
            }
        }
        if let Some((_, bs, a)) = best {
            let a = num_traits::ToPrimitive::to_usize(&a).ok_or_else(|| {
                Error::StructureViolation("monomial exponent out of range".into())
            })?;
            let mut ppow = BigInt::one();
            for _ in 0..a {
                ppow *= BigInt::from(v.p());
            }
            let mut m = QPoly::constant(Rat::from_integer(ppow));
            for (j, &b) in bs.iter().enumerate() {
                m = &m * &earlier[j].0.pow(b);
            }
            return Ok(m);
        }
    }
    Err(Error::StructureViolation(format!(
        "no monomial of value {target} below degree {max_degree} over {v}"
    )))
}

/// The Mac Lane approximation: the unique valuation over which the monic
/// irreducible `g` is a proper key polynomial.
///
/// The loop keeps a pair (valuation, key): the key's exact value on the
/// roots of `g` is read off a resultant, the valuation is augmented, and the
/// next key is the unique monic lift of the residual root — found by testing
/// the p - 1 candidate residue classes directly.  Termination is reached
/// when the value group index matches deg(g).
pub fn maclane_chain(g: &QPoly, p: u64) -> Result<MacLaneVal, Error> {
    if g.is_zero() || !g.is_monic() {
        return Err(Error::InvalidInput("approximation target must be monic".into()));
    }
    if !g.is_p_integral(p) {
        return Err(Error::InvalidInput(format!(
            "{g} is not integral at p = {p}"
        )));
    }
    if g.degree() == 0 {
        return Err(Error::InvalidInput("approximation target must be nonconstant".into()));
    }
    if g.degree() == 1 {
        return Ok(MacLaneVal::gauss(p));
    }

    // Stage 1: the residual root mod p.
    let gbar = FpPoly::from_qpoly(g, p)?;
    let factors = factor_mod_p(&gbar);
    if factors.len() > 1 {
        return Err(Error::ReducibleInput(format!(
            "{g} has {} distinct residual factors mod {p}",
            factors.len()
        )));
    }
    let (res_factor, _) = &factors[0];
    if res_factor.degree() > 1 {
        return Err(Error::RequiresResidueExtension(format!(
            "residual factor of {g} mod {p} has degree {}",
            res_factor.degree()
        )));
    }
    let root = (p - res_factor.coeff(0)) % p;
    let mut phi = QPoly::linear(rat_int(root as i64));
    let mut v = MacLaneVal::gauss(p);

    for _round in 0..200 {
        let lam = root_valuation(&phi, g, p)?;
        if lam.is_infinite() {
            // phi divides g but deg(phi) < deg(g)
            return Err(Error::ReducibleInput(format!(
                "{g} is divisible by its approximant {phi}"
            )));
        }
        v = v.augment_unchecked(phi.clone(), lam.clone());
        let e_v = v.ram_index()?;
        if e_v as usize == g.degree() {
            check_key_structure(&v, g)?;
            return Ok(v);
        }
        if e_v as usize > g.degree() || g.degree() % e_v as usize != 0 {
            return Err(Error::ReducibleInput(format!(
                "value group of the approximation chain of {g} overshoots its degree"
            )));
        }
        // Next key: degree e_v, as phi^e_rel plus a residual correction.
        let lam = lam.expect_finite("augmentation value is finite").clone();
        let e_rel = (e_v as usize) / phi.degree();
        let target = Rat::from_integer(BigInt::from(e_rel)) * &lam;
        let monomial = value_monomial(&v, &target, e_v as usize)?;
        let base = phi.pow(e_rel);
        let mut winners = Vec::new();
        for u in 1..p {
            let cand = &base + &monomial.scale(&rat_int(u as i64));
            let rv = root_valuation(&cand, g, p)?;
            if rv > ExtRat::Finite(target.clone()) {
                winners.push(cand);
            }
        }
        match winners.len() {
            0 => {
                return Err(Error::RequiresResidueExtension(format!(
                    "residual polynomial of {g} over {v} has no root in the prime field"
                )))
            }
            1 => phi = winners.pop().unwrap(),
            _ => {
                return Err(Error::ReducibleInput(format!(
                    "residual polynomial of {g} over {v} has several distinct roots"
                )))
            }
        }
    }
    Err(Error::NonTermination(format!(
        "approximation chain of {g} did not stabilize"
    )))
}
