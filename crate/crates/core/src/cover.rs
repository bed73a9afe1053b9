//! The superelliptic pipeline for a cover z^d = f(t) over a p-adic base:
//! input normalization, crossing numerics, the resolution algorithm that
//! produces the regular normal-crossings base, the removability pass, and
//! the minimization step.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::arith::qpoly::{root_valuation, QPoly};
use crate::arith::rat::{
    ceil_to_grid, gcd_u64, is_prime, mod_inverse, rat_int, ExtRat, Rat,
};
use crate::maclane::{maclane_chain, pseudovaluation, MacLaneVal};
use crate::model::{
    finite_cusps, specialization, standard_crossings, CrossingPoint,
    CuspPoint, Specialization, ValuationForest,
};
use crate::npath::{crossing_lattice_basis, shortest_n_path};
use crate::Error;

/// The input datum: z^d = pi^a * prod f_i^{a_i} over Q_p with pi = p.
#[derive(Clone, Debug)]
pub struct CoverSpec {
    pub p: u64,
    pub d: u64,
    /// The pi-exponent a, kept reduced mod d.
    pub pi_exponent: u64,
    /// Monic irreducible integral factors with exponents in [1, d].
    pub factors: Vec<(QPoly, u64)>,
}

impl CoverSpec {
    /// Sum of a_i deg(f_i); the branch divisor degree.
    pub fn poly_degree(&self) -> u64 {
        self.factors
            .iter()
            .map(|(f, a)| a * f.degree() as u64)
            .sum()
    }

    /// v(f) for a valuation v (finite when v is not a pseudovaluation of a
    /// factor).
    pub fn value_of_f(&self, v: &MacLaneVal) -> ExtRat {
        let mut acc = ExtRat::Finite(rat_int(self.pi_exponent as i64));
        for (f, a) in &self.factors {
            acc = acc + (*a as usize) * &v.val(f);
        }
        acc
    }

    /// v(f) known finite.
    pub fn value_of_f_finite(&self, v: &MacLaneVal) -> Rat {
        self.value_of_f(v)
            .expect_finite("v(f) on a model component")
            .clone()
    }

    /// The pseudovaluations of the factors, in input order.
    pub fn factor_pseudovaluations(&self) -> Result<Vec<MacLaneVal>, Error> {
        self.factors
            .iter()
            .map(|(f, _)| pseudovaluation(f, self.p))
            .collect()
    }

    pub fn equation_string(&self) -> String {
        let mut rhs = String::new();
        if self.pi_exponent > 0 {
            rhs.push_str(&format!("{}^{}", self.p, self.pi_exponent));
        }
        for (f, a) in &self.factors {
            if !rhs.is_empty() {
                rhs.push_str(" * ");
            }
            if *a == 1 {
                rhs.push_str(&format!("({f})"));
            } else {
                rhs.push_str(&format!("({f})^{a}"));
            }
        }
        format!("z^{} = {}", self.d, rhs)
    }
}

/// Validate a raw spec and normalize it: reduce the pi-exponent mod d and
/// apply the weak-minimality substitutions t -> c + p^b t until no common
/// residual translate of the roots remains.  Returns the normalized spec and
/// a log of the substitutions applied.
pub fn validate_normalize(spec: &CoverSpec) -> Result<(CoverSpec, Vec<String>), Error> {
    if !is_prime(spec.p) {
        return Err(Error::InvalidInput(format!("{} is not prime", spec.p)));
    }
    if spec.d < 2 {
        return Err(Error::InvalidInput("cover degree must be at least 2".into()));
    }
    if spec.d % spec.p == 0 {
        return Err(Error::InvalidInput(format!(
            "residue characteristic {} divides the cover degree {}",
            spec.p, spec.d
        )));
    }
    if spec.factors.is_empty() {
        return Err(Error::InvalidInput("no branch factors given".into()));
    }
    for (f, a) in &spec.factors {
        if f.is_zero() || f.degree() == 0 {
            return Err(Error::InvalidInput("constant branch factor".into()));
        }
        if !f.is_monic() || !f.is_p_integral(spec.p) {
            return Err(Error::InvalidInput(format!(
                "branch factor {f} is not monic and integral"
            )));
        }
        if *a == 0 || *a > spec.d {
            return Err(Error::InvalidInput(format!(
                "factor exponent {a} is outside [1, d]"
            )));
        }
    }
    for i in 0..spec.factors.len() {
        for j in i + 1..spec.factors.len() {
            if spec.factors[i].0 == spec.factors[j].0 {
                return Err(Error::InvalidInput(format!(
                    "repeated branch factor {}",
                    spec.factors[i].0
                )));
            }
        }
    }
    let degree = spec.poly_degree();
    if degree % spec.d != 0 {
        return Err(Error::InvalidInput(format!(
            "cover degree {} does not divide deg(f) = {}",
            spec.d, degree
        )));
    }
    if degree < 3 {
        return Err(Error::InvalidInput(
            "total branch degree below 3: the cover has genus zero".into(),
        ));
    }

    let mut out = spec.clone();
    out.pi_exponent %= out.d;
    let mut log = Vec::new();
    // Irreducibility over the unramified closure is verified here.
    for (f, _) in &out.factors {
        maclane_chain(f, out.p)?;
    }

    for _round in 0..64 {
        // Common residual translate: a digit c with every root of every
        // factor satisfying v(theta - c) >= 1.
        let mut found = None;
        for c in 0..out.p {
            let depth_one = MacLaneVal::gauss(out.p)
                .augment_unchecked(QPoly::linear(rat_int(c as i64)), ExtRat::Finite(rat_int(1)));
            let mut all = true;
            for (f, _) in &out.factors {
                let ps = pseudovaluation(f, out.p)?;
                if !depth_one.leq(&ps) {
                    all = false;
                    break;
                }
            }
            if all {
                found = Some(c);
                break;
            }
        }
        let Some(c) = found else {
            return Ok((out, log));
        };
        // Depth b = floor of the common root depth around c.
        let center = QPoly::linear(rat_int(c as i64));
        let mut min_depth: Option<Rat> = None;
        for (f, _) in &out.factors {
            let rv = root_valuation(&center, f, out.p)?;
            let rv = rv.expect_finite("roots sit at finite depth").clone();
            min_depth = Some(match min_depth {
                None => rv,
                Some(m) => m.min(rv),
            });
        }
        let b = min_depth.unwrap().floor().to_integer();
        let b = b.to_u32().filter(|&b| b >= 1).ok_or_else(|| {
            Error::StructureViolation("substitution depth not a positive integer".into())
        })?;
        let mut scale = Rat::from_integer(BigInt::from(1));
        for _ in 0..b {
            scale = scale * rat_int(out.p as i64);
        }
        let mut new_factors = Vec::new();
        for (f, a) in &out.factors {
            let sub = f.compose_linear(&rat_int(c as i64), &scale);
            // renormalize to monic: divide by p^(b deg f)
            let lead = sub.leading_coeff();
            new_factors.push((sub.scale(&lead.recip()), *a));
        }
        out.factors = new_factors;
        log.push(format!("substituted t -> {c} + {}^{b} t", out.p));
    }
    Err(Error::NonTermination(
        "weak-minimality normalization did not stabilize".into(),
    ))
}

/// The numeric bundle attached to a (potential) standard crossing.
#[derive(Clone, Debug)]
pub struct CrossingData {
    pub crossing: CrossingPoint,
    pub n: u64,
    pub e: u64,
    pub s: i64,
    pub n_tilde: u64,
    pub r: u64,
    pub lam_tilde: Rat,
    pub lam_tilde_prime: Rat,
}

/// Compute the crossing bundle: the g/h split of f by membership of the
/// factor pseudovaluations above the upper side, the integers e and s, the
/// reduced lattice data, and the transformed endpoint values.
pub fn crossing_data(spec: &CoverSpec, c: &CrossingPoint) -> Result<CrossingData, Error> {
    let n = c.n();
    let upper = c.upper();
    let lower = c.lower();
    let mut e_deg = 0u64;
    let mut h_value = ExtRat::Finite(rat_int(spec.pi_exponent as i64));
    for (f, a) in &spec.factors {
        let rv = root_valuation(&c.key, f, spec.p)?;
        if ExtRat::Finite(c.lo.clone()) < rv && rv < ExtRat::Finite(c.hi.clone()) {
            return Err(Error::BranchMeetsCrossing(format!(
                "divisor of {f} meets the crossing of {lower} and {upper}"
            )));
        }
        let ps = pseudovaluation(f, spec.p)?;
        if upper.leq(&ps) {
            e_deg += a * f.degree() as u64;
        } else {
            h_value = h_value + (*a as usize) * &lower.val(f);
        }
    }
    let key_deg = c.key.degree() as u64;
    if e_deg % key_deg != 0 {
        return Err(Error::StructureViolation(format!(
            "crossing split degree {e_deg} is not a multiple of the key degree {key_deg}"
        )));
    }
    let e = e_deg / key_deg;
    let h_value = h_value.expect_finite("h avoids the crossing").clone();
    let s_rat = Rat::from_integer(BigInt::from(n)) * h_value;
    if !s_rat.is_integer() {
        return Err(Error::StructureViolation(format!(
            "s = N v(h) = {s_rat} is not an integer"
        )));
    }
    let s = s_rat.to_integer().to_i64().ok_or_else(|| {
        Error::StructureViolation("s out of machine range".into())
    })?;
    let (n_tilde, r, lam_tilde, lam_tilde_prime) =
        crossing_lattice_basis(n, spec.d, e, s, &c.lo, &c.hi)?;
    Ok(CrossingData {
        crossing: c.clone(),
        n,
        e,
        s,
        n_tilde,
        r,
        lam_tilde,
        lam_tilde_prime,
    })
}

/// Key values recovered from the shortest N~-path between the transformed
/// endpoints; ascending.  Exposed with an explicit r so the r-independence
/// of the recovered set can be property-tested.
pub fn link_values_with_r(
    spec: &CoverSpec,
    data: &CrossingData,
    r: i64,
) -> Result<Vec<Rat>, Error> {
    let g = gcd_u64(spec.d, data.e);
    let coef = Rat::new(BigInt::from(g), BigInt::from(spec.d));
    let shift = Rat::new(
        BigInt::from(r) * BigInt::from(data.s),
        BigInt::from(data.n) * BigInt::from(spec.d),
    );
    let lt = &coef * &data.crossing.lo + &shift;
    let ltp = &coef * &data.crossing.hi + &shift;
    let path = shortest_n_path(data.n_tilde, &ltp, &lt)?;
    let mut out = Vec::new();
    for x in path.entries.iter().rev() {
        let lam = (x - &shift) / &coef;
        out.push(lam);
    }
    Ok(out)
}

/// The link of a crossing: the valuations [prefix, key = lambda] with lambda
/// running over the values recovered from the shortest N~-path, endpoints
/// included, ascending.
pub fn link(spec: &CoverSpec, c: &CrossingPoint) -> Result<Vec<MacLaneVal>, Error> {
    let data = crossing_data(spec, c)?;
    let lambdas = link_values_with_r(spec, &data, data.r as i64)?;
    debug_assert_eq!(lambdas.first(), Some(&c.lo));
    debug_assert_eq!(lambdas.last(), Some(&c.hi));
    Ok(lambdas
        .into_iter()
        .map(|lam| {
            c.crossing_member(spec, lam)
        })
        .collect())
}

impl CrossingPoint {
    fn crossing_member(&self, _spec: &CoverSpec, lam: Rat) -> MacLaneVal {
        self.prefix
            .augment_unchecked(self.key.clone(), ExtRat::Finite(lam))
    }
}

/// Data of the cusp split of f at the cusp of `v`: factors whose divisors
/// pass strictly beyond the cusp point fold into a key power, the rest make
/// up h.  Returns (e, s, n, n_tilde).
fn cusp_split(spec: &CoverSpec, v: &MacLaneVal) -> Result<(u64, i64, u64, u64), Error> {
    let key = v.last_key().expect("cusp valuation has positive length");
    let lam = v
        .last_value()
        .expect("cusp valuation has positive length")
        .clone();
    let n = v.ram_index_prefix(v.len() - 1);
    let mut e_deg = 0u64;
    for (f, a) in &spec.factors {
        let rv = root_valuation(key, f, spec.p)?;
        if rv > lam {
            e_deg += a * f.degree() as u64;
        }
    }
    let key_deg = key.degree() as u64;
    if e_deg % key_deg != 0 {
        return Err(Error::StructureViolation(
            "cusp split degree mismatch".into(),
        ));
    }
    let e = e_deg / key_deg;
    let vf = spec.value_of_f_finite(v);
    let lam = lam.expect_finite("cusp value is finite").clone();
    let s_rat =
        Rat::from_integer(BigInt::from(n)) * (vf - Rat::from_integer(BigInt::from(e)) * &lam);
    if !s_rat.is_integer() {
        return Err(Error::StructureViolation(format!(
            "cusp s = {s_rat} is not an integer"
        )));
    }
    let s = s_rat
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::StructureViolation("cusp s out of range".into()))?;
    let g = gcd_u64(spec.d, e);
    let n_tilde = n * (g / gcd_u64(g, s.unsigned_abs()));
    Ok((e, s, n, n_tilde))
}

/// The tail of a finite cusp: the link from the cusp valuation up to the
/// first key value on the (1/N~)Z grid.  Returns the singleton when the
/// value already sits on the grid.
pub fn tail(spec: &CoverSpec, cusp: &CuspPoint) -> Result<Vec<MacLaneVal>, Error> {
    let v = &cusp.valuation;
    let lam = v
        .last_value()
        .expect("cusp valuation has positive length")
        .expect_finite("cusp value is finite")
        .clone();
    let (_, _, _, n_tilde) = cusp_split(spec, v)?;
    let lam_prime = ceil_to_grid(&lam, n_tilde);
    if lam_prime == lam {
        return Ok(vec![v.clone()]);
    }
    let c = CrossingPoint {
        prefix: v.prefix(v.len() - 1),
        key: v.last_key().unwrap().clone(),
        lo: lam,
        hi: lam_prime,
    };
    link(spec, &c)
}

/// The branch point tail of factor `i`: the link from the maximal member
/// below the factor's pseudovaluation, re-presented through the factor as
/// key, up to the first value satisfying both grid congruences.
pub fn branch_tail(
    spec: &CoverSpec,
    forest: &ValuationForest,
    i: usize,
) -> Result<Vec<MacLaneVal>, Error> {
    let (fi, ai) = &spec.factors[i];
    let member = match specialization(forest, fi)? {
        Specialization::Member(m) => m,
        Specialization::AtInfinityRegion => {
            return Err(Error::StructureViolation(format!(
                "branch divisor of {fi} specializes to the infinity region"
            )))
        }
    };
    // Re-present the member with the factor itself as final key.
    let prefix = maclane_chain(fi, spec.p)?;
    let lam = match member.val(fi) {
        ExtRat::Finite(r) => r,
        ExtRat::Infinity => {
            return Err(Error::StructureViolation(format!(
                "member below the branch divisor of {fi} is a pseudovaluation"
            )))
        }
    };
    let represented = prefix.augment_unchecked(fi.clone(), ExtRat::Finite(lam.clone()));
    if !represented.same_valuation(&member) {
        return Err(Error::StructureViolation(format!(
            "maximal member below {fi} cannot be presented through it"
        )));
    }
    let n = prefix.ram_index_prefix(prefix.len());
    // Split: the factor itself plus anything strictly beyond the meeting
    // point folds into the key power.
    let mut e_deg = *ai * fi.degree() as u64;
    for (j, (fj, aj)) in spec.factors.iter().enumerate() {
        if j == i {
            continue;
        }
        let rv = root_valuation(fi, fj, spec.p)?;
        if rv > ExtRat::Finite(lam.clone()) {
            e_deg += aj * fj.degree() as u64;
        }
    }
    let e = e_deg / fi.degree() as u64;
    if e * fi.degree() as u64 != e_deg {
        return Err(Error::StructureViolation(
            "branch tail split degree mismatch".into(),
        ));
    }
    let vf = spec.value_of_f_finite(&represented);
    let s_rat =
        Rat::from_integer(BigInt::from(n)) * (vf - Rat::from_integer(BigInt::from(e)) * &lam);
    if !s_rat.is_integer() {
        return Err(Error::StructureViolation(
            "branch tail s is not an integer".into(),
        ));
    }
    let s = s_rat
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::StructureViolation("branch tail s out of range".into()))?;
    let g = gcd_u64(spec.d, e);
    let n_tilde = n * (g / gcd_u64(g, s.unsigned_abs()));
    // lambda': least grid value >= lam with s/N + a_i lambda' in (d/N~)Z,
    // i.e. s N~/N + a_i k = 0 mod d for lambda' = k/N~.
    let s_scaled = s * (n_tilde / n) as i64;
    let start = (&lam * Rat::from_integer(BigInt::from(n_tilde)))
        .ceil()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::StructureViolation("branch tail grid out of range".into()))?;
    let d = spec.d as i64;
    let mut lam_prime = None;
    for k in start..start + d {
        if (s_scaled + *ai as i64 * k).rem_euclid(d) == 0 {
            lam_prime = Some(Rat::new(BigInt::from(k), BigInt::from(n_tilde)));
            break;
        }
    }
    let Some(lam_prime) = lam_prime else {
        return Err(Error::StructureViolation(format!(
            "no admissible branch tail endpoint for {fi}"
        )));
    };
    if lam_prime == lam {
        return Ok(vec![represented]);
    }
    let c = CrossingPoint {
        prefix,
        key: fi.clone(),
        lo: lam,
        hi: lam_prime,
    };
    link(spec, &c)
}

/// Intermediate sets of the resolution algorithm, for reporting.
#[derive(Clone)]
pub struct Stages {
    pub v1: ValuationForest,
    pub v2: ValuationForest,
    pub v3: ValuationForest,
    pub v4: ValuationForest,
    pub v5: ValuationForest,
}

/// The resolution algorithm: build the regular normal-crossings base.
///
/// 1. all factor pseudovaluations and their predecessors;
/// 2. inf-closure;
/// 3. links over all adjacent valuation pairs;
/// 4. tails over all finite cusps;
/// 5. branch point tails for every factor;
/// 6. drop the pseudovaluations.
pub fn build_vreg(spec: &CoverSpec) -> Result<(ValuationForest, Stages), Error> {
    let p = spec.p;
    let mut v1 = ValuationForest::new(p);
    for ps in spec.factor_pseudovaluations()? {
        for pred in ps.predecessors() {
            v1.insert(pred);
        }
        v1.insert(ps);
    }
    let v2 = v1.inf_closure();

    let mut v3 = v2.clone();
    for c in standard_crossings(&v2)? {
        for m in link(spec, &c)? {
            v3.insert(m);
        }
    }

    let mut v4 = v3.clone();
    for cusp in finite_cusps(&v3)? {
        for m in tail(spec, &cusp)? {
            v4.insert(m);
        }
    }

    let mut v5 = v4.clone();
    for i in 0..spec.factors.len() {
        for m in branch_tail(spec, &v4, i)? {
            v5.insert(m);
        }
    }

    let vreg = ValuationForest::from_members(p, v5.valuations().cloned().collect());
    if !vreg.is_predecessor_closed() {
        return Err(Error::StructureViolation(
            "regular base is not predecessor-closed".into(),
        ));
    }
    if !vreg.is_inf_closed() {
        return Err(Error::StructureViolation(
            "regular base is not inf-closed".into(),
        ));
    }
    vreg.check_rooted_tree()?;
    Ok((
        vreg,
        Stages {
            v1,
            v2,
            v3,
            v4,
            v5,
        },
    ))
}

/// Why a maximal valuation was kept or removed by the removability pass.
#[derive(Clone, Debug)]
pub struct RemovalReport {
    pub valuation: MacLaneVal,
    pub removed: bool,
    /// For removed members: all four clauses hold.  For kept members: the
    /// first clause (a)-(d) that failed.
    pub detail: String,
}

/// Remove every maximal valuation satisfying the four-part removability
/// criterion.  Returns the pruned forest and a report per maximal valuation.
pub fn removability_pass(
    spec: &CoverSpec,
    vreg: &ValuationForest,
) -> Result<(ValuationForest, Vec<RemovalReport>), Error> {
    let mut reports = Vec::new();
    let mut removed: Vec<MacLaneVal> = Vec::new();
    let chains: Vec<MacLaneVal> = spec
        .factors
        .iter()
        .map(|(f, _)| maclane_chain(f, spec.p))
        .collect::<Result<_, _>>()?;

    for (idx, v) in vreg.members().iter().enumerate() {
        if v.is_gauss() {
            continue;
        }
        let maximal = !vreg
            .members()
            .iter()
            .any(|w| v.leq(w) && !w.leq(v));
        if !maximal {
            continue;
        }
        // (a) v = v_{f_i} for a unique i.
        let matches: Vec<usize> = chains
            .iter()
            .enumerate()
            .filter(|(_, c)| c.same_valuation(v))
            .map(|(i, _)| i)
            .collect();
        if matches.len() != 1 {
            reports.push(RemovalReport {
                valuation: v.clone(),
                removed: false,
                detail: format!(
                    "(a) fails: matches {} factor approximation chains",
                    matches.len()
                ),
            });
            continue;
        }
        let i = matches[0];
        let ai = spec.factors[i].1;
        // (b) a_i = d/2 mod d.
        if spec.d % 2 != 0 || ai % spec.d != spec.d / 2 {
            reports.push(RemovalReport {
                valuation: v.clone(),
                removed: false,
                detail: format!("(b) fails: a_{} = {} is not d/2 mod d", i + 1, ai),
            });
            continue;
        }
        // (c) e_v / N = 2.
        let e_v = v.ram_index()?;
        let n = v.ram_index_prefix(v.len() - 1);
        if e_v != 2 * n {
            reports.push(RemovalReport {
                valuation: v.clone(),
                removed: false,
                detail: format!("(c) fails: e_v/N = {e_v}/{n}"),
            });
            continue;
        }
        // (d) e_w / N = gcd(d, e_w w(f)) / gcd(d, e_v v(f)) for the parent w.
        let parent = vreg
            .neighbor_indices(idx)
            .into_iter()
            .map(|j| &vreg.members()[j])
            .find(|w| w.leq(v))
            .ok_or_else(|| Error::StructureViolation(format!("{v} has no parent")))?;
        let e_w = parent.ram_index()?;
        let wf = spec.value_of_f_finite(parent);
        let vf = spec.value_of_f_finite(v);
        let ew_wf = (Rat::from_integer(BigInt::from(e_w)) * wf).to_integer();
        let ev_vf = (Rat::from_integer(BigInt::from(e_v)) * vf).to_integer();
        let lhs = Rat::new(BigInt::from(e_w), BigInt::from(n));
        let rhs = Rat::new(
            BigInt::from(gcd_u64(spec.d, ew_wf.magnitude().to_u64().unwrap_or(0))),
            BigInt::from(gcd_u64(spec.d, ev_vf.magnitude().to_u64().unwrap_or(0))),
        );
        if lhs != rhs {
            reports.push(RemovalReport {
                valuation: v.clone(),
                removed: false,
                detail: format!("(d) fails: e_w/N = {lhs} vs gcd ratio {rhs}"),
            });
            continue;
        }
        reports.push(RemovalReport {
            valuation: v.clone(),
            removed: true,
            detail: format!("removable through factor {}", spec.factors[i].0),
        });
        removed.push(v.clone());
    }
    let survivors: Vec<MacLaneVal> = vreg
        .members()
        .iter()
        .filter(|m| !removed.iter().any(|r| r.same_valuation(m)))
        .cloned()
        .collect();
    Ok((ValuationForest::from_members(spec.p, survivors), reports))
}

/// Factorization data of f in the completed local ring at the standard
/// infinity specialization of a short valuation (inductive length <= 1).
#[derive(Clone, Debug)]
pub struct InftyData {
    /// Count of factors not below the valuation (the local horizontal part).
    pub s_count: usize,
    /// Indices of those factors.
    pub s_factors: Vec<usize>,
    /// Folded exponent of the linear key.
    pub e: u64,
    /// beta = gcd(d, a, a_i..., e).
    pub beta: u64,
    pub cond_i: bool,
    pub cond_ii: bool,
    pub cond_iii: bool,
    pub cond_iv: bool,
}

/// Evaluate the infinity-specialization regularity conditions for a
/// valuation of inductive length <= 1.
pub fn infty_data(spec: &CoverSpec, v: &MacLaneVal) -> Result<InftyData, Error> {
    if v.len() > 1 || v.is_pseudo() {
        return Err(Error::InvalidInput(
            "infinity specialization data needs inductive length <= 1".into(),
        ));
    }
    let (key, lam) = if v.is_gauss() {
        (QPoly::var(), Rat::zero())
    } else {
        (
            v.last_key().unwrap().clone(),
            v.last_value()
                .unwrap()
                .expect_finite("short valuations are finite")
                .clone(),
        )
    };
    let e_v = v.ram_index()?;
    let mut s_factors = Vec::new();
    let mut e = 0u64;
    for (j, (f, a)) in spec.factors.iter().enumerate() {
        let ps = pseudovaluation(f, spec.p)?;
        if v.leq(&ps) {
            e += a * f.degree() as u64;
        } else {
            s_factors.push(j);
        }
    }
    let a = spec.pi_exponent;
    let mut beta = gcd_u64(spec.d, a);
    for &j in &s_factors {
        beta = gcd_u64(beta, spec.factors[j].1);
    }
    beta = gcd_u64(beta, e);
    // (i): e_v | gcd(d, a_1..a_s, e) / beta
    let mut g_no_a = spec.d;
    for &j in &s_factors {
        g_no_a = gcd_u64(g_no_a, spec.factors[j].1);
    }
    g_no_a = gcd_u64(g_no_a, e);
    let cond_i = g_no_a % (beta * e_v) == 0;
    let cond_ii = s_factors.is_empty();
    let vf = spec.value_of_f_finite(v);
    let ev_vf = (Rat::from_integer(BigInt::from(e_v)) * &vf).to_integer();
    let ev_vf_abs = ev_vf.magnitude().to_u64().unwrap_or(0);
    let cond_iii = if s_factors.len() == 1 {
        let (f1, a1) = &spec.factors[s_factors[0]];
        f1.degree() == 1
            && gcd_u64(
                spec.d / gcd_u64(spec.d, *a1),
                spec.d / gcd_u64(spec.d, ev_vf_abs),
            ) == 1
    } else {
        false
    };
    let cond_iv = if s_factors.len() == 1 && e_v == 1 {
        let (f1, _) = &spec.factors[s_factors[0]];
        let vf_int = vf.is_integer()
            && (&vf / Rat::from_integer(BigInt::from(2 * beta))).is_integer();
        if spec.d == 2 * beta && vf_int && f1.degree() == 2 {
            let rv = root_valuation(&key, f1, spec.p)?;
            rv == ExtRat::Finite(&lam - Rat::new(BigInt::from(1), BigInt::from(2)))
        } else {
            false
        }
    } else {
        false
    };
    Ok(InftyData {
        s_count: s_factors.len(),
        s_factors,
        e,
        beta,
        cond_i,
        cond_ii,
        cond_iii,
        cond_iv,
    })
}

/// The set S: members of inductive length <= 1 satisfying condition (i) and
/// one of (ii), (iii), (iv) of the infinity-specialization criterion.
pub fn compute_s(spec: &CoverSpec, forest: &ValuationForest) -> Result<Vec<MacLaneVal>, Error> {
    let mut out = Vec::new();
    for v in forest.valuations() {
        if v.len() > 1 {
            continue;
        }
        let data = infty_data(spec, v)?;
        if data.cond_i && (data.cond_ii || data.cond_iii || data.cond_iv) {
            out.push(v.clone());
        }
    }
    Ok(out)
}

fn linear_center(v: &MacLaneVal) -> Option<Rat> {
    if v.len() != 1 || v.is_pseudo() {
        return None;
    }
    let key = v.last_key().unwrap();
    if key.degree() != 1 {
        return None;
    }
    Some(-key.coeff(0))
}

/// The infinity-crossing regularity check for two incomparable depth-one
/// valuations `v = [v0, (t-c) = mu]` and `v' = [v0, (t-c') = mu']` whose
/// centers differ by a unit: whether the transformed endpoint pair is an
/// N~-path of length two.
pub fn infty_crossing_check(
    spec: &CoverSpec,
    v: &MacLaneVal,
    vp: &MacLaneVal,
) -> Result<bool, Error> {
    let c = linear_center(v).ok_or_else(|| {
        Error::NotPartitioned(format!("{v} is not a depth-one valuation with linear key"))
    })?;
    let cp = linear_center(vp).ok_or_else(|| {
        Error::NotPartitioned(format!("{vp} is not a depth-one valuation with linear key"))
    })?;
    let diff = &c - &cp;
    if diff.is_zero() || crate::arith::rat::p_valuation(&diff, spec.p) != ExtRat::zero() {
        return Err(Error::NotPartitioned(format!(
            "centers {c} and {cp} do not differ by a unit"
        )));
    }
    // Partition of the factors between the two sides.
    let mut delta = 0u64;
    let mut delta_prime = 0u64;
    for (f, a) in &spec.factors {
        let ps = pseudovaluation(f, spec.p)?;
        let below_v = v.leq(&ps);
        let below_vp = vp.leq(&ps);
        match (below_v, below_vp) {
            (true, false) => delta += a * f.degree() as u64,
            (false, true) => delta_prime += a * f.degree() as u64,
            (true, true) => {
                return Err(Error::StructureViolation(format!(
                    "factor {f} sits below both incomparable valuations"
                )))
            }
            (false, false) => {
                return Err(Error::NotPartitioned(format!(
                    "factor {f} sits below neither side of the infinity crossing"
                )))
            }
        }
    }
    let mu = v
        .last_value()
        .unwrap()
        .expect_finite("depth-one value")
        .clone();
    let mu_prime = vp
        .last_value()
        .unwrap()
        .expect_finite("depth-one value")
        .clone();
    let a = spec.pi_exponent;
    let check = |delta_p: u64, mu_lo: &Rat, mu_hi: &Rat| -> Result<bool, Error> {
        let g = gcd_u64(spec.d, delta_p);
        let n_tilde = g / gcd_u64(g, gcd_u64(spec.d, a));
        let r = mod_inverse((delta_p / g) as i64, spec.d / g).ok_or_else(|| {
            Error::StructureViolation("infinity crossing inverse does not exist".into())
        })?;
        let coef = Rat::new(BigInt::from(g), BigInt::from(spec.d));
        let shift = Rat::new(
            BigInt::from(r) * BigInt::from(a),
            BigInt::from(spec.d),
        );
        let hi = &coef * mu_hi + &shift;
        let lo = -(&coef * mu_lo) + &shift;
        if hi <= lo {
            return Ok(false);
        }
        crate::npath::is_aligned(n_tilde.max(1), &lo, &hi)
    };
    let forward = check(delta_prime, &mu, &mu_prime)?;
    let backward = check(delta, &mu_prime, &mu)?;
    if forward != backward {
        return Err(Error::StructureViolation(
            "infinity crossing criterion is orientation-dependent".into(),
        ));
    }
    Ok(forward)
}

/// Which minimization case fired.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinimizationCase {
    /// S = {v0} and v0 does not have exactly two neighbors.
    CaseI,
    /// S = {v0}, two neighbors; contraction through an infinity crossing
    /// when a maximal admissible pair exists.
    CaseII { contracted: bool },
    /// S exceeds {v0}: contraction below the maximal element of S, possibly
    /// removing that element too.
    CaseIII { removed_base: bool },
}

impl fmt::Display for MinimizationCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinimizationCase::CaseI => write!(f, "case 3(i)"),
            MinimizationCase::CaseII { contracted } => {
                write!(f, "case 3(ii), contraction {}", if *contracted { "applied" } else { "empty" })
            }
            MinimizationCase::CaseIII { removed_base } => write!(
                f,
                "case 3(iii), base element {}",
                if *removed_base { "removed" } else { "kept" }
            ),
        }
    }
}

/// The minimization step: from the pruned regular base to the minimal
/// normal-crossings base.
pub fn minimize(
    spec: &CoverSpec,
    vprime: &ValuationForest,
) -> Result<(ValuationForest, MinimizationCase), Error> {
    let s_set = compute_s(spec, vprime)?;
    let v0 = MacLaneVal::gauss(spec.p);
    if !s_set.iter().any(|v| v.is_gauss()) {
        return Err(Error::StructureViolation(
            "v0 is missing from the set S".into(),
        ));
    }
    let s_only_v0 = s_set.len() == 1;
    let root_idx = vprime.position(&v0).ok_or_else(|| {
        Error::StructureViolation("pruned base lost its root".into())
    })?;
    let root_neighbors = vprime.neighbor_indices(root_idx);
    if s_only_v0 {
        if root_neighbors.len() != 2 {
            return Ok((vprime.clone(), MinimizationCase::CaseI));
        }
        // Case 3(ii): search the maximal admissible ordered pair above the
        // two neighbors of v0.
        let w = &vprime.members()[root_neighbors[0]];
        let wp = &vprime.members()[root_neighbors[1]];
        let side = |base: &MacLaneVal| -> Vec<MacLaneVal> {
            vprime
                .members()
                .iter()
                .filter(|m| base.leq(m) && m.len() == 1)
                .cloned()
                .collect()
        };
        let mut valid: Vec<(MacLaneVal, MacLaneVal)> = Vec::new();
        for cand_v in side(w) {
            for cand_vp in side(wp) {
                let ok = match infty_crossing_check(spec, &cand_v, &cand_vp) {
                    Ok(b) => b,
                    Err(Error::NotPartitioned(_)) => false,
                    Err(e) => return Err(e),
                };
                if ok {
                    valid.push((cand_v.clone(), cand_vp.clone()));
                }
            }
        }
        // maximal under the product order
        let maximal: Vec<&(MacLaneVal, MacLaneVal)> = valid
            .iter()
            .filter(|(a, b)| {
                !valid.iter().any(|(c, d)| {
                    (a.leq(c) && b.leq(d)) && !(c.leq(a) && d.leq(b))
                })
            })
            .collect();
        match maximal.len() {
            0 => Ok((vprime.clone(), MinimizationCase::CaseII { contracted: false })),
            1 => {
                let (a, b) = maximal[0];
                let members: Vec<MacLaneVal> = vprime
                    .members()
                    .iter()
                    .filter(|m| a.leq(m) || b.leq(m))
                    .cloned()
                    .collect();
                Ok((
                    ValuationForest::from_members(spec.p, members),
                    MinimizationCase::CaseII { contracted: true },
                ))
            }
            _ => Err(Error::StructureViolation(
                "several maximal admissible pairs for the infinity crossing".into(),
            )),
        }
    } else {
        // Case 3(iii): the maximal element of S.
        let maximal: Vec<&MacLaneVal> = s_set
            .iter()
            .filter(|v| {
                !s_set
                    .iter()
                    .any(|w| v.leq(w) && !w.leq(v))
            })
            .collect();
        if maximal.len() != 1 {
            return Err(Error::StructureViolation(format!(
                "S has {} maximal elements",
                maximal.len()
            )));
        }
        let base = maximal[0].clone();
        let members: Vec<MacLaneVal> = vprime
            .members()
            .iter()
            .filter(|m| base.leq(m))
            .cloned()
            .collect();
        let vmin_prime = ValuationForest::from_members(spec.p, members);
        // Contraction conditions for removing the base itself.
        let base_idx = vmin_prime.position(&base).unwrap();
        let nbrs = vmin_prime.neighbor_indices(base_idx);
        let mut removed_base = false;
        if nbrs.len() == 1 {
            let w = &vmin_prime.members()[nbrs[0]];
            if w.len() == 2 && base.ram_index()? == 2 {
                let all_below = {
                    let mut ok = true;
                    for (f, _) in &spec.factors {
                        let ps = pseudovaluation(f, spec.p)?;
                        if !w.leq(&ps) {
                            ok = false;
                            break;
                        }
                    }
                    ok
                };
                if all_below {
                    let e_w = w.ram_index()?;
                    let wf = spec.value_of_f_finite(w);
                    let ew_wf = (Rat::from_integer(BigInt::from(e_w)) * wf).to_integer();
                    let lhs = gcd_u64(spec.d, ew_wf.magnitude().to_u64().unwrap_or(0));
                    let rhs = 2 * e_w * gcd_u64(spec.d, spec.pi_exponent);
                    if lhs as u64 == rhs {
                        removed_base = true;
                    }
                }
            }
        }
        let vmin = if removed_base {
            ValuationForest::from_members(
                spec.p,
                vmin_prime
                    .members()
                    .iter()
                    .filter(|m| !m.same_valuation(&base))
                    .cloned()
                    .collect(),
            )
        } else {
            vmin_prime
        };
        Ok((vmin, MinimizationCase::CaseIII { removed_base }))
    }
}

/// Everything the pipeline produces, stage by stage.
pub struct PipelineResult {
    pub spec: CoverSpec,
    pub substitutions: Vec<String>,
    pub stages: Stages,
    pub vreg: ValuationForest,
    pub removal_reports: Vec<RemovalReport>,
    pub vreg_prime: ValuationForest,
    pub s_set: Vec<MacLaneVal>,
    pub case: MinimizationCase,
    pub vmin: ValuationForest,
}

/// Run the whole pipeline: normalize, resolve, prune, minimize.
pub fn run_pipeline(raw: &CoverSpec) -> Result<PipelineResult, Error> {
    let (spec, substitutions) = validate_normalize(raw)?;
    let (vreg, stages) = build_vreg(&spec)?;
    let (vreg_prime, removal_reports) = removability_pass(&spec, &vreg)?;
    let s_set = compute_s(&spec, &vreg_prime)?;
    let (vmin, case) = minimize(&spec, &vreg_prime)?;
    Ok(PipelineResult {
        spec,
        substitutions,
        stages,
        vreg,
        removal_reports,
        vreg_prime,
        s_set,
        case,
        vmin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat::rat;

    fn q(coeffs: &[i64]) -> QPoly {
        QPoly::from_int_coeffs(coeffs)
    }

    /// z^5 = (t-1)^2 (t^3 - 9) over p = 3.
    pub(crate) fn basic_spec() -> CoverSpec {
        CoverSpec {
            p: 3,
            d: 5,
            pi_exponent: 0,
            factors: vec![(q(&[-1, 1]), 2), (q(&[-9, 0, 0, 1]), 1)],
        }
    }

    /// z^2 = (t-1)(t-2)(t^2 - p).
    fn e1_spec(p: u64) -> CoverSpec {
        CoverSpec {
            p,
            d: 2,
            pi_exponent: 0,
            factors: vec![
                (q(&[-1, 1]), 1),
                (q(&[-2, 1]), 1),
                (q(&[-(p as i64), 0, 1]), 1),
            ],
        }
    }

    /// z^8 = p (t^2 - p)^4.
    fn e3_spec(p: u64) -> CoverSpec {
        CoverSpec {
            p,
            d: 8,
            pi_exponent: 1,
            factors: vec![(q(&[-(p as i64), 0, 1]), 4)],
        }
    }

    /// z^6 = p (t^3 - p)((t-1)^3 - p).
    fn v0_contraction_spec(p: u64) -> CoverSpec {
        let f1 = q(&[-(p as i64), 0, 0, 1]);
        let shift = q(&[-1, 1]);
        let f2 = &(&(&shift * &shift) * &shift) - &QPoly::constant(rat_int(p as i64));
        CoverSpec {
            p,
            d: 6,
            pi_exponent: 1,
            factors: vec![(f1, 1), (f2, 1)],
        }
    }

    fn names(forest: &ValuationForest) -> Vec<String> {
        let mut n: Vec<String> = forest
            .members()
            .iter()
            .map(|m| m.canonical_string())
            .collect();
        n.sort();
        n
    }

    #[test]
    fn validate_rejects_bad_input() {
        let mut s = basic_spec();
        s.d = 6; // p | d
        assert!(matches!(
            validate_normalize(&s),
            Err(Error::InvalidInput(_))
        ));
        let mut s = basic_spec();
        s.factors[0].1 = 3; // degree sum 5 -> 3*1 + 3 = 6, not divisible by 5
        assert!(validate_normalize(&s).is_err());
        let s = CoverSpec {
            p: 5,
            d: 5,
            pi_exponent: 0,
            factors: vec![(q(&[-1, 1]), 5)],
        };
        assert!(matches!(
            validate_normalize(&s),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn validate_passes_basic_unchanged() {
        let (spec, log) = validate_normalize(&basic_spec()).unwrap();
        assert!(log.is_empty());
        assert_eq!(spec.factors.len(), 2);
        assert_eq!(spec.factors[0].0, q(&[-1, 1]));
    }

    #[test]
    fn validate_applies_weak_minimality_substitution() {
        // (t-3)(t-6)(t^2-3): the quadratic has roots at depth 1/2, which
        // blocks any common translate
        let s = CoverSpec {
            p: 3,
            d: 2,
            pi_exponent: 0,
            factors: vec![(q(&[-3, 1]), 1), (q(&[-6, 1]), 1), (q(&[-3, 0, 1]), 1)],
        };
        let (spec, log) = validate_normalize(&s).unwrap();
        assert!(log.is_empty());
        assert_eq!(spec.factors[0].0, q(&[-3, 1]));
        // a root at 1 blocks the translate as well
        let s = CoverSpec {
            p: 3,
            d: 2,
            pi_exponent: 0,
            factors: vec![(q(&[-3, 1]), 1), (q(&[-6, 1]), 1), (q(&[-1, 1]), 2)],
        };
        let (_, log) = validate_normalize(&s).unwrap();
        assert!(log.is_empty());
        // all roots deep: (t-3)^2 (t-6)^2 rescales to (t-1)^2 (t-2)^2
        let s = CoverSpec {
            p: 3,
            d: 2,
            pi_exponent: 0,
            factors: vec![(q(&[-3, 1]), 2), (q(&[-6, 1]), 2)],
        };
        let (spec, log) = validate_normalize(&s).unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(spec.factors[0].0, q(&[-1, 1]));
        assert_eq!(spec.factors[1].0, q(&[-2, 1]));
    }

    #[test]
    fn crossing_data_basic_example() {
        // crossing (v0, v_{2/3}) of the basic quintic: N=1 e=3 s=0 N~=1 r=2
        let spec = basic_spec();
        let c = CrossingPoint {
            prefix: MacLaneVal::gauss(3),
            key: QPoly::var(),
            lo: Rat::zero(),
            hi: rat(2, 3),
        };
        let data = crossing_data(&spec, &c).unwrap();
        assert_eq!((data.n, data.e, data.s, data.n_tilde, data.r), (1, 3, 0, 1, 2));
        let members = link(&spec, &c).unwrap();
        let names: Vec<String> = members.iter().map(|m| m.canonical_string()).collect();
        assert_eq!(
            names,
            vec!["v0", "[v0, v1(t) = 5/8]", "[v0, v1(t) = 2/3]"]
        );
    }

    #[test]
    fn crossing_data_e3_and_e1() {
        let spec = e3_spec(3);
        let c = CrossingPoint {
            prefix: MacLaneVal::gauss(3),
            key: QPoly::var(),
            lo: Rat::zero(),
            hi: rat(1, 2),
        };
        let data = crossing_data(&spec, &c).unwrap();
        assert_eq!((data.n, data.e, data.s, data.n_tilde, data.r), (1, 8, 1, 8, 0));
        let members = link(&spec, &c).unwrap();
        let vals: Vec<String> = members.iter().map(|m| m.canonical_string()).collect();
        assert_eq!(
            vals,
            vec![
                "v0",
                "[v0, v1(t) = 1/8]",
                "[v0, v1(t) = 1/4]",
                "[v0, v1(t) = 3/8]",
                "[v0, v1(t) = 1/2]"
            ]
        );

        let spec = e1_spec(3);
        let c = CrossingPoint {
            prefix: MacLaneVal::gauss(3),
            key: QPoly::var(),
            lo: Rat::zero(),
            hi: rat(1, 2),
        };
        let data = crossing_data(&spec, &c).unwrap();
        assert_eq!((data.n, data.e, data.s, data.n_tilde), (1, 2, 0, 1));
        assert_eq!(link(&spec, &c).unwrap().len(), 2);
    }

    #[test]
    fn branch_meets_crossing_detected() {
        // a factor with root valuation strictly inside the crossing gap
        let spec = CoverSpec {
            p: 3,
            d: 2,
            pi_exponent: 0,
            factors: vec![(q(&[-3, 1]), 1), (q(&[-1, 1]), 1), (q(&[-2, 1]), 2)],
        };
        let c = CrossingPoint {
            prefix: MacLaneVal::gauss(3),
            key: QPoly::var(),
            lo: Rat::zero(),
            hi: rat_int(2),
        };
        assert!(matches!(
            crossing_data(&spec, &c),
            Err(Error::BranchMeetsCrossing(_))
        ));
    }

    #[test]
    fn tail_examples() {
        // basic quintic: T_{v_{2/3}} climbs to 4/5 through 7/10
        let spec = basic_spec();
        let v23 = MacLaneVal::gauss(3)
            .augment_unchecked(QPoly::var(), ExtRat::Finite(rat(2, 3)));
        let cusp = CuspPoint {
            valuation: v23,
            meeting_divisor: QPoly::var(),
        };
        let t = tail(&spec, &cusp).unwrap();
        let names: Vec<String> = t.iter().map(|m| m.canonical_string()).collect();
        assert_eq!(
            names,
            vec![
                "[v0, v1(t) = 2/3]",
                "[v0, v1(t) = 7/10]",
                "[v0, v1(t) = 4/5]"
            ]
        );
        // E3: T_{v_{1/2}} is the singleton
        let spec = e3_spec(3);
        let v12 = MacLaneVal::gauss(3)
            .augment_unchecked(QPoly::var(), ExtRat::Finite(rat(1, 2)));
        let cusp = CuspPoint {
            valuation: v12.clone(),
            meeting_divisor: QPoly::var(),
        };
        let t = tail(&spec, &cusp).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t[0].same_valuation(&v12));
        // E1: T_w = {w}
        let spec = e1_spec(3);
        let cusp = CuspPoint {
            valuation: v12.clone(),
            meeting_divisor: QPoly::var(),
        };
        assert_eq!(tail(&spec, &cusp).unwrap().len(), 1);
    }

    #[test]
    fn branch_tail_examples() {
        // basic quintic, factor t^3 - 9 from V4
        let spec = basic_spec();
        let (_, stages) = build_vreg(&spec).unwrap();
        let bt = branch_tail(&spec, &stages.v4, 1).unwrap();
        let names: Vec<String> = bt.iter().map(|m| m.canonical_string()).collect();
        // the first entry is w_2 = v_{2/3} itself, in minimal presentation
        assert_eq!(
            names,
            vec![
                "[v0, v1(t) = 2/3]",
                "[v0, v1(t) = 2/3, v2(t^3 - 9) = 25/12]",
                "[v0, v1(t) = 2/3, v2(t^3 - 9) = 20/9]",
                "[v0, v1(t) = 2/3, v2(t^3 - 9) = 5/2]",
                "[v0, v1(t) = 2/3, v2(t^3 - 9) = 10/3]"
            ]
        );
        // factor t - 1 contributes only v0
        let bt = branch_tail(&spec, &stages.v4, 0).unwrap();
        assert_eq!(bt.len(), 1);
        assert!(bt[0].is_gauss());
        // E3 branch tail: w_1 up to w_{5/4}
        let spec = e3_spec(3);
        let (_, stages) = build_vreg(&spec).unwrap();
        let bt = branch_tail(&spec, &stages.v4, 0).unwrap();
        let names: Vec<String> = bt.iter().map(|m| m.canonical_string()).collect();
        // w_1 is v_{1/2} itself, in minimal presentation
        assert_eq!(
            names,
            vec![
                "[v0, v1(t) = 1/2]",
                "[v0, v1(t) = 1/2, v2(t^2 - 3) = 5/4]"
            ]
        );
    }

    #[test]
    fn build_vreg_basic() {
        let spec = basic_spec();
        let (vreg, _) = build_vreg(&spec).unwrap();
        let expect: Vec<String> = vec![
            "v0",
            "[v0, v1(t) = 5/8]",
            "[v0, v1(t) = 2/3]",
            "[v0, v1(t) = 7/10]",
            "[v0, v1(t) = 4/5]",
            "[v0, v1(t) = 2/3, v2(t^3 - 9) = 25/12]",
            "[v0, v1(t) = 2/3, v2(t^3 - 9) = 20/9]",
            "[v0, v1(t) = 2/3, v2(t^3 - 9) = 5/2]",
            "[v0, v1(t) = 2/3, v2(t^3 - 9) = 10/3]",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        let mut expect = expect;
        expect.sort();
        assert_eq!(names(&vreg), expect);
    }

    #[test]
    fn build_vreg_e1_and_e3() {
        for p in [3u64, 7, 11] {
            let (vreg, _) = build_vreg(&e1_spec(p)).unwrap();
            let mut expect = vec!["v0".to_string(), "[v0, v1(t) = 1/2]".to_string()];
            expect.sort();
            assert_eq!(names(&vreg), expect);
        }
        let (vreg, _) = build_vreg(&e3_spec(3)).unwrap();
        let mut expect: Vec<String> = vec![
            "v0",
            "[v0, v1(t) = 1/8]",
            "[v0, v1(t) = 1/4]",
            "[v0, v1(t) = 3/8]",
            "[v0, v1(t) = 1/2]",
            "[v0, v1(t) = 1/2, v2(t^2 - 3) = 5/4]",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        expect.sort();
        assert_eq!(names(&vreg), expect);
    }

    #[test]
    fn removability_examples() {
        // E1: the depth-one valuation is removed
        let spec = e1_spec(3);
        let (vreg, _) = build_vreg(&spec).unwrap();
        let (vprime, reports) = removability_pass(&spec, &vreg).unwrap();
        assert_eq!(vprime.len(), 1);
        assert!(vprime.members()[0].is_gauss());
        assert!(reports.iter().any(|r| r.removed));
        // basic quintic: nothing removable
        let spec = basic_spec();
        let (vreg, _) = build_vreg(&spec).unwrap();
        let (vprime, reports) = removability_pass(&spec, &vreg).unwrap();
        assert_eq!(vprime.len(), 9);
        assert!(reports.iter().all(|r| !r.removed));
        assert!(reports.iter().all(|r| r.detail.starts_with("(a)")));
        // E3: w_{5/4} fails clause (a)
        let spec = e3_spec(3);
        let (vreg, _) = build_vreg(&spec).unwrap();
        let (vprime, _) = removability_pass(&spec, &vreg).unwrap();
        assert_eq!(vprime.len(), vreg.len());
    }

    #[test]
    fn s_set_examples() {
        // basic quintic: S = {v0}
        let spec = basic_spec();
        let (vreg, _) = build_vreg(&spec).unwrap();
        let (vprime, _) = removability_pass(&spec, &vreg).unwrap();
        let s = compute_s(&spec, &vprime).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].is_gauss());
        // E3: S contains v_{1/2}
        let spec = e3_spec(3);
        let (vreg, _) = build_vreg(&spec).unwrap();
        let (vprime, _) = removability_pass(&spec, &vreg).unwrap();
        let s = compute_s(&spec, &vprime).unwrap();
        let v12 = MacLaneVal::gauss(3)
            .augment_unchecked(QPoly::var(), ExtRat::Finite(rat(1, 2)));
        assert!(s.iter().any(|v| v.same_valuation(&v12)));
        // E1 after pruning: S = {v0}
        let spec = e1_spec(3);
        let (vreg, _) = build_vreg(&spec).unwrap();
        let (vprime, _) = removability_pass(&spec, &vreg).unwrap();
        let s = compute_s(&spec, &vprime).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn infty_crossing_examples() {
        // the sextic contraction example: d=6, delta=delta'=3, a=1, 3-path 1/3 > 0
        let spec = v0_contraction_spec(5);
        let (spec, _) = validate_normalize(&spec).unwrap();
        let v = MacLaneVal::gauss(5)
            .augment_unchecked(QPoly::var(), ExtRat::Finite(rat(1, 3)));
        let vp = MacLaneVal::gauss(5)
            .augment_unchecked(q(&[-1, 1]), ExtRat::Finite(rat(1, 3)));
        assert!(infty_crossing_check(&spec, &v, &vp).unwrap());
        // monic f: the criterion never holds
        let spec2 = CoverSpec {
            pi_exponent: 0,
            ..spec.clone()
        };
        assert!(!infty_crossing_check(&spec2, &v, &vp).unwrap());
    }

    #[test]
    fn minimize_all_cases() {
        // E1 -> case (i), V_min = {v0}
        let spec = e1_spec(3);
        let res = run_pipeline(&spec).unwrap();
        assert_eq!(res.case, MinimizationCase::CaseI);
        assert_eq!(res.vmin.len(), 1);
        // basic quintic -> case (i), V_min = V_reg
        let res = run_pipeline(&basic_spec()).unwrap();
        assert_eq!(res.case, MinimizationCase::CaseI);
        assert_eq!(res.vmin.len(), 9);
        // E3 -> case (iii) with the base removed, V_min = {w_{5/4}}
        let res = run_pipeline(&e3_spec(3)).unwrap();
        assert_eq!(res.case, MinimizationCase::CaseIII { removed_base: true });
        assert_eq!(names(&res.vmin), vec!["[v0, v1(t) = 1/2, v2(t^2 - 3) = 5/4]"]);
        // sextic contraction -> case (ii), V_min = {v, v'}
        let res = run_pipeline(&v0_contraction_spec(5)).unwrap();
        assert_eq!(res.case, MinimizationCase::CaseII { contracted: true });
        assert_eq!(res.vmin.len(), 2);
        assert_eq!(res.vreg_prime.len(), 3);
    }

    #[test]
    fn link_values_are_r_independent() {
        let spec = basic_spec();
        let c = CrossingPoint {
            prefix: MacLaneVal::gauss(3),
            key: QPoly::var(),
            lo: Rat::zero(),
            hi: rat(2, 3),
        };
        let data = crossing_data(&spec, &c).unwrap();
        let g = gcd_u64(spec.d, data.e);
        let shift = (spec.d / g) as i64;
        let a = link_values_with_r(&spec, &data, data.r as i64).unwrap();
        let b = link_values_with_r(&spec, &data, data.r as i64 + shift).unwrap();
        assert_eq!(a, b);
    }
}
