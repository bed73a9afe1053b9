//! The decorated dual graph of the special fiber of the cover's model:
//! component multiplicities upstairs, component counts, crossing fiber
//! sizes, ramification data, self-intersections, and per-component genera.
//!
//! Everything is driven by exact local data on the base model: for each
//! component the special points are enumerated (crossings with neighboring
//! components, branch specializations, the final-key direction point, the
//! infinity specialization), and the residual divisor of the normalized
//! branch function is computed there through local intersection numbers.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::qpoly::{root_valuation, QPoly};
use crate::arith::rat::{gcd_u64, Rat};
use crate::cover::{crossing_data, CoverSpec};
use crate::maclane::MacLaneVal;
use crate::model::{shared_prefix_crossing, specialization, Specialization, ValuationForest};
use crate::Error;

/// e~_v = e_v d / gcd(d, e_v v(f)): the multiplicity upstairs of a component
/// above the v-component.
pub fn mult_upstairs(spec: &CoverSpec, v: &MacLaneVal) -> Result<u64, Error> {
    let e_v = v.ram_index()?;
    let vf = spec.value_of_f_finite(v);
    let ev_vf = (Rat::from_integer(BigInt::from(e_v)) * vf).to_integer();
    let g = gcd_u64(
        spec.d,
        ev_vf.magnitude().to_u64().ok_or_else(|| {
            Error::StructureViolation("e_v v(f) out of machine range".into())
        })?,
    );
    Ok(e_v * spec.d / g)
}

/// A special point of a base component.
#[derive(Clone, Debug, PartialEq)]
pub enum Anchor {
    /// Intersection with the component of another member.
    Crossing { other: MacLaneVal },
    /// The direction point of the component's final key; a finite cusp when
    /// the value group jumps.  Carries the branch factors passing through.
    KeyPoint { cusp: bool, factors: Vec<usize> },
    /// Specialization of a single branch factor away from the key direction.
    Branch { factor: usize },
    /// The infinity specialization (single minimal member) or the infinity
    /// crossing (the `other` minimal member, when there are two).
    Infinity { other: Option<MacLaneVal> },
}

/// A marked point of a component with its residual order and fiber data.
#[derive(Clone, Debug)]
pub struct MarkedPoint {
    pub anchor: Anchor,
    /// Order of the residual of the normalized branch function.
    pub order: i64,
    /// Points of the normalized component above this point, per lift.
    pub points_per_lift: u64,
    /// Geometric ramification index at each of those points.
    pub ram_index: u64,
}

/// Monomial exponents over the local generator system pi, phi_1..phi_n,
/// f_1..f_q of a component.
#[derive(Clone, Debug)]
struct Exponents {
    pi: i64,
    keys: Vec<i64>,
    factors: Vec<i64>,
}

/// The local analysis of one component of the base model.
struct ComponentLocal<'a> {
    spec: &'a CoverSpec,
    v: MacLaneVal,
    e_v: u64,
    /// (anchor, vertical neighbors (w, e_w, (D_w . Z_v))), horizontal
    /// divisors through the point (their polynomials), D_infinity flag.
    anchors: Vec<AnchorData>,
}

struct AnchorData {
    anchor: Anchor,
    verticals: Vec<(MacLaneVal, u64, Rat)>,
    horizontals: Vec<QPoly>,
    has_infinity: bool,
}

fn is_minimal_member(forest: &ValuationForest, v: &MacLaneVal) -> bool {
    forest
        .members()
        .iter()
        .all(|w| !(w.leq(v) && !v.leq(w)))
}

fn minimal_members(forest: &ValuationForest) -> Vec<MacLaneVal> {
    forest
        .members()
        .iter()
        .filter(|v| is_minimal_member(forest, v))
        .cloned()
        .collect()
}

impl<'a> ComponentLocal<'a> {
    fn build(
        spec: &'a CoverSpec,
        forest: &'a ValuationForest,
        v: &MacLaneVal,
    ) -> Result<Self, Error> {
        let e_v = v.ram_index()?;
        let idx = forest.position(v).ok_or_else(|| {
            Error::InvalidInput(format!("{v} is not a member of the forest"))
        })?;
        let mut anchors: Vec<AnchorData> = Vec::new();

        // Crossings with order-neighbors.
        for j in forest.neighbor_indices(idx) {
            let w = forest.members()[j].clone();
            if w.is_pseudo() {
                continue;
            }
            let (lower, upper) = if v.leq(&w) { (v, &w) } else { (&w, v) };
            let c = shared_prefix_crossing(lower, upper)?;
            let n = c.n();
            let gap = &c.hi - &c.lo;
            let e_w = w.ram_index()?;
            let inter = Rat::from_integer(BigInt::from(n))
                / (gap
                    * Rat::from_integer(BigInt::from(e_v))
                    * Rat::from_integer(BigInt::from(e_w)));
            anchors.push(AnchorData {
                anchor: Anchor::Crossing { other: w.clone() },
                verticals: vec![(w, e_w, inter)],
                horizontals: vec![],
                has_infinity: false,
            });
        }

        // Branch factors specializing here, split between the key-direction
        // point and their own points.
        let mut key_factors: Vec<usize> = Vec::new();
        let mut own_factors: Vec<usize> = Vec::new();
        for (i, (f, _)) in spec.factors.iter().enumerate() {
            match specialization(forest, f)? {
                Specialization::Member(m) if m.same_valuation(v) => {
                    if let (Some(key), Some(lam)) = (v.last_key(), v.last_value()) {
                        let rv = root_valuation(key, f, spec.p)?;
                        if &rv > lam {
                            key_factors.push(i);
                        } else {
                            own_factors.push(i);
                        }
                    } else {
                        own_factors.push(i);
                    }
                }
                _ => {}
            }
        }
        if key_factors.len() > 1 {
            return Err(Error::StructureViolation(format!(
                "two branch divisors pass through the key direction of {v}"
            )));
        }

        // The key-direction point exists when no member above keeps going in
        // the key direction (otherwise that point is a crossing handled
        // above).
        if let (Some(key), Some(lam)) = (v.last_key(), v.last_value()) {
            let absorbed = forest.valuations().any(|w| {
                !w.same_valuation(v) && v.leq(w) && &w.val(key) != lam
            });
            if !absorbed {
                let e_prev = v.ram_index_prefix(v.len() - 1);
                let cusp = e_v > e_prev;
                let mut horizontals = vec![key.clone()];
                for &i in &key_factors {
                    if !horizontals.contains(&spec.factors[i].0) {
                        horizontals.push(spec.factors[i].0.clone());
                    }
                }
                anchors.push(AnchorData {
                    anchor: Anchor::KeyPoint {
                        cusp,
                        factors: key_factors.clone(),
                    },
                    verticals: vec![],
                    horizontals,
                    has_infinity: false,
                });
            } else if !key_factors.is_empty() {
                return Err(Error::StructureViolation(format!(
                    "branch divisor escapes through an absorbed key direction of {v}"
                )));
            }
        }

        for i in own_factors {
            anchors.push(AnchorData {
                anchor: Anchor::Branch { factor: i },
                verticals: vec![],
                horizontals: vec![spec.factors[i].0.clone()],
                has_infinity: false,
            });
        }

        // Infinity specialization.
        if is_minimal_member(forest, v) {
            let minimals = minimal_members(forest);
            let mut horizontals: Vec<QPoly> = Vec::new();
            // chain keys below the top exit toward infinity unless caught by
            // some member; likewise the factors
            for entry in v.chain() {
                if let Specialization::AtInfinityRegion = specialization(forest, &entry.key)? {
                    horizontals.push(entry.key.clone());
                }
            }
            for (f, _) in &spec.factors {
                if let Specialization::AtInfinityRegion = specialization(forest, f)? {
                    horizontals.push(f.clone());
                }
            }
            match minimals.len() {
                1 => {
                    anchors.push(AnchorData {
                        anchor: Anchor::Infinity { other: None },
                        verticals: vec![],
                        horizontals,
                        has_infinity: true,
                    });
                }
                2 => {
                    let other = minimals
                        .iter()
                        .find(|m| !m.same_valuation(v))
                        .unwrap()
                        .clone();
                    // the infinity crossing: change of variables turns it
                    // into a standard crossing with gap mu + mu'
                    let mu = v
                        .last_value()
                        .ok_or_else(|| {
                            Error::StructureViolation(
                                "minimal member of a rootless forest has length 0".into(),
                            )
                        })?
                        .expect_finite("depth-one value")
                        .clone();
                    let mu_p = other
                        .last_value()
                        .unwrap()
                        .expect_finite("depth-one value")
                        .clone();
                    let e_o = other.ram_index()?;
                    let inter = Rat::one()
                        / ((&mu + &mu_p)
                            * Rat::from_integer(BigInt::from(e_v))
                            * Rat::from_integer(BigInt::from(e_o)));
                    anchors.push(AnchorData {
                        anchor: Anchor::Infinity {
                            other: Some(other.clone()),
                        },
                        verticals: vec![(other, e_o, inter)],
                        horizontals,
                        has_infinity: true,
                    });
                }
                k => {
                    return Err(Error::StructureViolation(format!(
                        "forest has {k} minimal members"
                    )))
                }
            }
        }

        Ok(ComponentLocal {
            spec,
            v: v.clone(),
            e_v,
            anchors,
        })
    }

    /// Solve integer exponents x with x_pi + sum x_k lambda_k = target where
    /// target lies in the value group of v.
    fn value_exponents(&self, target: &Rat) -> Result<Exponents, Error> {
        let lambdas: Vec<Rat> = self
            .v
            .chain()
            .iter()
            .map(|e| e.value.expect_finite("chain of a valuation").clone())
            .collect();
        let e_v = BigInt::from(self.e_v);
        // solve x_0 e_v + sum x_k (e_v lambda_k) = e_v * target over Z
        let mut coeffs: Vec<BigInt> = vec![e_v.clone()];
        for l in &lambdas {
            coeffs.push((l * Rat::from_integer(e_v.clone())).to_integer());
        }
        let rhs_rat = target * Rat::from_integer(e_v.clone());
        if !rhs_rat.is_integer() {
            return Err(Error::StructureViolation(format!(
                "value {target} is outside the value group of {}",
                self.v
            )));
        }
        let rhs = rhs_rat.to_integer();
        // iterative extended gcd over the coefficient vector
        let mut g = coeffs[0].clone();
        let mut combo: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
        for c in coeffs.iter().skip(1) {
            let (gg, u, w) = ext_gcd(&g, c);
            let prev = combo.last().unwrap().clone();
            let mut next: Vec<BigInt> = prev.iter().map(|x| x * &u).collect();
            next.push(w);
            combo.push(next);
            g = gg;
        }
        if (&rhs % &g) != BigInt::zero() {
            return Err(Error::StructureViolation(format!(
                "value {target} is outside the value group of {}",
                self.v
            )));
        }
        let q = &rhs / &g;
        let xs: Vec<BigInt> = combo
            .last()
            .unwrap()
            .iter()
            .map(|x| x * &q)
            .collect();
        let pi = xs[0].to_i64().ok_or_else(|| {
            Error::StructureViolation("normalizer exponent overflow".into())
        })?;
        let mut keys = Vec::new();
        for x in xs.iter().skip(1) {
            keys.push(x.to_i64().ok_or_else(|| {
                Error::StructureViolation("normalizer exponent overflow".into())
            })?);
        }
        Ok(Exponents {
            pi,
            keys,
            factors: vec![0; self.spec.factors.len()],
        })
    }

    /// The exponent vector of f itself.
    fn f_exponents(&self) -> Exponents {
        Exponents {
            pi: self.spec.pi_exponent as i64,
            keys: vec![0; self.v.chain().len()],
            factors: self.spec.factors.iter().map(|(_, a)| *a as i64).collect(),
        }
    }

    /// Value of the monomial with the given exponents under a valuation.
    fn value_under(&self, exps: &Exponents, w: &MacLaneVal) -> Rat {
        let mut acc = Rat::from_integer(BigInt::from(exps.pi));
        for (x, entry) in exps.keys.iter().zip(self.v.chain()) {
            if *x != 0 {
                acc += Rat::from_integer(BigInt::from(*x))
                    * w.val(&entry.key).expect_finite("value on a component");
            }
        }
        for (x, (f, _)) in exps.factors.iter().zip(&self.spec.factors) {
            if *x != 0 {
                acc += Rat::from_integer(BigInt::from(*x))
                    * w.val(f).expect_finite("value on a component");
            }
        }
        acc
    }

    /// Total polynomial degree of the monomial (pi contributes nothing).
    fn degree_of(&self, exps: &Exponents) -> i64 {
        let mut acc = 0i64;
        for (x, entry) in exps.keys.iter().zip(self.v.chain()) {
            acc += x * entry.key.degree() as i64;
        }
        for (x, (f, _)) in exps.factors.iter().zip(&self.spec.factors) {
            acc += x * f.degree() as i64;
        }
        acc
    }

    /// Coefficient of the horizontal divisor of `g` in the monomial.
    fn horizontal_coeff(&self, exps: &Exponents, g: &QPoly) -> i64 {
        let mut acc = 0i64;
        for (x, entry) in exps.keys.iter().zip(self.v.chain()) {
            if &entry.key == g {
                acc += x;
            }
        }
        for (x, (f, _)) in exps.factors.iter().zip(&self.spec.factors) {
            if f == g {
                acc += x;
            }
        }
        acc
    }

    /// Order of the residual of the monomial (assumed of v-value 0) at an
    /// anchor, as an exact rational.
    fn residual_order_at(&self, exps: &Exponents, anchor: &AnchorData) -> Rat {
        let mut acc = Rat::zero();
        for (w, e_w, inter) in &anchor.verticals {
            let val = self.value_under(exps, w);
            acc += Rat::from_integer(BigInt::from(*e_w)) * val * inter;
        }
        for g in &anchor.horizontals {
            let c = self.horizontal_coeff(exps, g);
            if c != 0 {
                acc += Rat::new(
                    BigInt::from(c) * BigInt::from(g.degree()),
                    BigInt::from(self.e_v),
                );
            }
        }
        if anchor.has_infinity {
            acc += Rat::new(
                BigInt::from(-self.degree_of(exps)),
                BigInt::from(self.e_v),
            );
        }
        acc
    }

    /// The normalized residual orders at all anchors: the residual divisor
    /// of f * w^(-e_v v(f)) for a local uniformizing monomial w of value
    /// 1/e_v.  Integral with sum zero.
    fn normalized_orders(&self) -> Result<Vec<(Anchor, i64)>, Error> {
        let vf = self.spec.value_of_f_finite(&self.v);
        let m = Rat::from_integer(BigInt::from(self.e_v)) * &vf;
        debug_assert!(m.is_integer());
        let unif = self.value_exponents(&Rat::new(BigInt::one(), BigInt::from(self.e_v)))?;
        let mut exps = self.f_exponents();
        let m_int = m
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::StructureViolation("e_v v(f) overflow".into()))?;
        exps.pi -= m_int * unif.pi;
        for (x, u) in exps.keys.iter_mut().zip(&unif.keys) {
            *x -= m_int * u;
        }
        let mut out = Vec::new();
        let mut total = 0i64;
        for a in &self.anchors {
            let ord = self.residual_order_at(&exps, a);
            if !ord.is_integer() {
                return Err(Error::StructureViolation(format!(
                    "residual order {ord} at {:?} on {} is not an integer",
                    a.anchor, self.v
                )));
            }
            let ord = ord.to_integer().to_i64().ok_or_else(|| {
                Error::StructureViolation("residual order overflow".into())
            })?;
            total += ord;
            out.push((a.anchor.clone(), ord));
        }
        if total != 0 {
            return Err(Error::StructureViolation(format!(
                "residual orders on {} sum to {total}",
                self.v
            )));
        }
        Ok(out)
    }

    /// Number of connected components of the cover above the generic point
    /// of this base component.
    fn component_count(&self) -> Result<u64, Error> {
        let vf = self.spec.value_of_f_finite(&self.v);
        let ev_vf = (Rat::from_integer(BigInt::from(self.e_v)) * vf).to_integer();
        let mut g = gcd_u64(
            self.spec.d,
            ev_vf.magnitude().to_u64().ok_or_else(|| {
                Error::StructureViolation("e_v v(f) out of machine range".into())
            })?,
        );
        for (_, ord) in self.normalized_orders()? {
            g = gcd_u64(g, ord.unsigned_abs());
        }
        Ok(g.max(1))
    }

    /// Number of physical points of the cover above a crossing or infinity
    /// anchor (the edge count of the dual graph there).
    fn edge_point_count(&self, anchor: &AnchorData) -> Result<u64, Error> {
        match &anchor.anchor {
            Anchor::Crossing { other } => {
                let (lower, upper) = if self.v.leq(other) {
                    (&self.v, other)
                } else {
                    (other, &self.v)
                };
                let c = shared_prefix_crossing(lower, upper)?;
                let data = crossing_data(self.spec, &c)?;
                Ok(gcd_u64(
                    gcd_u64(self.spec.d, data.e),
                    data.s.unsigned_abs(),
                ))
            }
            Anchor::Infinity { .. } => self.infinity_fiber_size(anchor),
            _ => Err(Error::StructureViolation(
                "edge counts exist only at crossings and infinity".into(),
            )),
        }
    }

    /// Fiber size above the infinity point: the largest divisor c of d such
    /// that the divisor of f lies in c times the local principal lattice.
    fn infinity_fiber_size(&self, anchor: &AnchorData) -> Result<u64, Error> {
        // Coordinates: Z_v, (Z_other), D_infinity, one per horizontal poly.
        let mut verticals: Vec<MacLaneVal> = vec![self.v.clone()];
        for (w, _, _) in &anchor.verticals {
            verticals.push(w.clone());
        }
        let horizontals = &anchor.horizontals;
        let ncols = verticals.len() + 1 + horizontals.len();
        let column = |g: &QPoly| -> Result<Vec<BigInt>, Error> {
            let mut row = vec![BigInt::zero(); ncols];
            for (k, w) in verticals.iter().enumerate() {
                let e_w = w.ram_index()?;
                let val = w.val(g).expect_finite("vertical value").clone();
                let c = Rat::from_integer(BigInt::from(e_w)) * val;
                debug_assert!(c.is_integer());
                row[k] = c.to_integer();
            }
            row[verticals.len()] = BigInt::from(-(g.degree() as i64));
            for (k, h) in horizontals.iter().enumerate() {
                if h == g {
                    row[verticals.len() + 1 + k] = BigInt::one();
                }
            }
            Ok(row)
        };
        let mut gens: Vec<Vec<BigInt>> = Vec::new();
        // pi
        {
            let mut row = vec![BigInt::zero(); ncols];
            for (k, w) in verticals.iter().enumerate() {
                row[k] = BigInt::from(w.ram_index()?);
            }
            gens.push(row);
        }
        // chain keys of every vertical through the point, and the factors
        let mut polys: Vec<QPoly> = Vec::new();
        for w in &verticals {
            for e in w.chain() {
                if !polys.contains(&e.key) {
                    polys.push(e.key.clone());
                }
            }
        }
        for (f, _) in &self.spec.factors {
            if !polys.contains(f) {
                polys.push(f.clone());
            }
        }
        for g in &polys {
            gens.push(column(g)?);
        }
        // target: div(f)
        let mut target = vec![BigInt::zero(); ncols];
        {
            let pi_row = &gens[0];
            for (k, x) in pi_row.iter().enumerate() {
                target[k] += x * BigInt::from(self.spec.pi_exponent);
            }
            for (f, a) in &self.spec.factors {
                let col = column(f)?;
                for (k, x) in col.iter().enumerate() {
                    target[k] += x * BigInt::from(*a);
                }
            }
        }
        let mut divisors: Vec<u64> = (1..=self.spec.d).filter(|c| self.spec.d % c == 0).collect();
        divisors.sort_unstable_by(|a, b| b.cmp(a));
        for c in divisors {
            let cb = BigInt::from(c);
            if target.iter().any(|t| (t % &cb) != BigInt::zero()) {
                continue;
            }
            let scaled: Vec<BigInt> = target.iter().map(|t| t / &cb).collect();
            if lattice_contains(&gens, &scaled) {
                return Ok(c);
            }
        }
        Ok(1)
    }
}

fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if b.is_zero() {
        let sign = if a.is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        return (a.abs(), sign, BigInt::zero());
    }
    let (g, u, v) = ext_gcd(b, &(a % b));
    let q = a / b;
    (g, v.clone(), u - q * v)
}

/// Whether `target` lies in the integer row span of `rows` (Hermite
/// reduction followed by greedy elimination).
fn lattice_contains(rows: &[Vec<BigInt>], target: &[BigInt]) -> bool {
    let ncols = target.len();
    let mut mat: Vec<Vec<BigInt>> = rows.to_vec();
    let mut t = target.to_vec();
    let mut row_start = 0usize;
    for col in 0..ncols {
        // gcd-combine rows below row_start on this column
        loop {
            let mut nonzero: Vec<usize> = (row_start..mat.len())
                .filter(|&i| !mat[i][col].is_zero())
                .collect();
            if nonzero.len() <= 1 {
                break;
            }
            nonzero.sort_by_key(|&i| mat[i][col].magnitude().clone());
            let (a, b) = (nonzero[0], nonzero[1]);
            let q = &mat[b][col] / &mat[a][col];
            for k in 0..ncols {
                let sub = &q * &mat[a][k];
                mat[b][k] = &mat[b][k] - sub;
            }
        }
        if let Some(i) = (row_start..mat.len()).find(|&i| !mat[i][col].is_zero()) {
            mat.swap(row_start, i);
            // reduce the target
            if !t[col].is_zero() {
                let q = &t[col] / &mat[row_start][col];
                if (&t[col] % &mat[row_start][col]) != BigInt::zero() {
                    return false;
                }
                for k in 0..ncols {
                    let sub = &q * &mat[row_start][k];
                    t[k] = &t[k] - sub;
                }
            }
            row_start += 1;
        } else if !t[col].is_zero() {
            return false;
        }
    }
    t.iter().all(|x| x.is_zero())
}

/// The residual divisor of the v-component: normalized residual orders at
/// every marked point.  The orders are integers summing to zero.
pub fn residual_divisor(
    spec: &CoverSpec,
    forest: &ValuationForest,
    v: &MacLaneVal,
) -> Result<Vec<(Anchor, i64)>, Error> {
    ComponentLocal::build(spec, forest, v)?.normalized_orders()
}

/// Number of irreducible components of the cover's special fiber above the
/// v-component: gcd of d, e_v v(f), and the normalized residual orders.
pub fn component_count(
    spec: &CoverSpec,
    forest: &ValuationForest,
    v: &MacLaneVal,
) -> Result<u64, Error> {
    ComponentLocal::build(spec, forest, v)?.component_count()
}

/// One vertex of the dual graph: a single component above a base member.
#[derive(Clone, Debug)]
pub struct FiberVertex {
    pub member: MacLaneVal,
    pub lift: u64,
    /// Multiplicity e~ in the special fiber.
    pub multiplicity: u64,
    /// Degree of the induced map on reduced components.
    pub reduced_degree: u64,
    pub genus: i64,
    pub self_intersection: Option<i64>,
    pub marks: Vec<MarkedPoint>,
}

/// An edge of the dual graph: one intersection point upstairs.
#[derive(Clone, Debug)]
pub struct FiberEdge {
    pub a: usize,
    pub b: usize,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct FiberGraph {
    pub vertices: Vec<FiberVertex>,
    pub edges: Vec<FiberEdge>,
}

impl FiberGraph {
    pub fn vertex_index(&self, member: &MacLaneVal, lift: u64) -> Option<usize> {
        self.vertices
            .iter()
            .position(|v| v.member.same_valuation(member) && v.lift == lift)
    }

    fn incident(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .flat_map(|e| {
                let mut out = Vec::new();
                if e.a == i {
                    out.push(e.b);
                }
                if e.b == i {
                    out.push(e.a);
                }
                out
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in self.incident(i) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Self-intersection of every vertex with at least one incident edge:
/// -(sum of neighboring multiplicities)/m, which must be a negative integer
/// on a regular normal-crossings model.
pub fn self_intersections(graph: &FiberGraph) -> Result<BTreeMap<usize, i64>, Error> {
    let mut out = BTreeMap::new();
    for (i, v) in graph.vertices.iter().enumerate() {
        let nbrs = graph.incident(i);
        if nbrs.is_empty() {
            continue;
        }
        let total: u64 = nbrs.iter().map(|&j| graph.vertices[j].multiplicity).sum();
        if total % v.multiplicity != 0 {
            return Err(Error::StructureViolation(format!(
                "self-intersection of {} lift {} is not an integer",
                v.member, v.lift
            )));
        }
        out.insert(i, -((total / v.multiplicity) as i64));
    }
    Ok(out)
}

/// Assemble the decorated dual graph of the special fiber of the cover's
/// model over a regular base.
pub fn dual_graph(spec: &CoverSpec, forest: &ValuationForest) -> Result<FiberGraph, Error> {
    // Deterministic member order: canonical strings.
    let mut members: Vec<MacLaneVal> = forest.valuations().cloned().collect();
    members.sort_by_key(|m| m.canonical_string());
    let locals: Vec<ComponentLocal> = members
        .iter()
        .map(|v| ComponentLocal::build(spec, forest, v))
        .collect::<Result<_, _>>()?;

    let mut counts = Vec::new();
    let mut mults = Vec::new();
    let mut degrees = Vec::new();
    for (v, local) in members.iter().zip(&locals) {
        let n_v = local.component_count()?;
        let e_tilde = mult_upstairs(spec, v)?;
        let e_v = local.e_v;
        // reduced-cover degree d e_v / (n_v e~)
        let num = spec.d * e_v;
        if num % (n_v * e_tilde) != 0 {
            return Err(Error::StructureViolation(format!(
                "reduced degree above {v} is not an integer"
            )));
        }
        counts.push(n_v);
        mults.push(e_tilde);
        degrees.push(num / (n_v * e_tilde));
    }

    let mut vertices: Vec<FiberVertex> = Vec::new();
    let mut index: BTreeMap<(usize, u64), usize> = BTreeMap::new();
    for (mi, v) in members.iter().enumerate() {
        for lift in 0..counts[mi] {
            index.insert((mi, lift), vertices.len());
            vertices.push(FiberVertex {
                member: v.clone(),
                lift,
                multiplicity: mults[mi],
                reduced_degree: degrees[mi],
                genus: 0,
                self_intersection: None,
                marks: vec![],
            });
        }
    }

    let member_pos = |m: &MacLaneVal| -> usize {
        members
            .iter()
            .position(|x| x.same_valuation(m))
            .expect("member present")
    };

    let mut edges: Vec<FiberEdge> = Vec::new();
    // ramification bookkeeping per vertex: (points, index) per anchor
    let mut ram: Vec<Vec<(u64, u64)>> = vec![Vec::new(); vertices.len()];

    for (mi, local) in locals.iter().enumerate() {
        let n_v = counts[mi];
        let d_v = degrees[mi];
        let orders = local.normalized_orders()?;
        for (anchor, order) in local.anchors.iter().zip(orders.iter().map(|(_, o)| *o)) {
            // Local Kummer splitting of the reduced degree-D cover at the
            // anchor: the residual parameter has order `order`, so each lift
            // carries gcd(D, |order|/n) points of ramification index
            // D / gcd(D, |order|/n).
            let o_abs = order.unsigned_abs();
            if n_v > 0 && o_abs % n_v != 0 {
                return Err(Error::StructureViolation(format!(
                    "residual order {order} on {} is not divisible by the component count {n_v}",
                    local.v
                )));
            }
            let pts_per_lift = gcd_u64(d_v, o_abs / n_v).max(1);
            let idx = d_v / pts_per_lift;
            for lift in 0..n_v {
                ram[index[&(mi, lift)]].push((pts_per_lift, idx));
                vertices[index[&(mi, lift)]].marks.push(MarkedPoint {
                    anchor: anchor.anchor.clone(),
                    order,
                    points_per_lift: pts_per_lift,
                    ram_index: idx,
                });
            }

            // Edges of the dual graph.
            match &anchor.anchor {
                Anchor::Crossing { other } => {
                    // add each crossing once, from the lower side
                    if local.v.leq(other) && !other.leq(&local.v) {
                        let oi = member_pos(other);
                        let fiber = local.edge_point_count(anchor)?;
                        if fiber % n_v != 0 || fiber % counts[oi] != 0 {
                            return Err(Error::StructureViolation(format!(
                                "crossing fiber {fiber} is not divisible by the component counts"
                            )));
                        }
                        if fiber / n_v != pts_per_lift {
                            return Err(Error::StructureViolation(format!(
                                "crossing fiber {fiber} disagrees with the residual splitting at {}",
                                local.v
                            )));
                        }
                        for k in 0..fiber {
                            let a = index[&(mi, k % n_v)];
                            let b = index[&(oi, k % counts[oi])];
                            edges.push(FiberEdge {
                                a,
                                b,
                                label: format!("above {} | {}", local.v, other),
                            });
                        }
                    }
                }
                Anchor::Infinity { other: Some(other) } => {
                    let oi = member_pos(other);
                    // add once, from the lexicographically smaller member
                    if members[mi].canonical_string() < members[oi].canonical_string() {
                        let fiber = local.edge_point_count(anchor)?;
                        if fiber % n_v != 0 || fiber % counts[oi] != 0 {
                            return Err(Error::StructureViolation(
                                "infinity crossing fiber is not divisible by the component counts"
                                    .into(),
                            ));
                        }
                        for k in 0..fiber {
                            let a = index[&(mi, k % n_v)];
                            let b = index[&(oi, k % counts[oi])];
                            edges.push(FiberEdge {
                                a,
                                b,
                                label: "above the infinity crossing".to_string(),
                            });
                        }
                    }
                }
                Anchor::Infinity { other: None } => {
                    if n_v > 1 {
                        // the lifts of one component meet each other above
                        // infinity: attach cyclically
                        let fiber = local.edge_point_count(anchor)?;
                        for k in 0..fiber {
                            let a = index[&(mi, k % n_v)];
                            let b = index[&(mi, (k + 1) % n_v)];
                            if a == b {
                                return Err(Error::StructureViolation(
                                    "self-loop above the infinity specialization".into(),
                                ));
                            }
                            edges.push(FiberEdge {
                                a,
                                b,
                                label: "above the infinity specialization".to_string(),
                            });
                        }
                    }
                }
                Anchor::KeyPoint { .. } | Anchor::Branch { .. } => {}
            }
        }
    }

    // genera by Riemann-Hurwitz on each reduced component
    for (vi, v) in vertices.iter_mut().enumerate() {
        let d_v = v.reduced_degree as i64;
        let mut rh = -2 * d_v;
        for (pts, idx) in &ram[vi] {
            rh += (*pts as i64) * (*idx as i64 - 1);
        }
        if rh % 2 != 0 || rh < -2 {
            return Err(Error::StructureViolation(format!(
                "Riemann-Hurwitz count {rh} on {} lift {} is not admissible",
                v.member, v.lift
            )));
        }
        v.genus = (rh + 2) / 2;
        if v.genus < 0 {
            return Err(Error::StructureViolation(format!(
                "negative genus above {}",
                v.member
            )));
        }
    }

    let mut graph = FiberGraph { vertices, edges };
    if !graph.is_connected() {
        return Err(Error::StructureViolation(
            "special fiber of the cover is disconnected".into(),
        ));
    }
    let selfs = self_intersections(&graph)?;
    for (i, s) in selfs {
        if s >= 0 {
            return Err(Error::StructureViolation(format!(
                "nonnegative self-intersection {s}"
            )));
        }
        graph.vertices[i].self_intersection = Some(s);
    }
    Ok(graph)
}

/// Re-verify minimality on the output graph: no base member all of whose
/// lifts are pairwise disjoint contractible (-1, genus 0) curves compatible
/// with the contraction criterion.
pub fn verify_minimality(graph: &FiberGraph) -> Result<(), Error> {
    let mut by_member: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, v) in graph.vertices.iter().enumerate() {
        by_member
            .entry(v.member.canonical_string())
            .or_default()
            .push(i);
    }
    for (name, lifts) in by_member {
        let contractible = lifts.iter().all(|&i| {
            let v = &graph.vertices[i];
            if v.genus != 0 || v.self_intersection != Some(-1) {
                return false;
            }
            // Castelnuovo compatibility: neighbors' multiplicities add up to m
            let nbr_mult: u64 = graph
                .incident(i)
                .iter()
                .map(|&j| graph.vertices[j].multiplicity)
                .sum();
            nbr_mult == v.multiplicity
        });
        if !contractible {
            continue;
        }
        // The lifts can all be contracted only when pairwise disjoint.
        let mut disjoint = true;
        'outer: for &i in &lifts {
            for j in graph.incident(i) {
                if lifts.contains(&j) && j != i {
                    disjoint = false;
                    break 'outer;
                }
            }
        }
        if disjoint {
            return Err(Error::StructureViolation(format!(
                "component above {name} is contractible: the base is not minimal"
            )));
        }
    }
    Ok(())
}
