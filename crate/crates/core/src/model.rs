//! Finite sets of Mac Lane (pseudo)valuations as normal models of the
//! projective line: closure operations, the Hasse/tree structure, standard
//! crossings, finite cusps, and specialization of horizontal divisors.

use std::fmt;

use crate::arith::qpoly::QPoly;
use crate::arith::rat::{ExtRat, Rat};
use crate::maclane::{pseudovaluation, MacLaneVal};
use crate::Error;

/// A finite set of Mac Lane (pseudo)valuations over one prime, deduplicated
/// as valuations (not merely as presentations).
#[derive(Clone)]
pub struct ValuationForest {
    p: u64,
    members: Vec<MacLaneVal>,
}

impl ValuationForest {
    pub fn new(p: u64) -> Self {
        ValuationForest { p, members: vec![] }
    }

    pub fn from_members(p: u64, members: Vec<MacLaneVal>) -> Self {
        let mut f = ValuationForest::new(p);
        for m in members {
            f.insert(m);
        }
        f
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn members(&self) -> &[MacLaneVal] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members that are genuine valuations (no trailing `inf`).
    pub fn valuations(&self) -> impl Iterator<Item = &MacLaneVal> {
        self.members.iter().filter(|m| !m.is_pseudo())
    }

    pub fn contains(&self, v: &MacLaneVal) -> bool {
        self.position(v).is_some()
    }

    pub fn position(&self, v: &MacLaneVal) -> Option<usize> {
        self.members.iter().position(|m| m.same_valuation(v))
    }

    /// Insert if not already present as a valuation; returns true when new.
    pub fn insert(&mut self, v: MacLaneVal) -> bool {
        debug_assert_eq!(v.p(), self.p);
        if self.contains(&v) {
            return false;
        }
        self.members.push(v);
        true
    }

    /// Strictly-below test in the valuation order.
    fn lt(a: &MacLaneVal, b: &MacLaneVal) -> bool {
        a.leq(b) && !b.leq(a)
    }

    /// Indices of members adjacent to member `i`: comparable with nothing
    /// strictly between.
    pub fn neighbor_indices(&self, i: usize) -> Vec<usize> {
        let v = &self.members[i];
        let mut out = Vec::new();
        for (j, w) in self.members.iter().enumerate() {
            if j == i {
                continue;
            }
            let (lo, hi) = if Self::lt(v, w) {
                (v, w)
            } else if Self::lt(w, v) {
                (w, v)
            } else {
                continue;
            };
            let blocked = self.members.iter().enumerate().any(|(k, u)| {
                k != i && k != j && Self::lt(lo, u) && Self::lt(u, hi)
            });
            if !blocked {
                out.push(j);
            }
        }
        out
    }

    /// Members adjacent to `v` in the partial order.
    pub fn neighbors(&self, v: &MacLaneVal) -> Result<Vec<MacLaneVal>, Error> {
        let i = self.position(v).ok_or_else(|| {
            Error::InvalidInput(format!("{v} is not a member of the forest"))
        })?;
        Ok(self
            .neighbor_indices(i)
            .into_iter()
            .map(|j| self.members[j].clone())
            .collect())
    }

    /// All Hasse edges (lower index, upper index), lower strictly below upper.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.members.len() {
            for j in self.neighbor_indices(i) {
                if Self::lt(&self.members[i], &self.members[j]) {
                    out.push((i, j));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Smallest superset closed under pairwise infima.
    pub fn inf_closure(&self) -> ValuationForest {
        let mut out = self.clone();
        let mut changed = true;
        while changed {
            changed = false;
            let snapshot = out.members.clone();
            for i in 0..snapshot.len() {
                for j in i + 1..snapshot.len() {
                    let m = snapshot[i].inf(&snapshot[j]);
                    if out.insert(m) {
                        changed = true;
                    }
                }
            }
        }
        out
    }

    /// Closure under predecessors.
    pub fn predecessor_closure(&self) -> ValuationForest {
        let mut out = self.clone();
        for m in self.members.clone() {
            for p in m.predecessors() {
                out.insert(p);
            }
        }
        out
    }

    pub fn is_inf_closed(&self) -> bool {
        for i in 0..self.members.len() {
            for j in i + 1..self.members.len() {
                let m = self.members[i].inf(&self.members[j]);
                if !self.contains(&m) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_predecessor_closed(&self) -> bool {
        self.members
            .iter()
            .all(|m| m.predecessors().iter().all(|p| self.contains(p)))
    }

    /// In a predecessor-closed, inf-closed forest containing v0 the Hasse
    /// diagram of the valuations is a rooted tree with root v0.
    pub fn check_rooted_tree(&self) -> Result<(), Error> {
        let vals: Vec<&MacLaneVal> = self.valuations().collect();
        if vals.is_empty() {
            return Err(Error::StructureViolation("no valuations in forest".into()));
        }
        let mut minimal = Vec::new();
        for (i, v) in vals.iter().enumerate() {
            let has_lower = vals
                .iter()
                .enumerate()
                .any(|(j, w)| j != i && Self::lt(w, v));
            if !has_lower {
                minimal.push(*v);
            }
        }
        if minimal.len() != 1 {
            return Err(Error::StructureViolation(format!(
                "forest has {} minimal valuations",
                minimal.len()
            )));
        }
        if !minimal[0].is_gauss() {
            return Err(Error::StructureViolation(format!(
                "root of the forest is {} rather than v0",
                minimal[0]
            )));
        }
        // every non-root valuation has exactly one Hasse parent below it
        for (i, v) in self.members.iter().enumerate() {
            if v.is_pseudo() || v.is_gauss() {
                continue;
            }
            let parents = self
                .neighbor_indices(i)
                .into_iter()
                .filter(|&j| !self.members[j].is_pseudo() && Self::lt(&self.members[j], v))
                .count();
            if parents != 1 {
                return Err(Error::StructureViolation(format!(
                    "{v} has {parents} parents in the Hasse diagram"
                )));
            }
        }
        Ok(())
    }

    /// Sorted canonical strings plus the Hasse edge list.
    pub fn serialize_text(&self) -> String {
        let mut names: Vec<String> = self.members.iter().map(|m| m.canonical_string()).collect();
        let order = {
            let mut idx: Vec<usize> = (0..names.len()).collect();
            idx.sort_by(|&a, &b| names[a].cmp(&names[b]));
            idx
        };
        let rank: Vec<usize> = {
            let mut r = vec![0; order.len()];
            for (new, &old) in order.iter().enumerate() {
                r[old] = new;
            }
            r
        };
        names.sort();
        let mut s = String::new();
        for n in &names {
            s.push_str(n);
            s.push('\n');
        }
        let mut edges: Vec<(usize, usize)> = self
            .hasse_edges()
            .into_iter()
            .map(|(a, b)| (rank[a], rank[b]))
            .collect();
        edges.sort();
        for (a, b) in edges {
            s.push_str(&format!("edge {a} -> {b}\n"));
        }
        s
    }
}

impl fmt::Debug for ValuationForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<String> = self.members.iter().map(|m| m.canonical_string()).collect();
        names.sort();
        write!(f, "{{{}}}", names.join(", "))
    }
}

/// A standard crossing: two components sharing a chain prefix and final key,
/// differing only in the last value.  The lower side may be presented
/// non-minimally (its value can equal what the prefix already assigns).
#[derive(Clone, Debug)]
pub struct CrossingPoint {
    /// Shared prefix of both chains (a valuation).
    pub prefix: MacLaneVal,
    /// Shared final key.
    pub key: QPoly,
    /// Lower and upper values of the key, lo < hi.
    pub lo: Rat,
    pub hi: Rat,
}

impl CrossingPoint {
    /// N = e of the shared prefix.
    pub fn n(&self) -> u64 {
        self.prefix.ram_index_prefix(self.prefix.len())
    }

    pub fn lower(&self) -> MacLaneVal {
        self.prefix
            .augment_unchecked(self.key.clone(), ExtRat::Finite(self.lo.clone()))
    }

    pub fn upper(&self) -> MacLaneVal {
        self.prefix
            .augment_unchecked(self.key.clone(), ExtRat::Finite(self.hi.clone()))
    }

    /// e_v of the lower side (as a valuation).
    pub fn e_lower(&self) -> u64 {
        self.lower().ram_index().expect("lower side is a valuation")
    }

    pub fn e_upper(&self) -> u64 {
        self.upper().ram_index().expect("upper side is a valuation")
    }
}

/// Intersection number of the two components of a standard crossing:
/// N / ((hi - lo) e_v e_v').
pub fn intersection_number(c: &CrossingPoint) -> Rat {
    let n = Rat::from_integer(c.n().into());
    let ev = Rat::from_integer(c.e_lower().into());
    let evp = Rat::from_integer(c.e_upper().into());
    let gap = &c.hi - &c.lo;
    n / (gap * ev * evp)
}

/// A finite cusp: the single non-regular point away from infinity on the
/// component of `v`, met by the divisor of the last key.
#[derive(Clone, Debug)]
pub struct CuspPoint {
    pub valuation: MacLaneVal,
    pub meeting_divisor: QPoly,
}

/// Put an adjacent pair of valuations into the shared-prefix presentation:
/// the upper side stays minimal, the lower side is re-expressed through the
/// upper's prefix and final key.
pub fn shared_prefix_crossing(
    lower: &MacLaneVal,
    upper: &MacLaneVal,
) -> Result<CrossingPoint, Error> {
    if !ValuationForest::lt(lower, upper) {
        return Err(Error::StructureViolation(format!(
            "{lower} and {upper} are not strictly ordered"
        )));
    }
    if upper.is_pseudo() || lower.is_pseudo() {
        return Err(Error::StructureViolation(
            "crossings are formed by valuations only".into(),
        ));
    }
    let n = upper.len();
    let prefix = upper.prefix(n - 1);
    let key = upper.last_key().unwrap().clone();
    let hi = upper
        .last_value()
        .unwrap()
        .expect_finite("upper crossing value")
        .clone();
    let lo = match lower.val(&key) {
        ExtRat::Finite(r) => r,
        ExtRat::Infinity => {
            return Err(Error::StructureViolation(format!(
                "lower valuation {lower} sends the crossing key to inf"
            )))
        }
    };
    let candidate = prefix.augment_unchecked(key.clone(), ExtRat::Finite(lo.clone()));
    if !candidate.same_valuation(lower) {
        return Err(Error::StructureViolation(format!(
            "adjacent pair ({lower}, {upper}) admits no shared-prefix presentation"
        )));
    }
    if lo >= hi {
        return Err(Error::StructureViolation(
            "crossing values are not ordered".into(),
        ));
    }
    Ok(CrossingPoint { prefix, key, lo, hi })
}

/// One crossing per adjacent pair of valuations of a predecessor-closed
/// forest.
pub fn standard_crossings(forest: &ValuationForest) -> Result<Vec<CrossingPoint>, Error> {
    let mut out = Vec::new();
    for (i, j) in forest.hasse_edges() {
        let a = &forest.members()[i];
        let b = &forest.members()[j];
        if a.is_pseudo() || b.is_pseudo() {
            continue;
        }
        out.push(shared_prefix_crossing(a, b)?);
    }
    Ok(out)
}

/// All finite cusps of the model of a predecessor-closed forest: `v` carries
/// one exactly when its value-group index jumps past the previous level and
/// every valuation above `v` in the forest keeps the last key at its value.
pub fn finite_cusps(forest: &ValuationForest) -> Result<Vec<CuspPoint>, Error> {
    let mut out = Vec::new();
    for v in forest.valuations() {
        if v.len() == 0 {
            continue;
        }
        let e_v = v.ram_index()?;
        let e_prev = v.ram_index_prefix(v.len() - 1);
        if e_v <= e_prev {
            continue;
        }
        let key = v.last_key().unwrap();
        let lam = v.last_value().unwrap();
        let absorbed = forest.valuations().any(|w| {
            !w.same_valuation(v) && v.leq(w) && w.val(key) != *lam
        });
        if !absorbed {
            out.push(CuspPoint {
                valuation: v.clone(),
                meeting_divisor: key.clone(),
            });
        }
    }
    Ok(out)
}

/// Where a horizontal divisor lands on the model.
#[derive(Clone, Debug)]
pub enum Specialization {
    /// The unique maximal member below the divisor's pseudovaluation.
    Member(MacLaneVal),
    /// No member lies below: the divisor exits through the infinity region.
    AtInfinityRegion,
}

/// Specialization of the divisor of a monic irreducible `g`: the unique
/// maximal member below `v_g^inf`, if any.
pub fn specialization(
    forest: &ValuationForest,
    g: &QPoly,
) -> Result<Specialization, Error> {
    let ps = pseudovaluation(g, forest.p())?;
    let mut best: Option<&MacLaneVal> = None;
    for m in forest.members() {
        if m.same_valuation(&ps) || !m.leq(&ps) {
            continue;
        }
        best = match best {
            None => Some(m),
            Some(b) => {
                if b.leq(m) {
                    Some(m)
                } else {
                    // the set below a pseudovaluation is totally ordered
                    debug_assert!(m.leq(b));
                    Some(b)
                }
            }
        };
    }
    Ok(match best {
        Some(m) => Specialization::Member(m.clone()),
        None => Specialization::AtInfinityRegion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat::{rat, rat_int};
    use crate::maclane::maclane_chain;

    fn q(coeffs: &[i64]) -> QPoly {
        QPoly::from_int_coeffs(coeffs)
    }

    fn val(p: u64, entries: &[(&QPoly, Rat)]) -> MacLaneVal {
        let mut v = MacLaneVal::gauss(p);
        for (key, lam) in entries {
            v = v.augment_unchecked((*key).clone(), ExtRat::Finite(lam.clone()));
        }
        v
    }

    /// V2 of the basic quintic example: pseudovaluations of t - 1 and
    /// t^3 - 9 over p = 3, with their predecessors.
    fn basic_v2() -> ValuationForest {
        let p = 3;
        let f1 = q(&[-1, 1]);
        let f2 = q(&[-9, 0, 0, 1]);
        let mut members = vec![
            pseudovaluation(&f1, p).unwrap(),
            pseudovaluation(&f2, p).unwrap(),
        ];
        for m in members.clone() {
            members.extend(m.predecessors());
        }
        ValuationForest::from_members(p, members)
    }

    #[test]
    fn inf_closure_examples() {
        // the basic quintic V1 is already inf-closed
        let v2 = basic_v2();
        assert_eq!(v2.len(), 4);
        assert!(v2.is_inf_closed());
        assert_eq!(v2.inf_closure().len(), 4);
        // two depth-1/3 centers in distinct residue classes force v0 in
        let t = QPoly::var();
        let tm1 = q(&[-1, 1]);
        let a = val(3, &[(&t, rat(1, 3))]);
        let b = val(3, &[(&tm1, rat(1, 3))]);
        let forest = ValuationForest::from_members(3, vec![a, b]);
        let closed = forest.inf_closure();
        assert_eq!(closed.len(), 3);
        assert!(closed.contains(&MacLaneVal::gauss(3)));
        // idempotent
        assert_eq!(closed.inf_closure().len(), 3);
        // singleton
        let single = ValuationForest::from_members(3, vec![MacLaneVal::gauss(3)]);
        assert_eq!(single.inf_closure().len(), 1);
    }

    #[test]
    fn neighbors_examples() {
        let v2 = basic_v2();
        let v0 = MacLaneVal::gauss(3);
        let v23 = val(3, &[(&QPoly::var(), rat(2, 3))]);
        let nb = v2.neighbors(&v0).unwrap();
        // v0's only neighbors are v_{2/3} and the pseudovaluation of t - 1
        assert_eq!(nb.len(), 2);
        assert!(nb.iter().any(|m| m.same_valuation(&v23)));
        let single = ValuationForest::from_members(3, vec![v0.clone()]);
        assert!(single.neighbors(&v0).unwrap().is_empty());
    }

    #[test]
    fn standard_crossings_examples() {
        let v2 = basic_v2();
        let crossings = standard_crossings(&v2).unwrap();
        assert_eq!(crossings.len(), 1);
        let c = &crossings[0];
        assert!(c.lower().is_gauss());
        assert_eq!(c.hi, rat(2, 3));
        assert_eq!(c.n(), 1);
        // singleton forest has none
        let single = ValuationForest::from_members(3, vec![MacLaneVal::gauss(3)]);
        assert!(standard_crossings(&single).unwrap().is_empty());
    }

    #[test]
    fn finite_cusps_examples() {
        // In V2 of the basic example the only cusp sits on v_{2/3}.
        let v2 = basic_v2();
        let cusps = finite_cusps(&v2).unwrap();
        assert_eq!(cusps.len(), 1);
        let v23 = val(3, &[(&QPoly::var(), rat(2, 3))]);
        assert!(cusps[0].valuation.same_valuation(&v23));
        assert_eq!(cusps[0].meeting_divisor, QPoly::var());
        // v0 alone has no cusp
        let single = ValuationForest::from_members(3, vec![MacLaneVal::gauss(3)]);
        assert!(finite_cusps(&single).unwrap().is_empty());
        // a deeper element above v_{2/3} along t absorbs the cusp
        let mut bigger = v2.clone();
        bigger.insert(val(3, &[(&QPoly::var(), rat(3, 4))]));
        let cusps = finite_cusps(&bigger).unwrap();
        assert!(!cusps
            .iter()
            .any(|c| c.valuation.same_valuation(&v23)));
    }

    #[test]
    fn specialization_examples() {
        let v2 = basic_v2();
        let f2 = q(&[-9, 0, 0, 1]);
        // without the pseudovaluations the maximal member below f2 is v_{2/3}
        let vals = ValuationForest::from_members(
            3,
            v2.valuations().cloned().collect::<Vec<_>>(),
        );
        match specialization(&vals, &f2).unwrap() {
            Specialization::Member(m) => {
                assert!(m.same_valuation(&val(3, &[(&QPoly::var(), rat(2, 3))])))
            }
            _ => panic!("expected a member"),
        }
        // t - 1 lands on v0
        match specialization(&vals, &q(&[-1, 1])).unwrap() {
            Specialization::Member(m) => assert!(m.is_gauss()),
            _ => panic!("expected v0"),
        }
        // a forest without v0 can miss: root valuation 0 below depth 1
        let deep = ValuationForest::from_members(
            3,
            vec![val(3, &[(&QPoly::var(), rat_int(1))])],
        );
        assert!(matches!(
            specialization(&deep, &q(&[-1, 1])).unwrap(),
            Specialization::AtInfinityRegion
        ));
    }

    #[test]
    fn intersection_number_examples() {
        // (v0, [v0, t = 1/2]): N = 1 -> 1/((1/2) * 1 * 2) = 1
        let t = QPoly::var();
        let c = CrossingPoint {
            prefix: MacLaneVal::gauss(5),
            key: t.clone(),
            lo: rat_int(0),
            hi: rat(1, 2),
        };
        assert_eq!(intersection_number(&c), rat_int(1));
        // (v_{2/3} = w_2, w_{5/2}): N = 3 -> 1/3
        let f2 = q(&[-9, 0, 0, 1]);
        let prefix = maclane_chain(&f2, 3).unwrap();
        let c = CrossingPoint {
            prefix,
            key: f2,
            lo: rat_int(2),
            hi: rat(5, 2),
        };
        assert_eq!(intersection_number(&c), rat(1, 3));
        // (v_{5/8}, v_{2/3}): N = 1 -> 1/((1/24) * 8 * 3) = 1
        let c = CrossingPoint {
            prefix: MacLaneVal::gauss(3),
            key: t,
            lo: rat(5, 8),
            hi: rat(2, 3),
        };
        assert_eq!(intersection_number(&c), rat_int(1));
    }

    #[test]
    fn rooted_tree_check() {
        let v2 = basic_v2();
        v2.check_rooted_tree().unwrap();
        let no_root = ValuationForest::from_members(
            3,
            vec![
                val(3, &[(&QPoly::var(), rat(1, 3))]),
                val(3, &[(&q(&[-1, 1]), rat(1, 3))]),
            ],
        );
        assert!(no_root.check_rooted_tree().is_err());
    }
}
