//! Shortest N-paths between rationals and the rank-2 lattice reduction that
//! feeds the regularity criteria.
//!
//! An N-path is a decreasing sequence b_0/c_0 > ... > b_r/c_r of reduced
//! rationals with consecutive differences N / (lcm(N, c_i) lcm(N, c_{i+1})).
//! The shortest N-path between two endpoints exists and is unique; it is
//! computed here through the reduction that {u_i} is an N-path iff {N u_i}
//! is a 1-path, and the shortest 1-path is produced by repeatedly inserting
//! the minimal-denominator rational between non-adjacent neighbors
//! (Stern-Brocot descent).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::rat::{denominator_u64, gcd_u64, lcm_u64, mod_inverse, Rat};
use crate::Error;

/// A shortest N-path: strictly decreasing entries, endpoints included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NPath {
    pub n: u64,
    pub entries: Vec<Rat>,
}

impl NPath {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Serialized as "a0 > a1 > ... > ak" with reduced fractions.
    pub fn to_string_chain(&self) -> String {
        self.entries
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" > ")
    }
}

/// The consecutive-difference identity defining N-paths, checked exactly.
pub fn is_n_step(n: u64, hi: &Rat, lo: &Rat) -> bool {
    if hi <= lo {
        return false;
    }
    let c_hi = denominator_u64(hi);
    let c_lo = denominator_u64(lo);
    let denom = BigInt::from(lcm_u64(n, c_hi)) * BigInt::from(lcm_u64(n, c_lo));
    hi - lo == Rat::new(BigInt::from(n), denom)
}

/// True iff the whole decreasing sequence is an N-path.
pub fn is_n_path(n: u64, entries: &[Rat]) -> bool {
    entries.len() >= 2
        && entries.windows(2).all(|w| is_n_step(n, &w[0], &w[1]))
}

/// The rational with minimal denominator strictly inside (lo, hi), by
/// Stern-Brocot / continued-fraction descent.  When several integers lie in
/// the interval the smallest one above lo is returned; any interior choice
/// leads to the same completed 1-path.
fn simplest_between(lo: &Rat, hi: &Rat) -> Rat {
    debug_assert!(lo < hi);
    let fl = lo.floor();
    let a = lo - &fl;
    let b = hi - &fl;
    if b > Rat::one() {
        return fl + Rat::one();
    }
    if a.is_zero() {
        // x = fl + 1/q with q minimal such that 1/q < b
        let inv = b.recip();
        let mut q = inv.ceil().to_integer();
        if inv.is_integer() {
            q += BigInt::one();
        }
        return fl + Rat::new(BigInt::one(), q);
    }
    fl + simplest_between(&b.recip(), &a.recip()).recip()
}

/// Two reduced rationals x > y are adjacent on a 1-path iff x - y =
/// 1/(den(x) den(y)).
fn is_farey_step(hi: &Rat, lo: &Rat) -> bool {
    hi - lo == Rat::new(BigInt::one(), hi.denom() * lo.denom())
}

fn one_path_fill(hi: &Rat, lo: &Rat, out: &mut Vec<Rat>) {
    if is_farey_step(hi, lo) {
        out.push(lo.clone());
        return;
    }
    let mid = simplest_between(lo, hi);
    one_path_fill(hi, &mid, out);
    one_path_fill(&mid, lo, out);
}

/// The unique shortest N-path from `hi` down to `lo`, endpoints included.
pub fn shortest_n_path(n: u64, hi: &Rat, lo: &Rat) -> Result<NPath, Error> {
    if n == 0 {
        return Err(Error::InvalidInput("N-path parameter must be positive".into()));
    }
    if hi <= lo {
        return Err(Error::InvalidInput(format!(
            "N-path endpoints must decrease: {hi} vs {lo}"
        )));
    }
    let scale = Rat::from_integer(BigInt::from(n));
    let shi = hi * &scale;
    let slo = lo * &scale;
    let mut entries = vec![shi.clone()];
    one_path_fill(&shi, &slo, &mut entries);
    let entries: Vec<Rat> = entries.into_iter().map(|x| x / &scale).collect();
    let path = NPath { n, entries };
    debug_assert!(is_n_path(n, &path.entries));
    Ok(path)
}

/// Whether the pair lambda' > lambda is already a (necessarily shortest)
/// N-path of length two — the alignment criterion for the crossing lattices.
pub fn is_aligned(n: u64, lam: &Rat, lam_prime: &Rat) -> Result<bool, Error> {
    if lam_prime <= lam {
        return Err(Error::InvalidInput(format!(
            "alignment check requires {lam_prime} > {lam}"
        )));
    }
    Ok(is_n_step(n, lam_prime, lam))
}

/// A finitely generated subgroup of Q^2, given by generators.
#[derive(Clone, Debug)]
pub struct Lattice2 {
    pub gens: Vec<(Rat, Rat)>,
}

/// Reduced basis of a rank-2 lattice containing a diagonal element:
/// the minimal positive diagonal (r, r) and an element (x, y) minimizing
/// y - x > 0, with x normalized into [0, r).
pub fn lattice_basis(lat: &Lattice2) -> Result<((Rat, Rat), (Rat, Rat)), Error> {
    if lat.gens.is_empty() {
        return Err(Error::DegenerateLattice("no generators".into()));
    }
    // Clear denominators: work in (1/D) Z^2.
    let mut d = BigInt::one();
    for (x, y) in &lat.gens {
        d = d.lcm(x.denom()).lcm(y.denom());
    }
    let scale = Rat::from_integer(d.clone());
    let ints: Vec<(BigInt, BigInt)> = lat
        .gens
        .iter()
        .map(|(x, y)| ((x * &scale).to_integer(), (y * &scale).to_integer()))
        .collect();
    // Hermite-style reduction of the 2-column integer matrix: gcd out the
    // first column into a single pivot row, collecting the kernel
    // contributions in the second column.
    let mut basis: Vec<(BigInt, BigInt)> = Vec::new();
    let mut pivot: Option<(BigInt, BigInt)> = None;
    let mut rest: Vec<(BigInt, BigInt)> = Vec::new();
    for row in ints {
        if row.0.is_zero() {
            rest.push(row);
            continue;
        }
        pivot = Some(match pivot {
            None => row,
            Some(p) => {
                // extended gcd combination on first coordinates
                let (g, u, v) = ext_gcd(&p.0, &row.0);
                let new = (g.clone(), &u * &p.1 + &v * &row.1);
                // remainder rows
                let k1 = &p.0 / &g;
                let k2 = &row.0 / &g;
                rest.push((BigInt::zero(), &k2 * &p.1 - &k1 * &row.1));
                new
            }
        });
    }
    // second column gcd among rows with zero first coordinate
    let mut second = BigInt::zero();
    for row in &rest {
        debug_assert!(row.0.is_zero());
        second = second.gcd(&row.1);
    }
    if let Some(p) = pivot {
        basis.push(p);
    }
    if !second.is_zero() {
        basis.push((BigInt::zero(), second));
    }
    if basis.len() < 2 {
        return Err(Error::DegenerateLattice(
            "lattice has rank below 2".into(),
        ));
    }
    let (a, b) = (basis[0].clone(), basis[1].clone());
    // Minimal positive diagonal (s, s): solve m*a + n*b with equal coords.
    // gap(m, n) = m(a1 - a0) + n(b1 - b0) = 0.
    let ga = &a.1 - &a.0;
    let gb = &b.1 - &b.0;
    let (m0, n0) = if ga.is_zero() && gb.is_zero() {
        return Err(Error::DegenerateLattice(
            "lattice is contained in the diagonal".into(),
        ));
    } else if ga.is_zero() {
        (BigInt::one(), BigInt::zero())
    } else if gb.is_zero() {
        (BigInt::zero(), BigInt::one())
    } else {
        let g = ga.gcd(&gb);
        (&gb / &g, -(&ga / &g))
    };
    let diag = &m0 * &a.0 + &n0 * &b.0;
    if diag.is_zero() {
        return Err(Error::DegenerateLattice(
            "no positive diagonal element".into(),
        ));
    }
    let diag = diag.abs();
    // Minimal positive gap: the gap image is gcd(ga, gb) Z.
    let gap_gen = ga.gcd(&gb);
    debug_assert!(!gap_gen.is_zero());
    // element with gap = gap_gen: solve m*ga + n*gb = gap_gen
    let (g, u, v) = ext_gcd(&ga, &gb);
    debug_assert_eq!(g, gap_gen);
    let ex = &u * &a.0 + &v * &b.0;
    let ey = &u * &a.1 + &v * &b.1;
    // normalize x into [0, diag)
    let shift = ex.div_floor(&diag);
    let ex = &ex - &shift * &diag;
    let ey = &ey - &shift * &diag;
    let r = Rat::new(diag, d.clone());
    let x = Rat::new(ex, d.clone());
    let y = Rat::new(ey, d);
    Ok(((r.clone(), r), (x, y)))
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

/// Closed-form data of the crossing lattice generated by (1/N, 1/N),
/// (lambda, lambda'), and ((e/d) lambda + s/(N d), (e/d) lambda' + s/(N d)):
/// returns (N~, r, lambda~, lambda~').
pub fn crossing_lattice_basis(
    n: u64,
    d: u64,
    e: u64,
    s: i64,
    lam: &Rat,
    lam_prime: &Rat,
) -> Result<(u64, u64, Rat, Rat), Error> {
    let g = gcd_u64(d, e);
    let s_abs = s.unsigned_abs();
    let g_des = gcd_u64(g, s_abs);
    if g_des == 0 {
        return Err(Error::DegenerateLattice("gcd(d, e, s) vanished".into()));
    }
    let n_tilde = n * (g / g_des);
    let r = mod_inverse((e / g) as i64, d / g).ok_or_else(|| {
        Error::StructureViolation(format!("e/gcd = {} not invertible mod {}", e / g, d / g))
    })?;
    let coef = Rat::new(BigInt::from(g), BigInt::from(d));
    let shift = Rat::new(
        BigInt::from(r) * BigInt::from(s),
        BigInt::from(n) * BigInt::from(d),
    );
    let lt = &coef * lam + &shift;
    let ltp = &coef * lam_prime + &shift;
    Ok((n_tilde, r, lt, ltp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat::{rat, rat_int};

    fn path_entries(n: u64, hi: (i64, i64), lo: (i64, i64)) -> Vec<Rat> {
        shortest_n_path(n, &rat(hi.0, hi.1), &rat(lo.0, lo.1))
            .unwrap()
            .entries
    }

    #[test]
    fn golden_paths() {
        assert_eq!(
            path_entries(1, (2, 15), (0, 1)),
            vec![rat(2, 15), rat(1, 8), rat_int(0)]
        );
        assert_eq!(
            path_entries(5, (4, 5), (2, 3)),
            vec![rat(4, 5), rat(7, 10), rat(2, 3)]
        );
        assert_eq!(
            path_entries(3, (2, 3), (2, 5)),
            vec![rat(2, 3), rat(1, 2), rat(4, 9), rat(5, 12), rat(2, 5)]
        );
        assert_eq!(path_entries(1, (1, 1), (0, 1)), vec![rat_int(1), rat_int(0)]);
    }

    #[test]
    fn golden_path_e3() {
        // The 8-path from 1/2 to 0; the printed source sequence ends in a
        // typo and the endpoint is 0 by context.
        assert_eq!(
            path_entries(8, (1, 2), (0, 1)),
            vec![rat(1, 2), rat(3, 8), rat(1, 4), rat(1, 8), rat_int(0)]
        );
    }

    #[test]
    fn non_shortest_path_recognized() {
        // 1 > 1/2 > 2/5 > 3/8 > 1/3 > 0 is a 1-path but not the shortest one.
        let seq = vec![
            rat_int(1),
            rat(1, 2),
            rat(2, 5),
            rat(3, 8),
            rat(1, 3),
            rat_int(0),
        ];
        assert!(is_n_path(1, &seq));
        assert_eq!(path_entries(1, (1, 1), (0, 1)).len(), 2);
    }

    #[test]
    fn alignment_examples() {
        assert!(is_aligned(3, &rat_int(0), &rat(1, 3)).unwrap());
        assert!(is_aligned(1, &rat_int(0), &rat(1, 2)).unwrap());
        assert!(!is_aligned(8, &rat_int(0), &rat(1, 2)).unwrap());
        assert!(is_aligned(8, &rat_int(0), &rat(1, 8)).is_err() == false);
        assert!(is_aligned(8, &rat(1, 2), &rat(1, 2)).is_err());
    }

    #[test]
    fn integer_runs() {
        assert_eq!(
            path_entries(1, (3, 1), (0, 1)),
            vec![rat_int(3), rat_int(2), rat_int(1), rat_int(0)]
        );
    }

    #[test]
    fn scaling_law() {
        let p5 = path_entries(5, (4, 5), (2, 3));
        let p1 = path_entries(1, (4, 1), (10, 3));
        let scaled: Vec<Rat> = p1.into_iter().map(|x| x / rat_int(5)).collect();
        assert_eq!(p5, scaled);
    }

    #[test]
    fn translation_invariance() {
        let a = path_entries(3, (2, 3), (2, 5));
        let b = path_entries(3, (2 + 3 * 2, 3), (2 + 5 * 2, 5)); // shift by 2
        let shifted: Vec<Rat> = b.into_iter().map(|x| x - rat_int(2)).collect();
        assert_eq!(a, shifted);
    }

    #[test]
    fn negative_endpoints_supported() {
        let p = path_entries(1, (1, 2), (-1, 2));
        assert!(is_n_path(1, &p));
        assert_eq!(p.first().unwrap(), &rat(1, 2));
        assert_eq!(p.last().unwrap(), &rat(-1, 2));
    }

    #[test]
    fn lattice_basis_examples() {
        // already reduced
        let l = Lattice2 {
            gens: vec![(rat_int(1), rat_int(1)), (rat(1, 3), rat(1, 2))],
        };
        let ((r, _), (x, y)) = lattice_basis(&l).unwrap();
        assert_eq!(r, rat_int(1));
        assert_eq!((x, y), (rat(1, 3), rat(1, 2)));
        // degenerate: rank 1
        let l = Lattice2 {
            gens: vec![(rat_int(1), rat_int(1))],
        };
        assert!(matches!(lattice_basis(&l), Err(Error::DegenerateLattice(_))));
    }

    #[test]
    fn crossing_closed_forms_match_examples() {
        // N=2, d=8, e=4, s=2, lambda=1, lambda'=5/4 -> N~=4, (5/8, 3/4)
        let (nt, r, lt, ltp) =
            crossing_lattice_basis(2, 8, 4, 2, &rat_int(1), &rat(5, 4)).unwrap();
        assert_eq!(nt, 4);
        assert_eq!(r, 1);
        assert_eq!(lt, rat(5, 8));
        assert_eq!(ltp, rat(3, 4));
        // N=3, d=5, e=1, s=0, lambda=2, lambda'=10/3 -> N~=3, (2/5, 2/3)
        let (nt, r, lt, ltp) =
            crossing_lattice_basis(3, 5, 1, 0, &rat_int(2), &rat(10, 3)).unwrap();
        assert_eq!(nt, 3);
        assert_eq!(r, 1);
        assert_eq!(lt, rat(2, 5));
        assert_eq!(ltp, rat(2, 3));
    }

    #[test]
    fn closed_forms_generate_the_same_lattice() {
        // The reduced basis of the three-generator lattice generates the same
        // subgroup as the closed forms.
        for (n, d, e, s, lam, lamp) in [
            (2u64, 8u64, 4u64, 2i64, rat_int(1), rat(5, 4)),
            (3, 5, 1, 0, rat_int(2), rat(10, 3)),
            (1, 5, 3, 0, rat_int(0), rat(2, 3)),
            (1, 8, 8, 1, rat_int(0), rat(1, 2)),
        ] {
            let frac = |v: i64, w: i64| Rat::new(BigInt::from(v), BigInt::from(w));
            let zmul = &Rat::new(BigInt::from(e), BigInt::from(d));
            let shift = frac(s, (n * d) as i64);
            let gens = Lattice2 {
                gens: vec![
                    (frac(1, n as i64), frac(1, n as i64)),
                    (lam.clone(), lamp.clone()),
                    (zmul * &lam + &shift, zmul * &lamp + &shift),
                ],
            };
            let ((r, _), (x, y)) = lattice_basis(&gens).unwrap();
            let (nt, _, lt, ltp) = crossing_lattice_basis(n, d, e, s, &lam, &lamp).unwrap();
            assert_eq!(r, frac(1, nt as i64), "diagonal for {n} {d} {e} {s}");
            // (lt, ltp) must lie in the lattice spanned by (r, r) and (x, y):
            // their gaps agree up to sign and the diagonal part is integral.
            let gap_basis = &y - &x;
            let gap_closed = &ltp - &lt;
            let q = &gap_closed / &gap_basis;
            assert!(q.is_integer());
            let diag = &lt - &x * &q;
            assert!((&diag / &r).is_integer(), "diagonal remainder {diag}");
        }
    }
}
