//! Standard bases in the local ring `K[x,y]_(x,y)` (local degree reverse
//! lexicographic order), Mora normal forms and colength computations.
//!
//! All computations take place in `K[x,y] / m^B` for a degree bound `B`;
//! results are certified by repeating the computation at `B + 8`.
//! Monomials are pairs `(i, j)` standing for `x^i y^j`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::coeffield::{Elem, Field};
use crate::error::{Error, Result};
use crate::linalg::Echelon;
use crate::series::BiSeries;

/// Largest degree bound tried before giving up.
pub const DEGREE_BOUND_CAP: usize = 256;

/// Local degree reverse lexicographic comparison: lower total degree is
/// larger; within a degree, the larger power of `x` is larger.
pub fn local_cmp(a: (usize, usize), b: (usize, usize)) -> Ordering {
    let da = a.0 + a.1;
    let db = b.0 + b.1;
    db.cmp(&da).then(a.0.cmp(&b.0))
}

/// Sort key: ascending key means descending in the local order.
pub fn local_key(m: (usize, usize)) -> (usize, usize) {
    (m.0 + m.1, m.1)
}

/// Leading monomial and coefficient.
pub fn leading(f: &BiSeries) -> Option<((usize, usize), Elem)> {
    f.terms().min_by_key(|(m, _)| local_key(**m)).map(|(m, c)| (*m, c.clone()))
}

fn divides(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 <= b.0 && a.1 <= b.1
}

fn ecart(f: &BiSeries) -> usize {
    let lm = leading(f).map(|(m, _)| m.0 + m.1).unwrap_or(0);
    f.total_degree().unwrap_or(0) - lm
}

/// Mora's weak normal form (écart-driven choice of reducers).
fn weak_nf(f: &BiSeries, g: &[BiSeries], bound: usize) -> BiSeries {
    let k = f.field.clone();
    let mut h = f.truncate(bound);
    let mut t: Vec<BiSeries> = g.to_vec();
    loop {
        let Some((lm, lc)) = leading(&h) else {
            return h;
        };
        let cand = t
            .iter()
            .enumerate()
            .filter_map(|(idx, p)| leading(p).filter(|(m, _)| divides(*m, lm)).map(|_| (ecart(p), idx)))
            .min();
        let Some((e, idx)) = cand else {
            return h;
        };
        let p = t[idx].clone();
        if e > ecart(&h) {
            t.push(h.clone());
        }
        let (pm, pc) = leading(&p).unwrap();
        let c = k.div(&lc, &pc).expect("nonzero leading coefficient");
        let mono = BiSeries::monomial(&k, lm.0 - pm.0, lm.1 - pm.1, c);
        h = h.sub(&mono.mul(&p)).truncate(bound);
    }
}

/// Fully reduced Mora normal form of `f` modulo `g` in `K[x,y]/m^bound`:
/// no term of the result is divisible by a leading monomial of `g`.
pub fn mora_reduce(f: &BiSeries, g: &[BiSeries], bound: usize) -> BiSeries {
    let k = f.field.clone();
    let mut rest = weak_nf(f, g, bound);
    let mut out = BiSeries::zero(&k).truncate(bound);
    while let Some((lm, lc)) = leading(&rest) {
        let lt = BiSeries::monomial(&k, lm.0, lm.1, lc);
        out = out.add(&lt);
        rest = weak_nf(&rest.sub(&lt), g, bound);
    }
    out
}

fn spoly(f: &BiSeries, g: &BiSeries, bound: usize) -> BiSeries {
    let k = f.field.clone();
    let (fm, fc) = leading(f).unwrap();
    let (gm, gc) = leading(g).unwrap();
    let l = (fm.0.max(gm.0), fm.1.max(gm.1));
    let a = BiSeries::monomial(&k, l.0 - fm.0, l.1 - fm.1, k.inv(&fc).unwrap());
    let b = BiSeries::monomial(&k, l.0 - gm.0, l.1 - gm.1, k.inv(&gc).unwrap());
    a.mul(f).sub(&b.mul(g)).truncate(bound)
}

/// Standard basis of the ideal generated by `gens` in `K[x,y]/m^bound`,
/// minimal with respect to leading monomials.
pub fn std_basis(gens: &[BiSeries], bound: usize) -> Vec<BiSeries> {
    let mut basis: Vec<BiSeries> = Vec::new();
    for g in gens {
        let r = weak_nf(g, &basis, bound);
        if !r.is_zero() {
            basis.push(r);
        }
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    while !pairs.is_empty() {
        // smallest lcm degree first
        let (pos, _) = pairs
            .iter()
            .enumerate()
            .min_by_key(|(_, (i, j))| {
                let a = leading(&basis[*i]).unwrap().0;
                let b = leading(&basis[*j]).unwrap().0;
                (a.0.max(b.0) + a.1.max(b.1), *i, *j)
            })
            .unwrap();
        let (i, j) = pairs.swap_remove(pos);
        let a = leading(&basis[i]).unwrap().0;
        let b = leading(&basis[j]).unwrap().0;
        if a.0.max(b.0) + a.1.max(b.1) >= bound {
            continue;
        }
        // product criterion
        if a.0.min(b.0) == 0 && a.1.min(b.1) == 0 {
            continue;
        }
        let s = spoly(&basis[i], &basis[j], bound);
        let r = weak_nf(&s, &basis, bound);
        if !r.is_zero() {
            let n = basis.len();
            basis.push(r);
            for i in 0..n {
                pairs.push((i, n));
            }
        }
    }
    // minimalize
    let lms: Vec<(usize, usize)> = basis.iter().map(|g| leading(g).unwrap().0).collect();
    let mut keep = Vec::new();
    for (idx, g) in basis.iter().enumerate() {
        let m = lms[idx];
        let redundant = lms.iter().enumerate().any(|(o, &n)| o != idx && divides(n, m) && (n != m || o < idx));
        if !redundant {
            keep.push(g.clone());
        }
    }
    keep.sort_by_key(|a| local_key(leading(a).unwrap().0));
    keep
}

/// Colength data of an ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientInfo {
    /// `dim_K K[[x,y]] / I`.
    pub dim: usize,
    /// Standard monomials (a monomial basis of the quotient), in local order.
    pub basis: Vec<(usize, usize)>,
    /// Minimal generators of the leading ideal.
    pub corners: Vec<(usize, usize)>,
    /// Degree bound at which the result was certified.
    pub bound: usize,
}

fn staircase(lms: &[(usize, usize)], bound: usize) -> Option<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    let has_x = lms.iter().any(|m| m.1 == 0);
    let has_y = lms.iter().any(|m| m.0 == 0);
    if !has_x || !has_y {
        return None;
    }
    let mut basis = Vec::new();
    for d in 0..bound {
        for i in (0..=d).rev() {
            let m = (i, d - i);
            if !lms.iter().any(|l| divides(*l, m)) {
                basis.push(m);
            }
        }
    }
    let mut corners: Vec<(usize, usize)> =
        lms.iter().filter(|m| !lms.iter().any(|l| l != *m && divides(*l, **m))).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    corners.sort_by_key(|m| local_key(*m));
    Some((basis, corners))
}

fn quotient_at(gens: &[BiSeries], bound: usize) -> Option<QuotientInfo> {
    let sb = std_basis(gens, bound);
    let lms: Vec<(usize, usize)> = sb.iter().map(|g| leading(g).unwrap().0).collect();
    let (basis, corners) = staircase(&lms, bound)?;
    // staircase must close strictly below the bound
    let max_deg = basis.iter().map(|m| m.0 + m.1).max().unwrap_or(0);
    if max_deg + 1 >= bound {
        return None;
    }
    Some(QuotientInfo { dim: basis.len(), basis, corners, bound })
}

fn default_bound(gens: &[BiSeries]) -> usize {
    let d = gens.iter().filter_map(|g| leading(g).map(|(m, _)| m.0 + m.1)).max().unwrap_or(1);
    2 * d + 4
}

/// `dim_K K[[x,y]]/I` with a monomial basis, certified at `bound` and
/// `bound + 8` (bound doubled until stable).
pub fn quotient_dim(gens: &[BiSeries], bound: Option<usize>) -> Result<QuotientInfo> {
    quotient_dim_with(gens, bound, quotient_at)
}

/// Same as [`quotient_dim`] but by plain linear algebra on all monomial
/// multiples of the generators (no standard basis).
pub fn brute_force_quotient(gens: &[BiSeries], bound: Option<usize>) -> Result<QuotientInfo> {
    quotient_dim_with(gens, bound, brute_at)
}

fn quotient_dim_with(
    gens: &[BiSeries],
    bound: Option<usize>,
    at: fn(&[BiSeries], usize) -> Option<QuotientInfo>,
) -> Result<QuotientInfo> {
    let mut b = bound.unwrap_or_else(|| default_bound(gens)).max(2);
    if gens.iter().all(|g| g.is_zero()) {
        return Err(Error::NotZeroDimensionalWithinBound(b));
    }
    if gens.iter().any(|g| !g.is_zero() && leading(g).unwrap().0 == (0, 0)) {
        return Ok(QuotientInfo { dim: 0, basis: Vec::new(), corners: vec![(0, 0)], bound: b });
    }
    let mut last = None;
    while b <= DEGREE_BOUND_CAP {
        match (at(gens, b), at(gens, b + 8)) {
            (Some(a), Some(c)) if a.dim == c.dim && a.basis == c.basis => return Ok(a),
            (a, _) => last = a.map(|q| q.dim),
        }
        if bound.is_some() && b == bound.unwrap() {
            // refine once from the first computed corner degree
            if let Some(q) = at(gens, b) {
                let first = q.corners.iter().map(|m| m.0 + m.1).max().unwrap_or(1);
                let nb = 2 * first + 4;
                if nb > b {
                    b = nb;
                    continue;
                }
            }
        }
        b *= 2;
    }
    match last {
        Some(d) => Err(Error::UnstableTruncation(format!("colength {d} did not stabilise below degree {DEGREE_BOUND_CAP}"))),
        None => Err(Error::NotZeroDimensionalWithinBound(DEGREE_BOUND_CAP)),
    }
}

/// Monomials of degree `< bound` in local order (column order for the
/// brute-force computation).
pub fn monomials_below(bound: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for d in 0..bound {
        for i in (0..=d).rev() {
            out.push((i, d - i));
        }
    }
    out
}

/// Column index of a monomial in [`monomials_below`].
pub fn monomial_index(m: (usize, usize)) -> usize {
    let d = m.0 + m.1;
    d * (d + 1) / 2 + (d - m.0)
}

/// Echelon basis of `(I + m^bound)/m^bound` in the monomial coordinates of
/// [`monomials_below`].
pub fn ideal_echelon(gens: &[BiSeries], bound: usize) -> Echelon {
    let k = gens[0].field.clone();
    let ncols = bound * (bound + 1) / 2;
    let mut e = Echelon::new(&k, ncols);
    for g in gens {
        let ord = g.order_lb();
        if ord >= bound {
            continue;
        }
        for d in 0..bound - ord {
            for a in 0..=d {
                let mut row = vec![k.zero(); ncols];
                let mut any = false;
                for ((i, j), c) in g.terms() {
                    let m = (i + a, j + d - a);
                    if m.0 + m.1 < bound {
                        row[monomial_index(m)] = c.clone();
                        any = true;
                    }
                }
                if any {
                    e.insert(row);
                }
            }
        }
    }
    e
}

fn brute_at(gens: &[BiSeries], bound: usize) -> Option<QuotientInfo> {
    let e = ideal_echelon(gens, bound);
    let mons = monomials_below(bound);
    let lms: Vec<(usize, usize)> = e.pivots().iter().map(|&c| mons[c]).collect();
    let (basis, corners) = staircase(&lms, bound)?;
    let max_deg = basis.iter().map(|m| m.0 + m.1).max().unwrap_or(0);
    if max_deg + 1 >= bound {
        return None;
    }
    Some(QuotientInfo { dim: basis.len(), basis, corners, bound })
}

/// Whether `f` lies in the ideal (normal form zero modulo a standard basis).
pub fn ideal_member(f: &BiSeries, gens: &[BiSeries], bound: usize) -> bool {
    let sb = std_basis(gens, bound);
    mora_reduce(f, &sb, bound).is_zero()
}

/// Convenience constructor used by callers that work with field handles.
pub fn tjurina_generators(f: &BiSeries) -> Vec<BiSeries> {
    vec![f.clone(), f.derivative_x(), f.derivative_y()]
}

/// Generators of `<f> + m * <f_x, f_y>` (the ideal whose colength is the
/// dimension of first-order deformations with trivial section, plus one).
pub fn tjurina_with_section_generators(f: &BiSeries) -> Vec<BiSeries> {
    let k = &f.field;
    let x = BiSeries::x(k);
    let y = BiSeries::y(k);
    let fx = f.derivative_x();
    let fy = f.derivative_y();
    vec![f.clone(), x.mul(&fx), y.mul(&fx), x.mul(&fy), y.mul(&fy)]
}

#[allow(dead_code)]
fn _assert_field(_: &Field) {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffield::make_field;

    #[test]
    fn reduction_by_the_cusp() {
        let q = Field::rationals();
        let g = BiSeries::from_ints(&q, &[(0, 2, 1), (3, 0, -1)]);
        let y2 = BiSeries::from_ints(&q, &[(0, 2, 1)]);
        let x3 = BiSeries::from_ints(&q, &[(3, 0, 1)]);
        assert_eq!(mora_reduce(&y2, std::slice::from_ref(&g), 12), x3.truncate(12));
        assert_eq!(mora_reduce(&x3, &[g], 12), x3.truncate(12));
    }

    #[test]
    fn leading_ideal_in_characteristic_two() {
        let f2 = make_field(2, 1).unwrap();
        let gens = vec![
            BiSeries::from_ints(&f2, &[(7, 0, 1)]),
            BiSeries::from_ints(&f2, &[(6, 1, 1)]),
            BiSeries::from_ints(&f2, &[(0, 4, 1), (6, 0, 1)]),
        ];
        let q = quotient_dim(&gens, None).unwrap();
        assert_eq!(q.dim, 25);
        assert_eq!(q.corners, vec![(0, 4), (7, 0), (6, 1)]);
        assert_eq!(brute_force_quotient(&gens, None).unwrap().dim, 25);
    }

    #[test]
    fn small_quotient_basis() {
        let q = Field::rationals();
        let gens = vec![BiSeries::from_ints(&q, &[(0, 1, 2)]), BiSeries::from_ints(&q, &[(2, 0, 3)])];
        let info = quotient_dim(&gens, None).unwrap();
        assert_eq!(info.dim, 2);
        assert_eq!(info.basis, vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn non_isolated_is_reported() {
        let q = Field::rationals();
        let gens = vec![BiSeries::from_ints(&q, &[(0, 2, 1)])];
        assert!(matches!(quotient_dim(&gens, Some(8)), Err(Error::NotZeroDimensionalWithinBound(_))));
    }
}
