//! Hensel lifting of coprime factorizations over a complete local ring.
//!
//! The lifting is written once against [`LocalRing`] and used both for
//! truncated power series `K[[x]]/(x^N)` (tangential splitting of curve
//! germs) and for truncated parameter rings (splitting tangent cones of
//! deformations).  Both rings have a nilpotent maximal ideal, so the linear
//! lifting step below terminates with an exact factorization.

use crate::coeffield::{Elem, Field};
use crate::error::{Error, Result};
use crate::upoly::{self, UPoly};

/// A commutative local ring with residue field `K` whose maximal ideal is
/// nilpotent (everything is truncated).
pub trait LocalRing: Clone {
    fn field(&self) -> &Field;
    fn zero_like(&self) -> Self;
    fn constant_like(&self, c: &Elem) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: &Elem) -> Self;
    fn is_zero(&self) -> bool;
    /// Image in the residue field.
    fn residue(&self) -> Elem;
}

/// Polynomial in `y` with coefficients in a local ring, low degree first.
pub type RPoly<R> = Vec<R>;

fn rp_trim<R: LocalRing>(a: &mut RPoly<R>) {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
}

fn rp_add<R: LocalRing>(proto: &R, a: &[R], b: &[R]) -> RPoly<R> {
    let n = a.len().max(b.len());
    let z = proto.zero_like();
    let mut r: RPoly<R> = (0..n).map(|i| a.get(i).unwrap_or(&z).add(b.get(i).unwrap_or(&z))).collect();
    rp_trim(&mut r);
    r
}

fn rp_sub<R: LocalRing>(proto: &R, a: &[R], b: &[R]) -> RPoly<R> {
    let n = a.len().max(b.len());
    let z = proto.zero_like();
    let mut r: RPoly<R> = (0..n).map(|i| a.get(i).unwrap_or(&z).sub(b.get(i).unwrap_or(&z))).collect();
    rp_trim(&mut r);
    r
}

pub fn rp_mul<R: LocalRing>(proto: &R, a: &[R], b: &[R]) -> RPoly<R> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![proto.zero_like(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                r[i + j] = r[i + j].add(&x.mul(y));
            }
        }
    }
    rp_trim(&mut r);
    r
}

/// Multiply an `R`-polynomial by a `K`-polynomial.
fn rp_mul_k<R: LocalRing>(proto: &R, a: &[R], k: &[Elem]) -> RPoly<R> {
    let f = proto.field();
    if a.is_empty() || k.is_empty() {
        return Vec::new();
    }
    let mut r = vec![proto.zero_like(); a.len() + k.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, c) in k.iter().enumerate() {
            if !f.is_zero(c) {
                r[i + j] = r[i + j].add(&x.scale(c));
            }
        }
    }
    rp_trim(&mut r);
    r
}

/// Division of an `R`-polynomial by a monic `K`-polynomial.
fn rp_divrem_k<R: LocalRing>(proto: &R, a: &[R], m: &[Elem]) -> (RPoly<R>, RPoly<R>) {
    let dm = m.len() - 1;
    let mut r: RPoly<R> = a.to_vec();
    rp_trim(&mut r);
    if r.len() <= dm {
        return (Vec::new(), r);
    }
    let mut q = vec![proto.zero_like(); r.len() - dm];
    while r.len() > dm {
        let top = r.len() - 1;
        let c = r[top].clone();
        let shift = top - dm;
        for (i, mi) in m.iter().enumerate() {
            r[shift + i] = r[shift + i].sub(&c.scale(mi));
        }
        q[shift] = c;
        r.pop();
        rp_trim(&mut r);
    }
    rp_trim(&mut q);
    (q, r)
}

fn residue_poly<R: LocalRing>(f: &Field, a: &[R]) -> UPoly {
    let mut r: UPoly = a.iter().map(|c| c.residue()).collect();
    upoly::trim(f, &mut r);
    r
}

/// Lift `f = g0 * h0 (mod m_R)` with `g0` monic and coprime to `h0` to an
/// exact factorization `f = g * h`, `g` monic lifting `g0`.
pub fn lift_two<R: LocalRing>(proto: &R, fpoly: &[R], g0: &[Elem], h0: &[Elem], max_iter: usize) -> Result<(RPoly<R>, RPoly<R>)> {
    let k = proto.field();
    let (gcd, s, t) = upoly::xgcd(k, g0, h0);
    if gcd.len() != 1 {
        return Err(Error::NotCoprime);
    }
    let lift = |p: &[Elem]| -> RPoly<R> {
        let mut r: RPoly<R> = p.iter().map(|c| proto.constant_like(c)).collect();
        rp_trim(&mut r);
        r
    };
    let mut g = lift(g0);
    let mut h = lift(h0);
    for _ in 0..max_iter {
        let e = rp_sub(proto, fpoly, &rp_mul(proto, &g, &h));
        if e.is_empty() {
            return Ok((g, h));
        }
        let et = rp_mul_k(proto, &e, &t);
        let (quo, a) = rp_divrem_k(proto, &et, g0);
        let b = rp_add(proto, &rp_mul_k(proto, &e, &s), &rp_mul_k(proto, &quo, h0));
        g = rp_add(proto, &g, &a);
        h = rp_add(proto, &h, &b);
    }
    Err(Error::PrecisionUnderflow("Hensel lifting did not converge".into()))
}

/// Lift a coprime factorization `f = prod init_j (mod m_R)` to `f = prod F_j`
/// with `F_j = init_j (mod m_R)`.
pub fn lift_factors<R: LocalRing>(proto: &R, fpoly: &[R], init: &[UPoly], max_iter: usize) -> Result<Vec<RPoly<R>>> {
    let k = proto.field();
    if init.is_empty() {
        return Err(Error::InvalidInput("no initial factors".into()));
    }
    let mut prod = vec![k.one()];
    for p in init {
        if p.is_empty() {
            return Err(Error::InvalidInput("zero initial factor".into()));
        }
        prod = upoly::mul(k, &prod, p);
    }
    if residue_poly(k, fpoly) != prod {
        return Err(Error::InvalidInput("initial factors do not multiply to the reduction".into()));
    }
    for i in 0..init.len() {
        for j in i + 1..init.len() {
            if upoly::gcd(k, &init[i], &init[j]).len() != 1 {
                return Err(Error::NotCoprime);
            }
        }
    }
    let mut out = Vec::new();
    let mut rest: RPoly<R> = fpoly.to_vec();
    let mut rest0 = prod;
    for (idx, p) in init.iter().enumerate() {
        if idx + 1 == init.len() {
            out.push(rest);
            break;
        }
        let lc = p.last().unwrap().clone();
        let g0 = upoly::monic(k, p);
        let h0 = upoly::divrem(k, &rest0, &g0)?.0;
        let (g, h) = lift_two(proto, &rest, &g0, &h0, max_iter)?;
        let lc_inv = k.inv(&lc)?;
        out.push(g.iter().map(|c| c.scale(&lc)).collect());
        rest = h.iter().map(|c| c.scale(&lc_inv)).collect();
        rest0 = upoly::scale(k, &h0, &lc_inv);
    }
    Ok(out)
}

/// `K[[x]] / (x^n)`, used as the coefficient ring for `x`-adic lifting.
#[derive(Clone, Debug)]
pub struct TruncSeries {
    pub field: Field,
    pub c: Vec<Elem>,
    pub n: usize,
}

impl TruncSeries {
    pub fn new(field: &Field, mut c: Vec<Elem>, n: usize) -> Self {
        c.truncate(n);
        while c.last().is_some_and(|x| field.is_zero(x)) {
            c.pop();
        }
        TruncSeries { field: field.clone(), c, n }
    }
}

impl LocalRing for TruncSeries {
    fn field(&self) -> &Field {
        &self.field
    }
    fn zero_like(&self) -> Self {
        TruncSeries { field: self.field.clone(), c: Vec::new(), n: self.n }
    }
    fn constant_like(&self, c: &Elem) -> Self {
        TruncSeries::new(&self.field, vec![c.clone()], self.n)
    }
    fn add(&self, o: &Self) -> Self {
        TruncSeries::new(&self.field, upoly::add(&self.field, &self.c, &o.c), self.n)
    }
    fn sub(&self, o: &Self) -> Self {
        TruncSeries::new(&self.field, upoly::sub(&self.field, &self.c, &o.c), self.n)
    }
    fn mul(&self, o: &Self) -> Self {
        let f = &self.field;
        if self.c.is_empty() || o.c.is_empty() {
            return self.zero_like();
        }
        let len = (self.c.len() + o.c.len() - 1).min(self.n);
        let mut r = vec![f.zero(); len];
        for (i, x) in self.c.iter().enumerate() {
            if f.is_zero(x) {
                continue;
            }
            for (j, y) in o.c.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                r[i + j] = f.add(&r[i + j], &f.mul(x, y));
            }
        }
        TruncSeries::new(f, r, self.n)
    }
    fn scale(&self, c: &Elem) -> Self {
        TruncSeries::new(&self.field, upoly::scale(&self.field, &self.c, c), self.n)
    }
    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    fn residue(&self) -> Elem {
        self.c.first().cloned().unwrap_or_else(|| self.field.zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffield::make_field;

    #[test]
    fn lifts_y2_minus_1_minus_x() {
        // y^2 - (1 + x) over F_5 splits as (y - s)(y + s), s = sqrt(1+x)
        let f = make_field(5, 1).unwrap();
        let n = 8;
        let proto = TruncSeries::new(&f, vec![], n);
        let c0 = TruncSeries::new(&f, vec![f.from_i64(-1), f.from_i64(-1)], n);
        let poly = vec![c0, proto.zero_like(), proto.constant_like(&f.one())];
        let init = vec![vec![f.from_i64(-1), f.one()], vec![f.from_i64(1), f.one()]];
        let fac = lift_factors(&proto, &poly, &init, 64).unwrap();
        let prod = rp_mul(&proto, &fac[0], &fac[1]);
        let d = rp_sub(&proto, &prod, &poly);
        assert!(d.is_empty());
    }

    #[test]
    fn non_coprime_factors_rejected() {
        let f = make_field(5, 1).unwrap();
        let proto = TruncSeries::new(&f, vec![], 4);
        let poly = vec![proto.zero_like(), proto.zero_like(), proto.constant_like(&f.one())];
        let init = vec![vec![f.zero(), f.one()], vec![f.zero(), f.one()]];
        assert_eq!(lift_factors(&proto, &poly, &init, 16).unwrap_err(), Error::NotCoprime);
    }
}
