//! Dense univariate polynomials over a [`Field`], low degree first.
//!
//! Used for tangent cones, Bezout identities in Hensel lifting and root
//! finding.  A polynomial is a `Vec<Elem>` with no trailing zeros; the zero
//! polynomial is the empty vector.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::coeffield::{Elem, Field};
use crate::error::{Error, Result};

pub type UPoly = Vec<Elem>;

pub fn trim(f: &Field, a: &mut UPoly) {
    while a.last().is_some_and(|c| f.is_zero(c)) {
        a.pop();
    }
}

/// Degree, `None` for the zero polynomial.
pub fn degree(a: &[Elem]) -> Option<usize> {
    if a.is_empty() {
        None
    } else {
        Some(a.len() - 1)
    }
}

pub fn add(f: &Field, a: &[Elem], b: &[Elem]) -> UPoly {
    let n = a.len().max(b.len());
    let z = f.zero();
    let mut r: UPoly = (0..n).map(|i| f.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect();
    trim(f, &mut r);
    r
}

pub fn sub(f: &Field, a: &[Elem], b: &[Elem]) -> UPoly {
    let n = a.len().max(b.len());
    let z = f.zero();
    let mut r: UPoly = (0..n).map(|i| f.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect();
    trim(f, &mut r);
    r
}

pub fn scale(f: &Field, a: &[Elem], c: &Elem) -> UPoly {
    let mut r: UPoly = a.iter().map(|x| f.mul(x, c)).collect();
    trim(f, &mut r);
    r
}

pub fn mul(f: &Field, a: &[Elem], b: &[Elem]) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            r[i + j] = f.add(&r[i + j], &f.mul(x, y));
        }
    }
    trim(f, &mut r);
    r
}

/// Euclidean division; the divisor must be nonzero.
pub fn divrem(f: &Field, a: &[Elem], b: &[Elem]) -> Result<(UPoly, UPoly)> {
    let db = degree(b).ok_or(Error::DivisionByZero)?;
    let lead_inv = f.inv(&b[db])?;
    let mut r = a.to_vec();
    trim(f, &mut r);
    if r.len() <= db {
        return Ok((Vec::new(), r));
    }
    let mut q = vec![f.zero(); r.len() - db];
    while r.len() > db {
        let top = r.len() - 1;
        let c = f.mul(&r[top], &lead_inv);
        let shift = top - db;
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = f.sub(&r[shift + i], &f.mul(&c, bi));
        }
        q[shift] = c;
        r.pop();
        trim(f, &mut r);
    }
    trim(f, &mut q);
    Ok((q, r))
}

pub fn rem(f: &Field, a: &[Elem], b: &[Elem]) -> Result<UPoly> {
    Ok(divrem(f, a, b)?.1)
}

/// Make monic (zero stays zero).
pub fn monic(f: &Field, a: &[Elem]) -> UPoly {
    match a.last() {
        None => Vec::new(),
        Some(l) => {
            let inv = f.inv(l).expect("nonzero leading coefficient");
            scale(f, a, &inv)
        }
    }
}

/// Monic greatest common divisor.
pub fn gcd(f: &Field, a: &[Elem], b: &[Elem]) -> UPoly {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(f, &mut x);
    trim(f, &mut y);
    while !y.is_empty() {
        let r = rem(f, &x, &y).expect("nonzero divisor");
        x = y;
        y = r;
    }
    monic(f, &x)
}

/// Extended gcd: returns `(g, s, t)` with `s a + t b = g`, `g` monic.
pub fn xgcd(f: &Field, a: &[Elem], b: &[Elem]) -> (UPoly, UPoly, UPoly) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    trim(f, &mut r0);
    trim(f, &mut r1);
    let (mut s0, mut s1) = (vec![f.one()], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![f.one()]);
    while !r1.is_empty() {
        let (q, r) = divrem(f, &r0, &r1).expect("nonzero divisor");
        let s = sub(f, &s0, &mul(f, &q, &s1));
        let t = sub(f, &t0, &mul(f, &q, &t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        t0 = std::mem::replace(&mut t1, t);
    }
    if let Some(l) = r0.last().cloned() {
        let inv = f.inv(&l).expect("nonzero");
        (scale(f, &r0, &inv), scale(f, &s0, &inv), scale(f, &t0, &inv))
    } else {
        (r0, s0, t0)
    }
}

pub fn eval(f: &Field, a: &[Elem], x: &Elem) -> Elem {
    let mut acc = f.zero();
    for c in a.iter().rev() {
        acc = f.add(&f.mul(&acc, x), c);
    }
    acc
}

pub fn derivative(f: &Field, a: &[Elem]) -> UPoly {
    let mut r: UPoly = a.iter().enumerate().skip(1).map(|(i, c)| f.mul(c, &f.from_usize(i))).collect();
    trim(f, &mut r);
    r
}

/// `base^e mod m`.
pub fn powmod(f: &Field, base: &[Elem], mut e: u64, m: &[Elem]) -> UPoly {
    let mut r = rem(f, &[f.one()], m).unwrap();
    let mut b = rem(f, base, m).unwrap();
    while e > 0 {
        if e & 1 == 1 {
            r = rem(f, &mul(f, &r, &b), m).unwrap();
        }
        b = rem(f, &mul(f, &b, &b), m).unwrap();
        e >>= 1;
    }
    r
}

/// `x^{q^i} mod m` computed by repeated `q`-th powering.
fn x_to_q_pow(f: &Field, i: u32, m: &[Elem]) -> UPoly {
    let q = f.order().expect("finite field");
    let mut r = rem(f, &[f.zero(), f.one()], m).unwrap();
    for _ in 0..i {
        r = powmod(f, &r, q, m);
    }
    r
}

/// Distinct roots of the part of `a` that splits into linear factors,
/// together with the degrees of the irreducible non-linear factors.
/// Roots are returned in canonical element order.
pub fn roots_and_factor_degrees(f: &Field, a: &[Elem]) -> Result<(Vec<Elem>, Vec<usize>)> {
    let mut a = a.to_vec();
    trim(f, &mut a);
    if a.is_empty() {
        return Err(Error::InvalidInput("roots of the zero polynomial".into()));
    }
    if f.is_finite() {
        finite_roots(f, &a)
    } else {
        rational_roots(f, &a)
    }
}

/// Multiplicity of `r` as a root of `a`.
pub fn root_multiplicity(f: &Field, a: &[Elem], r: &Elem) -> usize {
    let lin = vec![f.neg(r), f.one()];
    let mut cur = a.to_vec();
    trim(f, &mut cur);
    let mut k = 0;
    while !cur.is_empty() {
        let (q, rm) = divrem(f, &cur, &lin).unwrap();
        if !rm.is_empty() {
            break;
        }
        cur = q;
        k += 1;
    }
    k
}

fn finite_roots(f: &Field, a: &[Elem]) -> Result<(Vec<Elem>, Vec<usize>)> {
    let x = vec![f.zero(), f.one()];
    // ddf on the full polynomial
    let mut h = monic(f, a);
    let mut degrees = Vec::new();
    let mut split = Vec::new();
    let mut i = 1u32;
    while degree(&h).unwrap_or(0) > 0 {
        let xq = x_to_q_pow(f, i, &h);
        let g = gcd(f, &h, &sub(f, &xq, &x));
        if degree(&g).unwrap_or(0) > 0 {
            if i == 1 {
                split = g.clone();
            } else {
                degrees.push(i as usize);
            }
            loop {
                let c = gcd(f, &h, &g);
                if degree(&c).unwrap_or(0) == 0 {
                    break;
                }
                h = divrem(f, &h, &c)?.0;
            }
        }
        i += 1;
    }
    let mut roots = Vec::new();
    if degree(&split).unwrap_or(0) > 0 {
        split_linear(f, &monic(f, &split), &mut roots)?;
    }
    roots.sort();
    roots.dedup();
    degrees.sort();
    degrees.dedup();
    Ok((roots, degrees))
}

/// Roots of a monic squarefree product of distinct linear factors.
fn split_linear(f: &Field, g: &[Elem], out: &mut Vec<Elem>) -> Result<()> {
    let d = degree(g).unwrap_or(0);
    if d == 0 {
        return Ok(());
    }
    if d == 1 {
        out.push(f.neg(&g[0]));
        return Ok(());
    }
    let q = f.order().unwrap();
    if q <= 1 << 12 {
        for e in f.elements().unwrap() {
            if f.is_zero(&eval(f, g, &e)) {
                out.push(e);
            }
        }
        return Ok(());
    }
    let p = f.characteristic();
    for a in f.elements().unwrap().skip(1) {
        let probe = if p == 2 {
            // trace of a*x
            let ax = vec![f.zero(), a.clone()];
            let mut t = rem(f, &ax, g)?;
            let mut acc = t.clone();
            for _ in 1..f.degree() {
                t = rem(f, &mul(f, &t, &t), g)?;
                acc = add(f, &acc, &t);
            }
            acc
        } else {
            let xa = vec![a.clone(), f.one()];
            sub(f, &powmod(f, &xa, (q - 1) / 2, g), &[f.one()])
        };
        let h = gcd(f, g, &probe);
        let dh = degree(&h).unwrap_or(0);
        if dh > 0 && dh < d {
            let other = divrem(f, g, &h)?.0;
            split_linear(f, &h, out)?;
            split_linear(f, &monic(f, &other), out)?;
            return Ok(());
        }
    }
    Err(Error::InvalidInput("equal-degree splitting failed".into()))
}

const MAX_RATIONAL_ROOT_COEFF: u64 = 1_000_000_000_000;

fn divisors(n: &BigInt) -> Result<Vec<BigInt>> {
    let n = n.abs();
    let v = n.to_u64().filter(|&v| v <= MAX_RATIONAL_ROOT_COEFF).ok_or_else(|| {
        Error::IrrationalTangent(format!("coefficient {n} too large for rational root search"))
    })?;
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= v {
        if v % d == 0 {
            out.push(BigInt::from(d));
            if d != v / d {
                out.push(BigInt::from(v / d));
            }
        }
        d += 1;
    }
    Ok(out)
}

fn rational_roots(f: &Field, a: &[Elem]) -> Result<(Vec<Elem>, Vec<usize>)> {
    // clear denominators
    let mut lcm = BigInt::one();
    for c in a {
        if let Elem::Rat(r) = c {
            lcm = lcm.lcm(r.denom());
        }
    }
    let ints: Vec<BigInt> = a
        .iter()
        .map(|c| match c {
            Elem::Rat(r) => (r * BigRational::from_integer(lcm.clone())).to_integer(),
            Elem::Fin(_) => unreachable!(),
        })
        .collect();
    let mut roots = Vec::new();
    let mut start = 0;
    while ints[start].is_zero() {
        start += 1;
    }
    if start > 0 {
        roots.push(f.zero());
    }
    let mut rest: UPoly = a[start..].to_vec();
    let a0 = &ints[start];
    let an = ints.last().unwrap();
    if rest.len() > 1 {
        for num in divisors(a0)? {
            for den in divisors(an)? {
                for sign in [1i64, -1] {
                    let cand = BigRational::new(num.clone() * sign, den.clone());
                    let e = Elem::Rat(cand);
                    if f.is_zero(&eval(f, &rest, &e)) && !roots.contains(&e) {
                        roots.push(e);
                    }
                }
            }
        }
    }
    for r in &roots {
        if f.is_zero(r) {
            continue;
        }
        let lin = vec![f.neg(r), f.one()];
        loop {
            let (q, rm) = divrem(f, &rest, &lin)?;
            if !rm.is_empty() {
                break;
            }
            rest = q;
        }
    }
    roots.sort();
    let mut degrees = Vec::new();
    if degree(&rest).unwrap_or(0) > 0 {
        degrees.push(degree(&rest).unwrap());
    }
    Ok((roots, degrees))
}
