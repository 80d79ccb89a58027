//! Exact coefficient fields: the rationals and finite fields `F_q`, `q = p^k`.
//!
//! A [`Field`] is a cheap, clonable handle.  Elements are plain values
//! ([`Elem`]) and all arithmetic goes through the handle, which keeps the hot
//! loops free of per-element bookkeeping.  [`FieldElem`] bundles an element
//! with its field for the checked, user-facing API.
//!
//! Elements of `F_{p^k}` are packed as base-`p` integers whose digits are the
//! coefficients of a polynomial in the generator `a` modulo the defining
//! polynomial.  Multiplication uses discrete log / exp tables, so extension
//! fields are limited to [`MAX_TABLE_ORDER`] elements.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest extension degree `k` accepted by [`make_field`].
pub const MAX_EXTENSION_DEGREE: u32 = 16;
/// Largest number of elements of a proper extension field.
pub const MAX_TABLE_ORDER: u64 = 1 << 20;

/// A field element.  Which variant is valid is decided by the owning field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    /// Packed element of a finite field.
    Fin(u64),
    /// Rational number.
    Rat(BigRational),
}

struct Inner {
    /// Characteristic; `0` for the rationals.
    p: u64,
    k: u32,
    q: u64,
    /// Defining polynomial, low degree first, monic of degree `k`.
    modulus: Vec<u64>,
    /// `exp[i] = g^i` for a primitive element `g` (extensions only).
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// Handle to a coefficient field.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.k == other.0.k
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Build the field with `p^k` elements (`p = 0`: the rationals, `k` must be 1).
pub fn make_field(p: u64, k: u32) -> Result<Field> {
    Field::new(p, k)
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// ---- small dense polynomial helpers over F_p, used only while building tables.

fn fp_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_inv(a: u64, p: u64) -> u64 {
    fp_pow(a, p - 2, p)
}

fn fp_pow(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * a as u128) % p as u128) as u64;
        }
        a = ((a as u128 * a as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

fn fp_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x * y) % p;
        }
    }
    fp_rem(r, m, p)
}

fn fp_rem(mut r: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = fp_inv(m[dm], p);
    while r.len() > dm {
        let top = r.len() - 1;
        let c = (r[top] * lead_inv) % p;
        if c != 0 {
            for (i, mi) in m.iter().enumerate().take(dm + 1) {
                let idx = top - dm + i;
                r[idx] = (r[idx] + p - (c * mi) % p) % p;
            }
        }
        r.pop();
        fp_trim(&mut r);
    }
    r
}

fn fp_gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        let r = fp_rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn fp_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut r = vec![1u64];
    let mut b = fp_rem(base.to_vec(), m, p);
    while e > 0 {
        if e & 1 == 1 {
            r = fp_mulmod(&r, &b, m, p);
        }
        b = fp_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    r
}

/// Rabin's irreducibility test for a monic polynomial over `F_p`.
fn fp_irreducible(m: &[u64], p: u64) -> bool {
    let k = (m.len() - 1) as u32;
    let x = vec![0u64, 1];
    // x^{p^k} == x mod m
    let mut xp = x.clone();
    for _ in 0..k {
        xp = fp_powmod(&xp, p, m, p);
    }
    let mut diff = xp.clone();
    diff.resize(diff.len().max(2), 0);
    diff[1] = (diff[1] + p - 1) % p;
    fp_trim(&mut diff);
    if !diff.is_empty() {
        return false;
    }
    for r in prime_factors(k as u64) {
        let mut xq = x.clone();
        for _ in 0..(k as u64 / r) {
            xq = fp_powmod(&xq, p, m, p);
        }
        xq.resize(xq.len().max(2), 0);
        xq[1] = (xq[1] + p - 1) % p;
        fp_trim(&mut xq);
        let g = fp_gcd(m.to_vec(), xq, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn pack(digits: &[u64], p: u64) -> u64 {
    digits.iter().rev().fold(0u64, |acc, &d| acc * p + d)
}

fn unpack(mut v: u64, p: u64, k: u32) -> Vec<u64> {
    let mut out = Vec::with_capacity(k as usize);
    for _ in 0..k {
        out.push(v % p);
        v /= p;
    }
    out
}

impl Field {
    /// See [`make_field`].
    pub fn new(p: u64, k: u32) -> Result<Field> {
        if p == 0 {
            if k != 1 {
                return Err(Error::ExtensionOfCharZero(k));
            }
            return Ok(Field(Arc::new(Inner { p: 0, k: 1, q: 0, modulus: Vec::new(), exp: Vec::new(), log: Vec::new() })));
        }
        if !is_prime(p) || p > u32::MAX as u64 {
            return Err(Error::NotPrime(p));
        }
        if k == 0 {
            return Err(Error::InvalidInput("extension degree must be at least 1".into()));
        }
        if k > MAX_EXTENSION_DEGREE {
            return Err(Error::FieldExtensionLimit(format!("degree {k} exceeds {MAX_EXTENSION_DEGREE}")));
        }
        if k == 1 {
            return Ok(Field(Arc::new(Inner { p, k, q: p, modulus: vec![0, 1], exp: Vec::new(), log: Vec::new() })));
        }
        let q = p.checked_pow(k).filter(|&q| q <= MAX_TABLE_ORDER).ok_or_else(|| {
            Error::FieldExtensionLimit(format!("F_{{{p}^{k}}} has more than {MAX_TABLE_ORDER} elements"))
        })?;
        // Lexicographically first monic irreducible polynomial of degree k,
        // comparing coefficient vectors from the degree k-1 term downwards.
        let mut modulus = None;
        for n in 0..(q) {
            let mut m = unpack(n, p, k);
            m.push(1);
            if m[0] != 0 && fp_irreducible(&m, p) {
                modulus = Some(m);
                break;
            }
        }
        let modulus = modulus.expect("an irreducible polynomial of every degree exists");
        // primitive element search
        let order = q - 1;
        let factors = prime_factors(order);
        let mut gen = None;
        for cand in 2..q {
            let g = unpack(cand, p, k);
            let ok = factors.iter().all(|&r| {
                let mut pw = fp_powmod(&g, order / r, &modulus, p);
                fp_trim(&mut pw);
                pw != vec![1]
            });
            if ok {
                gen = Some(g);
                break;
            }
        }
        let gen = gen.expect("multiplicative group is cyclic");
        let mut exp = vec![0u32; order as usize];
        let mut log = vec![0u32; q as usize];
        let mut cur = vec![1u64];
        for i in 0..order {
            let mut digits = cur.clone();
            digits.resize(k as usize, 0);
            let v = pack(&digits, p);
            exp[i as usize] = v as u32;
            log[v as usize] = i as u32;
            cur = fp_mulmod(&cur, &gen, &modulus, p);
        }
        Ok(Field(Arc::new(Inner { p, k, q, modulus, exp, log })))
    }

    /// The rational numbers.
    pub fn rationals() -> Field {
        Field::new(0, 1).expect("rationals")
    }

    /// Characteristic (`0` for the rationals).
    pub fn characteristic(&self) -> u64 {
        self.0.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> u32 {
        self.0.k
    }

    /// Number of elements, `None` for the rationals.
    pub fn order(&self) -> Option<u64> {
        if self.0.p == 0 {
            None
        } else {
            Some(self.0.q)
        }
    }

    /// Whether this is a finite field.
    pub fn is_finite(&self) -> bool {
        self.0.p != 0
    }

    /// Defining polynomial of `F_{p^k}` over `F_p`, low degree first.
    pub fn modulus(&self) -> Option<&[u64]> {
        if self.0.p == 0 {
            None
        } else {
            Some(&self.0.modulus)
        }
    }

    /// Short human readable name (`Q`, `F_5`, `F_{2^4}`).
    pub fn name(&self) -> String {
        match (self.0.p, self.0.k) {
            (0, _) => "Q".to_string(),
            (p, 1) => format!("F_{p}"),
            (p, k) => format!("F_{{{p}^{k}}}"),
        }
    }

    pub fn zero(&self) -> Elem {
        if self.0.p == 0 {
            Elem::Rat(BigRational::zero())
        } else {
            Elem::Fin(0)
        }
    }

    pub fn one(&self) -> Elem {
        if self.0.p == 0 {
            Elem::Rat(BigRational::one())
        } else {
            Elem::Fin(1)
        }
    }

    /// Image of an integer.
    pub fn from_i64(&self, n: i64) -> Elem {
        if self.0.p == 0 {
            Elem::Rat(BigRational::from_integer(BigInt::from(n)))
        } else {
            Elem::Fin(n.rem_euclid(self.0.p as i64) as u64)
        }
    }

    /// Image of an arbitrary integer.
    pub fn from_bigint(&self, n: &BigInt) -> Elem {
        if self.0.p == 0 {
            Elem::Rat(BigRational::from_integer(n.clone()))
        } else {
            let r = n.mod_floor(&BigInt::from(self.0.p));
            Elem::Fin(r.to_u64().expect("reduced residue"))
        }
    }

    /// Image of a rational number; fails if the denominator vanishes.
    pub fn from_rational(&self, r: &BigRational) -> Result<Elem> {
        if self.0.p == 0 {
            return Ok(Elem::Rat(r.clone()));
        }
        let n = self.from_bigint(r.numer());
        let d = self.from_bigint(r.denom());
        self.div(&n, &d)
    }

    /// The generator `a` of an extension (a root of [`Field::modulus`]).
    pub fn generator(&self) -> Result<Elem> {
        if self.0.p == 0 || self.0.k == 1 {
            return Err(Error::InvalidInput(format!("{} has no extension generator", self.name())));
        }
        Ok(Elem::Fin(self.0.p))
    }

    /// Builds an element from its coordinates in the power basis of `a`.
    pub fn from_digits(&self, digits: &[i64]) -> Result<Elem> {
        if self.0.p == 0 {
            return Err(Error::InvalidInput("the rationals have no power basis".into()));
        }
        let p = self.0.p;
        let mut acc = self.zero();
        let mut pw = self.one();
        let a = if self.0.k == 1 { None } else { Some(self.generator()?) };
        for (i, &d) in digits.iter().enumerate() {
            if i > 0 {
                match &a {
                    Some(a) => pw = self.mul(&pw, a),
                    None => {
                        if d.rem_euclid(p as i64) != 0 {
                            return Err(Error::InvalidInput("prime field has no generator".into()));
                        }
                        continue;
                    }
                }
            }
            acc = self.add(&acc, &self.mul(&pw, &self.from_i64(d)));
        }
        Ok(acc)
    }

    /// All elements of a finite field in canonical order (`None` for `Q`).
    pub fn elements(&self) -> Option<impl Iterator<Item = Elem>> {
        if self.0.p == 0 {
            None
        } else {
            Some((0..self.0.q).map(Elem::Fin))
        }
    }

    #[inline]
    fn fin(e: &Elem) -> u64 {
        match e {
            Elem::Fin(v) => *v,
            Elem::Rat(_) => panic!("rational element used in a finite field"),
        }
    }

    #[inline]
    fn rat(e: &Elem) -> &BigRational {
        match e {
            Elem::Rat(r) => r,
            Elem::Fin(_) => panic!("finite-field element used in the rationals"),
        }
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        match a {
            Elem::Fin(v) => *v == 0,
            Elem::Rat(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self, a: &Elem) -> bool {
        match a {
            Elem::Fin(v) => *v == 1,
            Elem::Rat(r) => r.is_one(),
        }
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let p = self.0.p;
        if p == 0 {
            return Elem::Rat(Self::rat(a) + Self::rat(b));
        }
        let (x, y) = (Self::fin(a), Self::fin(b));
        if self.0.k == 1 {
            let s = x + y;
            return Elem::Fin(if s >= p { s - p } else { s });
        }
        if p == 2 {
            return Elem::Fin(x ^ y);
        }
        let (mut x, mut y, mut r, mut pw) = (x, y, 0u64, 1u64);
        while x > 0 || y > 0 {
            r += ((x % p + y % p) % p) * pw;
            x /= p;
            y /= p;
            pw *= p;
        }
        Elem::Fin(r)
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        let p = self.0.p;
        if p == 0 {
            return Elem::Rat(-Self::rat(a));
        }
        let x = Self::fin(a);
        if p == 2 {
            return Elem::Fin(x);
        }
        if self.0.k == 1 {
            return Elem::Fin(if x == 0 { 0 } else { p - x });
        }
        let (mut x, mut r, mut pw) = (x, 0u64, 1u64);
        while x > 0 {
            r += ((p - x % p) % p) * pw;
            x /= p;
            pw *= p;
        }
        Elem::Fin(r)
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        if self.0.p == 0 {
            return Elem::Rat(Self::rat(a) - Self::rat(b));
        }
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let p = self.0.p;
        if p == 0 {
            return Elem::Rat(Self::rat(a) * Self::rat(b));
        }
        let (x, y) = (Self::fin(a), Self::fin(b));
        if self.0.k == 1 {
            return Elem::Fin(((x as u128 * y as u128) % p as u128) as u64);
        }
        if x == 0 || y == 0 {
            return Elem::Fin(0);
        }
        let ord = self.0.q - 1;
        let l = (self.0.log[x as usize] as u64 + self.0.log[y as usize] as u64) % ord;
        Elem::Fin(self.0.exp[l as usize] as u64)
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        let p = self.0.p;
        if p == 0 {
            return Ok(Elem::Rat(Self::rat(a).recip()));
        }
        let x = Self::fin(a);
        if self.0.k == 1 {
            return Ok(Elem::Fin(fp_inv(x, p)));
        }
        let ord = self.0.q - 1;
        let l = (ord - self.0.log[x as usize] as u64) % ord;
        Ok(Elem::Fin(self.0.exp[l as usize] as u64))
    }

    pub fn div(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Elem, mut e: u64) -> Elem {
        let mut r = self.one();
        let mut b = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        r
    }

    /// Frobenius `a -> a^p` (identity on the rationals).
    pub fn frobenius(&self, a: &Elem) -> Elem {
        if self.0.p == 0 {
            a.clone()
        } else {
            self.pow(a, self.0.p)
        }
    }

    /// Image of `n` in the prime field, i.e. `n * 1`.
    pub fn from_usize(&self, n: usize) -> Elem {
        self.from_i64(n as i64)
    }

    /// Whether `a` lies in the prime field.
    pub fn in_prime_field(&self, a: &Elem) -> bool {
        match a {
            Elem::Fin(v) => *v < self.0.p,
            Elem::Rat(_) => true,
        }
    }

    /// Human readable rendering: integers in `F_p`, polynomials in `a` in
    /// extensions, `n/d` over `Q`.
    pub fn format(&self, a: &Elem) -> String {
        match a {
            Elem::Rat(r) => {
                if r.is_integer() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Elem::Fin(v) => {
                if self.0.k == 1 {
                    return v.to_string();
                }
                let digits = unpack(*v, self.0.p, self.0.k);
                let mut parts = Vec::new();
                for (i, &d) in digits.iter().enumerate().rev() {
                    if d == 0 {
                        continue;
                    }
                    let term = match (i, d) {
                        (0, d) => d.to_string(),
                        (1, 1) => "a".to_string(),
                        (1, d) => format!("{d}*a"),
                        (i, 1) => format!("a^{i}"),
                        (i, d) => format!("{d}*a^{i}"),
                    };
                    parts.push(term);
                }
                if parts.is_empty() {
                    "0".to_string()
                } else {
                    parts.join("+")
                }
            }
        }
    }

    /// Whether a rendering needs parentheses when used as a coefficient.
    pub fn is_compound(&self, a: &Elem) -> bool {
        let s = self.format(a);
        s.contains('+') || s.contains('/') || s.starts_with('-')
    }

    /// Signed integer value of a rational integer, if it is one.
    pub fn as_integer(&self, a: &Elem) -> Option<BigInt> {
        match a {
            Elem::Rat(r) if r.is_integer() => Some(r.numer().clone()),
            _ => None,
        }
    }

    /// Absolute value ordering helper for rationals (used by root search).
    pub fn is_negative(&self, a: &Elem) -> bool {
        matches!(a, Elem::Rat(r) if r.is_negative())
    }
}

/// An element bundled with its field; operations check that both operands
/// live in the same field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElem {
    pub field: Field,
    pub value: Elem,
}

impl FieldElem {
    pub fn new(field: &Field, value: Elem) -> Self {
        FieldElem { field: field.clone(), value }
    }

    fn check(&self, other: &FieldElem) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.name(), other.field.name()));
        }
        Ok(())
    }

    pub fn add(&self, o: &FieldElem) -> Result<FieldElem> {
        self.check(o)?;
        Ok(FieldElem::new(&self.field, self.field.add(&self.value, &o.value)))
    }

    pub fn sub(&self, o: &FieldElem) -> Result<FieldElem> {
        self.check(o)?;
        Ok(FieldElem::new(&self.field, self.field.sub(&self.value, &o.value)))
    }

    pub fn mul(&self, o: &FieldElem) -> Result<FieldElem> {
        self.check(o)?;
        Ok(FieldElem::new(&self.field, self.field.mul(&self.value, &o.value)))
    }

    pub fn div(&self, o: &FieldElem) -> Result<FieldElem> {
        self.check(o)?;
        Ok(FieldElem::new(&self.field, self.field.div(&self.value, &o.value)?))
    }

    pub fn neg(&self) -> FieldElem {
        FieldElem::new(&self.field, self.field.neg(&self.value))
    }

    pub fn inv(&self) -> Result<FieldElem> {
        Ok(FieldElem::new(&self.field, self.field.inv(&self.value)?))
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.format(&self.value))
    }
}

/// Field embedding `F_{p^k} -> F_{p^K}` for `k | K`, sending the generator to
/// the smallest (in packed order) root of its minimal polynomial.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub source: Field,
    pub target: Field,
    image_of_gen: Option<Elem>,
}

impl Embedding {
    pub fn new(source: &Field, target: &Field) -> Result<Embedding> {
        let bad = || Error::IncompatibleFields(source.name(), target.name());
        if source.characteristic() != target.characteristic() {
            return Err(bad());
        }
        if source.characteristic() == 0 {
            return Ok(Embedding { source: source.clone(), target: target.clone(), image_of_gen: None });
        }
        if !target.degree().is_multiple_of(source.degree()) {
            return Err(bad());
        }
        if source.degree() == 1 {
            return Ok(Embedding { source: source.clone(), target: target.clone(), image_of_gen: None });
        }
        let m: Vec<Elem> = source.modulus().unwrap().iter().map(|&c| target.from_i64(c as i64)).collect();
        let root = target
            .elements()
            .unwrap()
            .find(|r| {
                let mut acc = target.zero();
                for c in m.iter().rev() {
                    acc = target.add(&target.mul(&acc, r), c);
                }
                target.is_zero(&acc)
            })
            .ok_or_else(bad)?;
        Ok(Embedding { source: source.clone(), target: target.clone(), image_of_gen: Some(root) })
    }

    /// Image of an element of the source field.
    pub fn map(&self, e: &Elem) -> Elem {
        match (&self.image_of_gen, e) {
            (_, Elem::Rat(_)) => e.clone(),
            (None, Elem::Fin(v)) => Elem::Fin(*v),
            (Some(g), Elem::Fin(v)) => {
                let t = &self.target;
                let digits = unpack(*v, self.source.characteristic(), self.source.degree());
                let mut acc = t.zero();
                for &d in digits.iter().rev() {
                    acc = t.add(&t.mul(&acc, g), &t.from_i64(d as i64));
                }
                acc
            }
        }
    }
}

/// Checked embedding of a single element.
pub fn embed(e: &FieldElem, target: &Field) -> Result<FieldElem> {
    let emb = Embedding::new(&e.field, target)?;
    Ok(FieldElem::new(target, emb.map(&e.value)))
}
