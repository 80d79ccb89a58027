//! Truncated power series in one and two variables, parametrized branches,
//! substitution, Hensel factorization and implicitization.
//!
//! Precision conventions:
//! * [`UniSeries`] stores coefficients of `t^k` for `k < prec`;
//! * [`BiSeries`] stores coefficients of `x^i y^j` for `i + j < prec`.
//!
//! `prec == EXACT` marks an exact polynomial.  Products are computed to the
//! largest precision the factors justify (`min(N_f + ord g, N_g + ord f)`).

use std::collections::BTreeMap;
use std::fmt;

use crate::coeffield::{Elem, Field};
use crate::error::{Error, Result};
use crate::hensel::{self, LocalRing, TruncSeries};
use crate::upoly::{self, UPoly};

/// Precision marker of exact polynomials.
pub const EXACT: usize = usize::MAX;

/// Initial truncation used by [`precision_driver`].
pub const DEFAULT_PRECISION: usize = 32;
/// Largest truncation [`precision_driver`] will try.
pub const PRECISION_CAP: usize = 512;

fn padd(a: usize, b: usize) -> usize {
    a.saturating_add(b)
}

/// Retry `f` with doubled truncation while it reports a precision failure.
pub fn precision_driver<T>(start: usize, cap: usize, mut f: impl FnMut(usize) -> Result<T>) -> Result<T> {
    let mut n = start.max(1);
    loop {
        match f(n) {
            Err(Error::InsufficientPrecision(m)) | Err(Error::PrecisionUnderflow(m)) => {
                if n >= cap {
                    return Err(Error::PrecisionUnderflow(format!("{m} (cap {cap} reached)")));
                }
                n = (2 * n).min(cap);
            }
            other => return other,
        }
    }
}

// ---------------------------------------------------------------------------
// one variable

/// Power series in `t` known modulo `t^prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniSeries {
    pub field: Field,
    coeffs: Vec<Elem>,
    prec: usize,
}

impl UniSeries {
    pub fn new(field: &Field, mut coeffs: Vec<Elem>, prec: usize) -> Self {
        if prec != EXACT {
            coeffs.truncate(prec);
        }
        while coeffs.last().is_some_and(|c| field.is_zero(c)) {
            coeffs.pop();
        }
        UniSeries { field: field.clone(), coeffs, prec }
    }

    pub fn exact(field: &Field, coeffs: Vec<Elem>) -> Self {
        Self::new(field, coeffs, EXACT)
    }

    /// Exact polynomial from integer coefficients.
    pub fn from_ints(field: &Field, c: &[i64]) -> Self {
        Self::exact(field, c.iter().map(|&x| field.from_i64(x)).collect())
    }

    pub fn zero(field: &Field) -> Self {
        Self::exact(field, Vec::new())
    }

    pub fn one(field: &Field) -> Self {
        Self::exact(field, vec![field.one()])
    }

    /// `c t^k`, exact.
    pub fn monomial(field: &Field, k: usize, c: Elem) -> Self {
        let mut v = vec![field.zero(); k + 1];
        v[k] = c;
        Self::exact(field, v)
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    /// Coefficient of `t^k` (zero past the stored range).
    pub fn coef(&self, k: usize) -> Elem {
        self.coeffs.get(k).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Coefficient of `t^k`, failing when `k` is beyond the precision.
    pub fn coef_checked(&self, k: usize) -> Result<Elem> {
        if k >= self.prec {
            return Err(Error::InsufficientPrecision(format!("coefficient t^{k} requested, precision {}", self.prec)));
        }
        Ok(self.coef(k))
    }

    /// Order of vanishing; `Ok(None)` for the exact zero series.
    pub fn order(&self) -> Result<Option<usize>> {
        match self.coeffs.iter().position(|c| !self.field.is_zero(c)) {
            Some(k) => Ok(Some(k)),
            None if self.is_exact() => Ok(None),
            None => Err(Error::InsufficientPrecision(format!("series vanishes to precision {}", self.prec))),
        }
    }

    /// A lower bound for the order: the true order, or the precision.
    pub fn order_lb(&self) -> usize {
        self.coeffs.iter().position(|c| !self.field.is_zero(c)).unwrap_or(self.prec)
    }

    pub fn truncate(&self, n: usize) -> Self {
        Self::new(&self.field, self.coeffs.clone(), self.prec.min(n))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.field, upoly::add(&self.field, &self.coeffs, &o.coeffs), self.prec.min(o.prec))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.field, upoly::sub(&self.field, &self.coeffs, &o.coeffs), self.prec.min(o.prec))
    }

    pub fn neg(&self) -> Self {
        Self::new(&self.field, self.coeffs.iter().map(|c| self.field.neg(c)).collect(), self.prec)
    }

    pub fn scale(&self, c: &Elem) -> Self {
        Self::new(&self.field, upoly::scale(&self.field, &self.coeffs, c), self.prec)
    }

    /// Product, computed to `min(N_a + ord b, N_b + ord a)`.
    pub fn mul(&self, o: &Self) -> Self {
        let prec = padd(self.prec, o.order_lb()).min(padd(o.prec, self.order_lb()));
        self.mul_to(o, prec)
    }

    /// Product truncated at `prec` (which must not exceed the justified one).
    pub fn mul_to(&self, o: &Self, prec: usize) -> Self {
        let f = &self.field;
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::new(f, Vec::new(), prec);
        }
        let len = (self.coeffs.len() + o.coeffs.len() - 1).min(prec);
        let mut r = vec![f.zero(); len];
        for (i, x) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            if f.is_zero(x) {
                continue;
            }
            for (j, y) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !f.is_zero(y) {
                    r[i + j] = f.add(&r[i + j], &f.mul(x, y));
                }
            }
        }
        Self::new(f, r, prec)
    }

    /// Formal derivative `d/dt`.
    pub fn derivative(&self) -> Self {
        let f = &self.field;
        let c = self.coeffs.iter().enumerate().skip(1).map(|(k, c)| f.mul(c, &f.from_usize(k))).collect();
        let prec = if self.is_exact() { EXACT } else { self.prec.saturating_sub(1) };
        Self::new(f, c, prec)
    }

    /// Inverse of a unit; exact inputs are inverted to precision `n`.
    pub fn invert_unit(&self, n: usize) -> Result<Self> {
        let f = &self.field;
        let c0 = self.coef(0);
        if f.is_zero(&c0) {
            return Err(Error::NotAUnit);
        }
        let prec = self.prec.min(n);
        if prec == EXACT {
            return Err(Error::InvalidInput("inverse needs a finite precision".into()));
        }
        let inv0 = f.inv(&c0)?;
        let mut r = vec![f.zero(); prec];
        if prec > 0 {
            r[0] = inv0.clone();
        }
        for k in 1..prec {
            let mut acc = f.zero();
            for i in 1..=k.min(self.coeffs.len().saturating_sub(1)) {
                acc = f.add(&acc, &f.mul(&self.coeffs[i], &r[k - i]));
            }
            r[k] = f.neg(&f.mul(&acc, &inv0));
        }
        Ok(Self::new(f, r, prec))
    }

    /// Divide by `t^k`; the first `k` coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if self.prec != EXACT && self.prec < k {
            return Err(Error::PrecisionUnderflow(format!("cannot divide by t^{k} at precision {}", self.prec)));
        }
        if self.coeffs.iter().take(k).any(|c| !self.field.is_zero(c)) {
            return Err(Error::InvalidInput(format!("series not divisible by t^{k}")));
        }
        let c = self.coeffs.iter().skip(k).cloned().collect();
        let prec = if self.is_exact() { EXACT } else { self.prec - k };
        Ok(Self::new(&self.field, c, prec))
    }

    /// Multiply by `t^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let f = &self.field;
        let mut c = vec![f.zero(); k];
        c.extend(self.coeffs.iter().cloned());
        Self::new(f, c, padd(self.prec, k))
    }

    /// Quotient `self / o` where `o = t^k u` with `u` a unit and `self`
    /// divisible by `t^k`; exact operands are divided to precision `n`.
    pub fn div(&self, o: &Self, n: usize) -> Result<Self> {
        let k = o.order()?.ok_or(Error::DivisionByZero)?;
        let a = self.shift_down(k)?;
        let b = o.shift_down(k)?;
        let prec = a.prec.min(b.prec).min(n);
        let inv = b.invert_unit(prec)?;
        Ok(a.mul(&inv).truncate(prec))
    }

    /// Same series read in a larger field.
    pub fn map_field(&self, target: &Field, map: impl Fn(&Elem) -> Elem) -> Self {
        Self::new(target, self.coeffs.iter().map(map).collect(), self.prec)
    }

    pub fn format(&self, var: &str) -> String {
        let terms: Vec<(usize, Elem)> =
            self.coeffs.iter().enumerate().filter(|(_, c)| !self.field.is_zero(c)).map(|(k, c)| (k, c.clone())).collect();
        let mut s = format_terms(&self.field, terms.iter().map(|(k, c)| (vec![(var, *k)], c.clone())).collect());
        if !self.is_exact() {
            s.push_str(&format!(" + O({var}^{})", self.prec));
        }
        s
    }
}

// ---------------------------------------------------------------------------
// formatting helpers shared with the polynomial printers

/// Render a coefficient with a separate sign: prime-field elements use the
/// symmetric residue system so that `p - 1` prints as `-1`.
pub fn signed_coefficient(f: &Field, c: &Elem) -> (bool, String) {
    match c {
        Elem::Fin(v) if f.degree() == 1 => {
            let p = f.characteristic();
            if *v > p / 2 && p > 2 {
                (true, (p - v).to_string())
            } else {
                (false, v.to_string())
            }
        }
        Elem::Rat(_) => {
            if f.is_negative(c) {
                (true, f.format(&f.neg(c)))
            } else {
                (false, f.format(c))
            }
        }
        _ => (false, f.format(c)),
    }
}

/// Render a sum of `coefficient * monomial` terms in the given order.
pub fn format_terms(f: &Field, terms: Vec<(Vec<(&str, usize)>, Elem)>) -> String {
    let mut out = String::new();
    for (mono, c) in terms {
        let (neg, mag) = signed_coefficient(f, &c);
        let mono_s: Vec<String> = mono
            .iter()
            .filter(|(_, e)| *e > 0)
            .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
            .collect();
        let mono_s = mono_s.join("*");
        let compound = mag.contains('+') || mag.contains('/');
        let body = if mono_s.is_empty() {
            if compound && !out.is_empty() {
                format!("({mag})")
            } else {
                mag
            }
        } else if mag == "1" {
            mono_s
        } else if compound {
            format!("({mag})*{mono_s}")
        } else {
            format!("{mag}*{mono_s}")
        };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
            out.push_str(&body);
        } else {
            out.push_str(if neg { " - " } else { " + " });
            out.push_str(&body);
        }
    }
    if out.is_empty() {
        "0".to_string()
    } else {
        out
    }
}

// ---------------------------------------------------------------------------
// two variables

/// Power series in `x, y` known modulo terms of total degree `>= prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiSeries {
    pub field: Field,
    terms: BTreeMap<(usize, usize), Elem>,
    prec: usize,
}

impl BiSeries {
    pub fn new(field: &Field, terms: impl IntoIterator<Item = ((usize, usize), Elem)>, prec: usize) -> Self {
        let mut map = BTreeMap::new();
        for ((i, j), c) in terms {
            if i + j >= prec || field.is_zero(&c) {
                continue;
            }
            let e = map.entry((i, j)).or_insert_with(|| field.zero());
            *e = field.add(e, &c);
        }
        map.retain(|_, c| !field.is_zero(c));
        BiSeries { field: field.clone(), terms: map, prec }
    }

    /// Exact polynomial from `(i, j, coefficient)` triples with integer coefficients.
    pub fn from_ints(field: &Field, terms: &[(usize, usize, i64)]) -> Self {
        Self::new(field, terms.iter().map(|&(i, j, c)| ((i, j), field.from_i64(c))), EXACT)
    }

    pub fn zero(field: &Field) -> Self {
        Self::new(field, [], EXACT)
    }

    pub fn one(field: &Field) -> Self {
        Self::monomial(field, 0, 0, field.one())
    }

    pub fn monomial(field: &Field, i: usize, j: usize, c: Elem) -> Self {
        Self::new(field, [((i, j), c)], EXACT)
    }

    pub fn x(field: &Field) -> Self {
        Self::monomial(field, 1, 0, field.one())
    }

    pub fn y(field: &Field) -> Self {
        Self::monomial(field, 0, 1, field.one())
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &Elem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coef(&self, i: usize, j: usize) -> Elem {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn truncate(&self, n: usize) -> Self {
        Self::new(&self.field, self.terms.iter().map(|(k, c)| (*k, c.clone())), self.prec.min(n))
    }

    /// Largest total degree of a stored term.
    pub fn total_degree(&self) -> Option<usize> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn y_degree(&self) -> Option<usize> {
        self.terms.keys().map(|(_, j)| *j).max()
    }

    pub fn x_degree(&self) -> Option<usize> {
        self.terms.keys().map(|(i, _)| *i).max()
    }

    /// Order (lowest total degree); `Ok(None)` for exact zero.
    pub fn order(&self) -> Result<Option<usize>> {
        match self.terms.keys().map(|(i, j)| i + j).min() {
            Some(d) => Ok(Some(d)),
            None if self.is_exact() => Ok(None),
            None => Err(Error::InsufficientPrecision(format!("series vanishes to total degree {}", self.prec))),
        }
    }

    pub fn order_lb(&self) -> usize {
        self.terms.keys().map(|(i, j)| i + j).min().unwrap_or(self.prec)
    }

    /// Homogeneous part of degree `d` as coefficients `c_i` of `x^i y^{d-i}`.
    pub fn homogeneous_part(&self, d: usize) -> Vec<Elem> {
        (0..=d).map(|i| self.coef(i, d - i)).collect()
    }

    /// Tangent cone: `(m, c_0..c_m)` with `c_i` the coefficient of `x^i y^{m-i}`.
    pub fn leading_form(&self) -> Result<(usize, Vec<Elem>)> {
        let m = self.order()?.ok_or_else(|| Error::InvalidInput("zero series has no tangent cone".into()))?;
        Ok((m, self.homogeneous_part(m)))
    }

    pub fn add(&self, o: &Self) -> Self {
        let f = &self.field;
        let mut terms = self.terms.clone();
        for (k, c) in &o.terms {
            let e = terms.entry(*k).or_insert_with(|| f.zero());
            *e = f.add(e, c);
        }
        Self::new(f, terms, self.prec.min(o.prec))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self::new(&self.field, self.terms.iter().map(|(k, c)| (*k, self.field.neg(c))), self.prec)
    }

    pub fn scale(&self, c: &Elem) -> Self {
        Self::new(&self.field, self.terms.iter().map(|(k, v)| (*k, self.field.mul(v, c))), self.prec)
    }

    /// Product with precision `min(N_f + ord g, N_g + ord f)`.
    pub fn mul(&self, o: &Self) -> Self {
        let prec = padd(self.prec, o.order_lb()).min(padd(o.prec, self.order_lb()));
        self.mul_to(o, prec)
    }

    /// Product truncated at total degree `prec`.
    pub fn mul_to(&self, o: &Self, prec: usize) -> Self {
        let f = &self.field;
        let mut terms: BTreeMap<(usize, usize), Elem> = BTreeMap::new();
        for ((i, j), a) in &self.terms {
            for ((k, l), b) in &o.terms {
                if i + j + k + l >= prec {
                    continue;
                }
                let e = terms.entry((i + k, j + l)).or_insert_with(|| f.zero());
                *e = f.add(e, &f.mul(a, b));
            }
        }
        Self::new(f, terms, prec)
    }

    pub fn pow(&self, e: usize, prec: usize) -> Self {
        let mut r = Self::one(&self.field).truncate(prec);
        for _ in 0..e {
            r = r.mul(self).truncate(prec);
        }
        r
    }

    pub fn derivative_x(&self) -> Self {
        let f = &self.field;
        let t = self.terms.iter().filter(|((i, _), _)| *i > 0).map(|((i, j), c)| ((i - 1, *j), f.mul(c, &f.from_usize(*i))));
        Self::new(f, t, if self.is_exact() { EXACT } else { self.prec.saturating_sub(1) })
    }

    pub fn derivative_y(&self) -> Self {
        let f = &self.field;
        let t = self.terms.iter().filter(|((_, j), _)| *j > 0).map(|((i, j), c)| ((*i, j - 1), f.mul(c, &f.from_usize(*j))));
        Self::new(f, t, if self.is_exact() { EXACT } else { self.prec.saturating_sub(1) })
    }

    /// Inverse of a unit to total-degree precision `min(prec, n)`.
    pub fn invert_unit(&self, n: usize) -> Result<Self> {
        let f = &self.field;
        let c0 = self.coef(0, 0);
        if f.is_zero(&c0) {
            return Err(Error::NotAUnit);
        }
        let prec = self.prec.min(n);
        if prec == EXACT {
            return Err(Error::InvalidInput("inverse needs a finite precision".into()));
        }
        let inv0 = f.inv(&c0)?;
        // u = c0 (1 - h), 1/u = c0^{-1} sum h^k
        let h = self.scale(&f.neg(&inv0)).add(&Self::one(f)).truncate(prec);
        let mut acc = Self::one(f).truncate(prec);
        let mut pw = Self::one(f).truncate(prec);
        for _ in 1..prec {
            pw = pw.mul_to(&h, prec);
            if pw.is_zero() {
                break;
            }
            acc = acc.add(&pw);
        }
        Ok(acc.scale(&inv0).truncate(prec))
    }

    /// The shear `y -> y + c x`.
    pub fn shear(&self, c: &Elem) -> Self {
        let ynew = Self::y(&self.field).add(&Self::x(&self.field).scale(c));
        self.compose(&Self::x(&self.field), &ynew, self.prec)
    }

    /// `f(A(x,y), B(x,y))` truncated at `prec`; `A, B` must have positive
    /// order (or be exact polynomials, then `prec` may be `EXACT`).
    pub fn compose(&self, a: &Self, b: &Self, prec: usize) -> Self {
        let f = &self.field;
        let max_i = self.x_degree().unwrap_or(0);
        let max_j = self.y_degree().unwrap_or(0);
        let mut apow = vec![Self::one(f)];
        for _ in 0..max_i {
            let next = apow.last().unwrap().mul(a).truncate(prec);
            apow.push(next);
        }
        let mut bpow = vec![Self::one(f)];
        for _ in 0..max_j {
            let next = bpow.last().unwrap().mul(b).truncate(prec);
            bpow.push(next);
        }
        let mut terms: BTreeMap<(usize, usize), Elem> = BTreeMap::new();
        let mut out_prec = prec;
        let ord_a = a.order_lb().max(1);
        let ord_b = b.order_lb().max(1);
        if !self.is_exact() {
            out_prec = out_prec.min(self.prec.saturating_mul(ord_a.min(ord_b)));
        }
        for ((i, j), c) in &self.terms {
            let prod = apow[*i].mul(&bpow[*j]).truncate(out_prec);
            out_prec = out_prec.min(prod.prec);
            for (k, v) in prod.terms {
                let e = terms.entry(k).or_insert_with(|| f.zero());
                *e = f.add(e, &f.mul(&v, c));
            }
        }
        Self::new(f, terms, out_prec)
    }

    /// Value along a parametrized branch.
    pub fn substitute(&self, br: &Branch) -> Result<UniSeries> {
        substitute(self, br)
    }

    /// Read `self` in a larger field.
    pub fn map_field(&self, target: &Field, map: impl Fn(&Elem) -> Elem) -> Self {
        Self::new(target, self.terms.iter().map(|(k, c)| (*k, map(c))), self.prec)
    }

    /// Exact division by an exact polynomial (failing if not divisible).
    pub fn div_exact(&self, d: &Self) -> Result<Self> {
        let f = &self.field;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // lex order on (j, i): leading term has the largest y-degree, then x-degree
        let lead = |p: &Self| p.terms.keys().max_by_key(|(i, j)| (*j, *i)).cloned();
        let (di, dj) = lead(d).unwrap();
        let dinv = f.inv(&d.coef(di, dj))?;
        let mut r = self.clone();
        let mut q: BTreeMap<(usize, usize), Elem> = BTreeMap::new();
        while let Some((ri, rj)) = lead(&r) {
            if ri < di || rj < dj {
                return Err(Error::InvalidInput("polynomial division is not exact".into()));
            }
            let c = f.mul(&r.coef(ri, rj), &dinv);
            let m = Self::monomial(f, ri - di, rj - dj, c.clone());
            r = r.sub(&m.mul(d));
            q.insert((ri - di, rj - dj), c);
        }
        Ok(Self::new(f, q, EXACT))
    }

    /// Human readable rendering, terms by decreasing `y`-degree then `x`-degree.
    pub fn format_vars(&self, xv: &str, yv: &str) -> String {
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by_key(|((i, j), _)| std::cmp::Reverse((*j, *i)));
        let terms = keys.into_iter().map(|((i, j), c)| (vec![(xv, *i), (yv, *j)], c.clone())).collect();
        let mut s = format_terms(&self.field, terms);
        if !self.is_exact() {
            s.push_str(&format!(" + O({})", self.prec));
        }
        s
    }
}

impl fmt::Display for BiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_vars("x", "y"))
    }
}

/// Total-degree order of a bivariate series (`None` for exact zero).
pub fn order_bi(f: &BiSeries) -> Result<Option<usize>> {
    f.order()
}

// ---------------------------------------------------------------------------
// branches

/// A parametrized branch `t -> (X(t), Y(t))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub x: UniSeries,
    pub y: UniSeries,
}

/// Orders attached to a branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchOrders {
    /// `min(ord X, ord Y)`, the multiplicity of the branch.
    pub ord_phi: usize,
    pub ord_x: Option<usize>,
    pub ord_y: Option<usize>,
    /// `min(ord X', ord Y')` of the derivatives.
    pub d: usize,
}

impl Branch {
    pub fn new(x: UniSeries, y: UniSeries) -> Self {
        Branch { x, y }
    }

    pub fn field(&self) -> &Field {
        &self.x.field
    }

    pub fn precision(&self) -> usize {
        self.x.prec().min(self.y.prec())
    }

    pub fn truncate(&self, n: usize) -> Self {
        Branch { x: self.x.truncate(n), y: self.y.truncate(n) }
    }

    pub fn orders(&self) -> Result<BranchOrders> {
        order_branch(self)
    }

    pub fn format(&self) -> String {
        format!("({}, {})", self.x.format("t"), self.y.format("t"))
    }
}

fn min_opt(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Orders of a branch and of its derivative.
pub fn order_branch(br: &Branch) -> Result<BranchOrders> {
    let ord_x = br.x.order().unwrap_or_default();
    let ord_y = br.y.order().unwrap_or_default();
    let ord_phi = min_opt(ord_x, ord_y)
        .ok_or_else(|| Error::InsufficientPrecision("branch vanishes to the stored precision".into()))?;
    if ord_phi == 0 {
        return Err(Error::InvalidInput("branch does not pass through the origin".into()));
    }
    let dx = br.x.derivative();
    let dy = br.y.derivative();
    let odx = dx.order().ok().flatten();
    let ody = dy.order().ok().flatten();
    let d = min_opt(odx, ody).ok_or_else(|| Error::InsufficientPrecision("derivative vanishes to the stored precision".into()))?;
    Ok(BranchOrders { ord_phi, ord_x, ord_y, d })
}

/// `f(X(t), Y(t))`.
pub fn substitute(f: &BiSeries, br: &Branch) -> Result<UniSeries> {
    let k = f.field.clone();
    let ords = order_branch(br)?;
    let mut prec = br.precision();
    if !f.is_exact() {
        prec = prec.min(f.prec().saturating_mul(ords.ord_phi));
    }
    let max_i = f.x_degree().unwrap_or(0);
    let max_j = f.y_degree().unwrap_or(0);
    let cap = if prec == EXACT { usize::MAX } else { prec };
    let mut xp = vec![UniSeries::one(&k)];
    for _ in 0..max_i {
        let n = xp.last().unwrap().mul(&br.x).truncate(cap);
        xp.push(n);
    }
    let mut yp = vec![UniSeries::one(&k)];
    for _ in 0..max_j {
        let n = yp.last().unwrap().mul(&br.y).truncate(cap);
        yp.push(n);
    }
    let mut acc = UniSeries::new(&k, Vec::new(), prec);
    for ((i, j), c) in f.terms() {
        let term = xp[*i].mul(&yp[*j]).scale(c).truncate(cap);
        acc = acc.add(&term);
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Hensel factorization

fn as_truncated_poly_in_y(f: &BiSeries, n: usize) -> Vec<TruncSeries> {
    let k = &f.field;
    let maxj = f.y_degree().unwrap_or(0);
    let mut cols: Vec<Vec<Elem>> = vec![Vec::new(); maxj + 1];
    for ((i, j), c) in f.terms() {
        if *i >= n {
            continue;
        }
        let col = &mut cols[*j];
        if col.len() <= *i {
            col.resize(*i + 1, k.zero());
        }
        col[*i] = c.clone();
    }
    let mut out: Vec<TruncSeries> = cols.into_iter().map(|c| TruncSeries::new(k, c, n)).collect();
    while out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

fn is_univariate_in_y(p: &BiSeries) -> bool {
    p.terms().all(|((i, _), _)| *i == 0)
}

fn is_form(p: &BiSeries) -> Option<usize> {
    let mut d = None;
    for ((i, j), _) in p.terms() {
        match d {
            None => d = Some(i + j),
            Some(e) if e != i + j => return None,
            _ => {}
        }
    }
    d
}

/// Hensel factorization of `f`.
///
/// * If every initial factor is a polynomial in `y` alone, the factors must
///   multiply to `f mod x` and be pairwise coprime; they are lifted
///   `x`-adically to precision `n` (factors agree with `f` modulo `x^n`).
/// * Otherwise the initial factors must be pairwise coprime binary forms
///   whose product is the tangent cone of `f`; the factorization is lifted
///   through the chart `y = x t` (tangential splitting), and the factors
///   multiply to `f` up to total degree `n`.
pub fn hensel_factor(f: &BiSeries, init: &[BiSeries], n: usize) -> Result<Vec<BiSeries>> {
    let k = f.field.clone();
    if init.is_empty() {
        return Err(Error::InvalidInput("no initial factors".into()));
    }
    if init.iter().all(is_univariate_in_y) {
        let polys: Vec<UPoly> = init.iter().map(|p| (0..=p.y_degree().unwrap_or(0)).map(|j| p.coef(0, j)).collect()).collect();
        let mut f0: UPoly = (0..=f.y_degree().unwrap_or(0)).map(|j| f.coef(0, j)).collect();
        upoly::trim(&k, &mut f0);
        let mut prod = vec![k.one()];
        for p in &polys {
            prod = upoly::mul(&k, &prod, p);
        }
        let coprime = (0..polys.len()).all(|a| (a + 1..polys.len()).all(|b| upoly::gcd(&k, &polys[a], &polys[b]).len() == 1));
        if prod == f0 && coprime {
            let n = n.min(f.prec());
            let proto = TruncSeries::new(&k, Vec::new(), n);
            let fp = as_truncated_poly_in_y(f, n);
            let lifted = hensel::lift_factors(&proto, &fp, &polys, 4 * n + 16)?;
            return Ok(lifted
                .into_iter()
                .map(|g| {
                    let terms = g.iter().enumerate().flat_map(|(j, c)| c.c.iter().enumerate().map(move |(i, v)| ((i, j), v.clone())));
                    // exact in y, x-adic precision n: valid for total degree < n
                    BiSeries::new(&k, terms.collect::<Vec<_>>(), n)
                })
                .collect());
        }
        if init.iter().any(|p| is_form(p).is_none()) || prod == f0 {
            return Err(Error::NotCoprime);
        }
    }
    tangential_hensel(f, init, n)
}

fn tangential_hensel(f: &BiSeries, init: &[BiSeries], n: usize) -> Result<Vec<BiSeries>> {
    let k = f.field.clone();
    let (m, lf) = f.leading_form()?;
    let mut degs = Vec::new();
    let mut prod = BiSeries::one(&k);
    for p in init {
        let d = is_form(p).ok_or_else(|| Error::InvalidInput("initial factor is not a binary form".into()))?;
        degs.push(d);
        prod = prod.mul(p);
    }
    if prod.homogeneous_part(m) != lf || degs.iter().sum::<usize>() != m {
        return Err(Error::InvalidInput("initial factors do not multiply to the tangent cone".into()));
    }
    // dehomogenize at x = 1: form sum c_i x^i y^{d-i} -> sum c_i t^{d-i}
    let dehom = |p: &BiSeries, d: usize| -> UPoly {
        let mut u: UPoly = (0..=d).map(|j| p.coef(d - j, j)).collect();
        upoly::trim(&k, &mut u);
        u
    };
    let dh: Vec<UPoly> = init.iter().zip(&degs).map(|(p, &d)| dehom(p, d)).collect();
    for a in 0..dh.len() {
        for b in a + 1..dh.len() {
            // binary forms are coprime iff dehomogenizations are coprime and
            // not both divisible by x
            let both_inf = dh[a].len() - 1 < degs[a] && dh[b].len() - 1 < degs[b];
            if both_inf || upoly::gcd(&k, &dh[a], &dh[b]).len() != 1 {
                return Err(Error::NotCoprime);
            }
        }
    }
    // factor through the ∞ direction (if any) goes last: it absorbs the rest
    let mut order: Vec<usize> = (0..init.len()).collect();
    if let Some(pos) = (0..init.len()).find(|&a| dh[a].len() - 1 < degs[a]) {
        order.retain(|&a| a != pos);
        order.push(pos);
    }
    let nx = n.min(f.prec()).saturating_sub(m);
    if nx == 0 {
        return Err(Error::PrecisionUnderflow("precision below the multiplicity".into()));
    }
    // f'(x, t) = x^{-m} f(x, x t): term x^i y^j -> x^{i+j-m} t^j
    let shifted = BiSeries::new(
        &k,
        f.terms().filter(|((i, j), _)| i + j < m + nx).map(|((i, j), c)| ((i + j - m, *j), c.clone())).collect::<Vec<_>>(),
        EXACT,
    );
    let proto = TruncSeries::new(&k, Vec::new(), nx);
    let fp = as_truncated_poly_in_y(&shifted, nx);
    let ordered_init: Vec<UPoly> = order.iter().map(|&a| dh[a].clone()).collect();
    let lifted = hensel::lift_factors(&proto, &fp, &ordered_init, 4 * nx + 16)?;
    let mut out = vec![BiSeries::zero(&k); init.len()];
    for (slot, g) in order.iter().zip(lifted) {
        let d = degs[*slot];
        let mut terms = Vec::new();
        for (l, c) in g.iter().enumerate() {
            for (kx, v) in c.c.iter().enumerate() {
                if k.is_zero(v) {
                    continue;
                }
                if kx + d < l {
                    return Err(Error::PrecisionUnderflow("tangential factor is not a power series at this precision".into()));
                }
                terms.push(((kx + d - l, l), v.clone()));
            }
        }
        out[*slot] = BiSeries::new(&k, terms, nx + d);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// implicitization

/// Implicit equation of a polynomial parametrization `t -> (X(t), Y(t))`,
/// computed as `Res_t(X(t) - x, Y(t) - y)` by fraction-free elimination
/// and normalized to have its highest pure power of `y` monic.
pub fn implicitize(br: &Branch) -> Result<BiSeries> {
    let k = br.field().clone();
    if !br.x.is_exact() || !br.y.is_exact() {
        return Err(Error::NonPolynomialInput("both coordinates must be exact polynomials".into()));
    }
    let xc = br.x.coeffs().to_vec();
    let yc = br.y.coeffs().to_vec();
    let (a, b) = match (upoly::degree(&xc), upoly::degree(&yc)) {
        (Some(a), Some(b)) if a > 0 && b > 0 => (a, b),
        _ => return Err(Error::DegenerateParametrization("a coordinate is constant".into())),
    };
    // primitivity: exponents of the non-constant terms must have gcd 1
    let mut gg = 0usize;
    for (e, c) in xc.iter().enumerate().skip(1).chain(yc.iter().enumerate().skip(1)) {
        if !k.is_zero(c) {
            gg = num_integer::gcd(gg, e);
        }
    }
    if gg > 1 {
        return Err(Error::DegenerateParametrization(format!("parametrization factors through t^{gg}")));
    }
    // Sylvester matrix of P = X(t) - x (deg a) and Q = Y(t) - y (deg b)
    let coef_p = |i: usize| -> BiSeries {
        let mut c = BiSeries::new(&k, [((0, 0), xc.get(i).cloned().unwrap_or_else(|| k.zero()))], EXACT);
        if i == 0 {
            c = c.sub(&BiSeries::x(&k));
        }
        c
    };
    let coef_q = |i: usize| -> BiSeries {
        let mut c = BiSeries::new(&k, [((0, 0), yc.get(i).cloned().unwrap_or_else(|| k.zero()))], EXACT);
        if i == 0 {
            c = c.sub(&BiSeries::y(&k));
        }
        c
    };
    let n = a + b;
    let mut m: Vec<Vec<BiSeries>> = vec![vec![BiSeries::zero(&k); n]; n];
    for r in 0..b {
        for i in 0..=a {
            m[r][r + (a - i)] = coef_p(i);
        }
    }
    for r in 0..a {
        for i in 0..=b {
            m[b + r][r + (b - i)] = coef_q(i);
        }
    }
    let det = bareiss_det(&k, m)?;
    if det.is_zero() {
        return Err(Error::DegenerateParametrization("resultant vanishes".into()));
    }
    Ok(normalize_implicit(&det))
}

/// Scale an implicit equation so that its highest pure `y`-power (or, if
/// there is none, its highest pure `x`-power) has coefficient one.
pub fn normalize_implicit(f: &BiSeries) -> BiSeries {
    let k = &f.field;
    let pure_y = f.terms().filter(|((i, _), _)| *i == 0).max_by_key(|((_, j), _)| *j).map(|(_, c)| c.clone());
    let pure_x = f.terms().filter(|((_, j), _)| *j == 0).max_by_key(|((i, _), _)| *i).map(|(_, c)| c.clone());
    let lead = pure_y.or(pure_x).or_else(|| f.terms().next().map(|(_, c)| c.clone()));
    match lead {
        Some(c) => f.scale(&k.inv(&c).expect("nonzero")),
        None => f.clone(),
    }
}

fn bareiss_det(k: &Field, mut m: Vec<Vec<BiSeries>>) -> Result<BiSeries> {
    let n = m.len();
    let mut sign = false;
    let mut prev = BiSeries::one(k);
    for c in 0..n {
        if m[c][c].is_zero() {
            match (c + 1..n).find(|&r| !m[r][c].is_zero()) {
                Some(r) => {
                    m.swap(c, r);
                    sign = !sign;
                }
                None => return Ok(BiSeries::zero(k)),
            }
        }
        for i in c + 1..n {
            for j in c + 1..n {
                let num = m[c][c].mul(&m[i][j]).sub(&m[i][c].mul(&m[c][j]));
                m[i][j] = num.div_exact(&prev)?;
            }
            m[i][c] = BiSeries::zero(k);
        }
        prev = m[c][c].clone();
    }
    let d = m[n - 1][n - 1].clone();
    Ok(if sign { d.neg() } else { d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffield::make_field;

    fn branch(k: &Field, x: &[i64], y: &[i64]) -> Branch {
        Branch::new(UniSeries::from_ints(k, x), UniSeries::from_ints(k, y))
    }

    #[test]
    fn cusp_substitution() {
        let q = Field::rationals();
        let f = BiSeries::from_ints(&q, &[(0, 2, 1), (3, 0, 1)]);
        let br = branch(&q, &[0, 0, 1], &[0, 0, 0, 1]);
        let v = substitute(&f, &br).unwrap();
        assert_eq!(v, UniSeries::monomial(&q, 6, q.from_i64(2)));
    }

    #[test]
    fn derivative_orders_in_positive_characteristic() {
        let f2 = make_field(2, 1).unwrap();
        let o = order_branch(&branch(&f2, &[0, 0, 1], &[0, 0, 0, 1])).unwrap();
        assert_eq!((o.ord_phi, o.d), (2, 2));
        let f5 = make_field(5, 1).unwrap();
        let o = order_branch(&branch(&f5, &[0, 0, 0, 1], &[0, 0, 0, 0, 0, 0, 0, 1])).unwrap();
        assert_eq!((o.ord_phi, o.d), (3, 2));
    }

    #[test]
    fn implicit_equations_of_monomial_curves() {
        let q = Field::rationals();
        let cases: [(&[i64], &[i64], &[(usize, usize, i64)]); 3] = [
            (&[0, 1], &[0, 0, 1], &[(0, 1, 1), (2, 0, -1)]),
            (&[0, 0, 1], &[0, 0, 0, 1], &[(0, 2, 1), (3, 0, -1)]),
            (&[0, 0, 0, 1], &[0, 0, 0, 0, 0, 1], &[(0, 3, 1), (5, 0, -1)]),
        ];
        for (x, y, expect) in cases {
            let f = implicitize(&branch(&q, x, y)).unwrap();
            assert_eq!(f, BiSeries::from_ints(&q, expect));
        }
        assert!(matches!(implicitize(&branch(&q, &[0, 0, 1], &[0, 0, 0, 0, 1])), Err(Error::DegenerateParametrization(_))));
    }

    #[test]
    fn product_precision_rule() {
        let q = Field::rationals();
        let a = UniSeries::new(&q, vec![q.zero(), q.one()], 5);
        let b = UniSeries::new(&q, vec![q.zero(), q.zero(), q.one()], 3);
        // min(5 + 2, 3 + 1) = 4
        assert_eq!(a.mul(&b).prec(), 4);
    }

    #[test]
    fn tangential_hensel_splits_nodes() {
        let f5 = make_field(5, 1).unwrap();
        // y^2 - x^2 + x^3 with tangents y = x and y = -x
        let f = BiSeries::from_ints(&f5, &[(0, 2, 1), (2, 0, -1), (3, 0, 1)]);
        let l1 = BiSeries::from_ints(&f5, &[(0, 1, 1), (1, 0, -1)]);
        let l2 = BiSeries::from_ints(&f5, &[(0, 1, 1), (1, 0, 1)]);
        let fac = hensel_factor(&f, &[l1, l2], 12).unwrap();
        let prod = fac[0].mul(&fac[1]);
        let n = prod.prec().min(12);
        assert_eq!(prod.truncate(n), f.truncate(n));
        // y(y + x) is already split
        let g = BiSeries::from_ints(&f5, &[(0, 2, 1), (1, 1, 1)]);
        let a = BiSeries::from_ints(&f5, &[(0, 1, 1)]);
        let b = BiSeries::from_ints(&f5, &[(0, 1, 1), (1, 0, 1)]);
        let fac = hensel_factor(&g, &[a.clone(), b.clone()], 10).unwrap();
        assert_eq!(fac[0].truncate(6), a.truncate(6));
        assert_eq!(fac[1].truncate(6), b.truncate(6));
    }

    #[test]
    fn formatting_uses_signed_residues() {
        let f5 = make_field(5, 1).unwrap();
        let f = BiSeries::from_ints(&f5, &[(0, 2, 1), (3, 0, -1)]);
        assert_eq!(f.to_string(), "y^2 - x^3");
    }
}
