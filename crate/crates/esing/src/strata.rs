//! Equisingularity strata in the base of the semiuniversal deformation with
//! section.
//!
//! The semiuniversal deformation of `f` with trivial section is
//! `F = f + Σ_{(i,j) ∈ D} u_ij x^i y^j`, where the monomials of `D` form a
//! basis of `m/mJ`, `J = <f, ∂f/∂x, ∂f/∂y>`.  The weakly equisingular stratum
//! is cut out by following `F` through the resolution tree of `f`:
//!
//! * at every essential point the coefficients of the transformed family
//!   outside the Newton region of the special fibre must vanish;
//! * every tangential component of multiplicity `m_j = q_j m'_j` (`q_j` the
//!   largest power of the characteristic dividing `m_j`) that is not tangent
//!   to an exceptional curve must have a pure `m_j`-th power as tangent cone;
//!   the moving tangent `Y = (β + w) X` introduces an auxiliary parameter `w`
//!   satisfying `w^{q_j} + β^{q_j} + c_{q_j}/m'_j = 0`;
//! * the family is then blown up along the moving section.
//!
//! Conditions are solved as they appear: a condition with a nonzero linear
//! part is solved for one of its variables and substituted everywhere.  The
//! stratum is the image of the resulting parametrization; its ideal in the
//! parameters `u_ij` is recovered (modulo parameter degree `D_max`) by linear
//! algebra, which eliminates the auxiliary parameters.
//!
//! Parameters carry weights so that the truncation is compatible with the
//! auxiliary relations: `u_ij` has weight `Q` (the largest `q_j` met) and an
//! auxiliary parameter attached to a component with `q_j` has weight `Q/q_j`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::coeffield::{Elem, Field};
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon};
use crate::localalg;
use crate::resolution::{self, Chart, PointKind, ResolutionTree};
use crate::series::{self, BiSeries};
use crate::tangent;

/// `(con_es, con_wes)`: `Σ_{Ess} m_Q − ef − (r − 1)` and
/// `Σ_{Ess} m_Q(m_Q + 1)/2 − ef`.
pub fn condition_counts(tree: &ResolutionTree) -> (usize, usize) {
    let inv = tree.numeric_invariants();
    let con_es = (inv.sum_m + 1).saturating_sub(inv.ef + inv.r);
    let con_wes = inv.sum_m_m_plus_1_half.saturating_sub(inv.ef);
    (con_es, con_wes)
}

// ---------------------------------------------------------------------------
// truncated parameter rings

/// Dense exponent vector.
pub type Mono = Vec<u16>;

/// Polynomial in the parameters of a [`ParamRing`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParamPoly {
    terms: BTreeMap<Mono, Elem>,
}

impl ParamPoly {
    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Elem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether some term has a positive exponent in variable `v`.
    pub fn involves(&self, v: usize) -> bool {
        self.terms.keys().any(|m| m[v] > 0)
    }
}

/// `K[v_1, ..., v_n]` modulo monomials of weight above a bound.
#[derive(Clone, Debug)]
pub struct ParamRing {
    field: Field,
    names: Vec<String>,
    weights: Vec<u32>,
    max_weight: u32,
}

impl ParamRing {
    pub fn new(field: &Field, names: Vec<String>, weights: Vec<u32>, max_weight: u32) -> ParamRing {
        assert_eq!(names.len(), weights.len());
        assert!(weights.iter().all(|&w| w > 0), "parameters must have positive weight");
        ParamRing { field: field.clone(), names, weights, max_weight }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn weight(&self, v: usize) -> u32 {
        self.weights[v]
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn mono_weight(&self, m: &[u16]) -> u32 {
        m.iter().zip(&self.weights).map(|(e, w)| *e as u32 * w).sum()
    }

    fn unit_mono(&self) -> Mono {
        vec![0; self.nvars()]
    }

    pub fn zero(&self) -> ParamPoly {
        ParamPoly::default()
    }

    pub fn constant(&self, c: Elem) -> ParamPoly {
        let mut p = ParamPoly::default();
        if !self.field.is_zero(&c) {
            p.terms.insert(self.unit_mono(), c);
        }
        p
    }

    pub fn one(&self) -> ParamPoly {
        self.constant(self.field.one())
    }

    pub fn var(&self, v: usize) -> ParamPoly {
        self.monomial(self.unit_mono_with(v, 1), self.field.one())
    }

    fn unit_mono_with(&self, v: usize, e: u16) -> Mono {
        let mut m = self.unit_mono();
        m[v] = e;
        m
    }

    /// `c * x^m`, or zero when the weight exceeds the bound.
    pub fn monomial(&self, m: Mono, c: Elem) -> ParamPoly {
        let mut p = ParamPoly::default();
        if !self.field.is_zero(&c) && self.mono_weight(&m) <= self.max_weight {
            p.terms.insert(m, c);
        }
        p
    }

    fn accumulate(&self, terms: &mut BTreeMap<Mono, Elem>, m: Mono, c: Elem) {
        let k = &self.field;
        match terms.get_mut(&m) {
            Some(old) => {
                let s = k.add(old, &c);
                if k.is_zero(&s) {
                    terms.remove(&m);
                } else {
                    *old = s;
                }
            }
            None => {
                if !k.is_zero(&c) {
                    terms.insert(m, c);
                }
            }
        }
    }

    pub fn add(&self, a: &ParamPoly, b: &ParamPoly) -> ParamPoly {
        let mut t = a.terms.clone();
        for (m, c) in &b.terms {
            self.accumulate(&mut t, m.clone(), c.clone());
        }
        ParamPoly { terms: t }
    }

    pub fn sub(&self, a: &ParamPoly, b: &ParamPoly) -> ParamPoly {
        let mut t = a.terms.clone();
        for (m, c) in &b.terms {
            self.accumulate(&mut t, m.clone(), self.field.neg(c));
        }
        ParamPoly { terms: t }
    }

    pub fn neg(&self, a: &ParamPoly) -> ParamPoly {
        ParamPoly { terms: a.terms.iter().map(|(m, c)| (m.clone(), self.field.neg(c))).collect() }
    }

    pub fn scale(&self, a: &ParamPoly, c: &Elem) -> ParamPoly {
        if self.field.is_zero(c) {
            return self.zero();
        }
        ParamPoly { terms: a.terms.iter().map(|(m, x)| (m.clone(), self.field.mul(x, c))).collect() }
    }

    pub fn mul(&self, a: &ParamPoly, b: &ParamPoly) -> ParamPoly {
        let k = &self.field;
        let mut t = BTreeMap::new();
        for (ma, ca) in &a.terms {
            let wa = self.mono_weight(ma);
            for (mb, cb) in &b.terms {
                if wa + self.mono_weight(mb) > self.max_weight {
                    continue;
                }
                let m: Mono = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                self.accumulate(&mut t, m, k.mul(ca, cb));
            }
        }
        ParamPoly { terms: t }
    }

    pub fn pow(&self, a: &ParamPoly, e: usize) -> ParamPoly {
        let mut r = self.one();
        for _ in 0..e {
            r = self.mul(&r, a);
        }
        r
    }

    pub fn constant_term(&self, a: &ParamPoly) -> Elem {
        a.terms.get(&self.unit_mono()).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Coefficient of the degree-one monomial `v`.
    pub fn linear_coeff(&self, a: &ParamPoly, v: usize) -> Elem {
        a.terms.get(&self.unit_mono_with(v, 1)).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Part of total degree one.
    pub fn linear_part(&self, a: &ParamPoly) -> Vec<Elem> {
        (0..self.nvars()).map(|v| self.linear_coeff(a, v)).collect()
    }

    /// Smallest total degree of a term (`None` for zero).
    pub fn order(&self, a: &ParamPoly) -> Option<usize> {
        a.terms.keys().map(|m| m.iter().map(|&e| e as usize).sum()).min()
    }

    /// Drop the terms of total degree above `d`.
    pub fn truncate_degree(&self, a: &ParamPoly, d: usize) -> ParamPoly {
        ParamPoly { terms: a.terms.iter().filter(|(m, _)| m.iter().map(|&e| e as usize).sum::<usize>() <= d).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    /// Inverse of an element with nonzero constant term.
    pub fn inv_unit(&self, a: &ParamPoly) -> Result<ParamPoly> {
        let k = &self.field;
        let c = self.constant_term(a);
        if k.is_zero(&c) {
            return Err(Error::NotAUnit);
        }
        let ci = k.inv(&c)?;
        // a = c (1 - n), 1/a = c^{-1} Σ n^k
        let n = self.neg(&self.sub(&self.scale(a, &ci), &self.one()));
        let mut sum = self.one();
        let mut pw = self.one();
        loop {
            pw = self.mul(&pw, &n);
            if pw.is_zero() {
                break;
            }
            sum = self.add(&sum, &pw);
        }
        Ok(self.scale(&sum, &ci))
    }

    /// Replace every variable `v` with `vals[v]` when present.
    pub fn substitute(&self, a: &ParamPoly, vals: &[Option<ParamPoly>]) -> ParamPoly {
        let mut cache = HashMap::new();
        self.substitute_cached(a, vals, &mut cache)
    }

    fn substitute_cached(&self, a: &ParamPoly, vals: &[Option<ParamPoly>], cache: &mut HashMap<(usize, u16), ParamPoly>) -> ParamPoly {
        if !a.terms.keys().any(|m| m.iter().enumerate().any(|(v, &e)| e > 0 && vals[v].is_some())) {
            return a.clone();
        }
        let mut out = self.zero();
        for (m, c) in &a.terms {
            let mut kept = m.clone();
            let mut factor = self.constant(c.clone());
            for (v, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if let Some(val) = &vals[v] {
                    kept[v] = 0;
                    let pw = cache.entry((v, e)).or_insert_with(|| self.pow(val, e as usize)).clone();
                    factor = self.mul(&factor, &pw);
                }
            }
            let term = self.monomial(kept, self.field.one());
            out = self.add(&out, &self.mul(&factor, &term));
        }
        out
    }

    /// Value at a point of `K^n`.
    pub fn eval(&self, a: &ParamPoly, point: &[Elem]) -> Elem {
        let k = &self.field;
        let mut acc = k.zero();
        for (m, c) in &a.terms {
            let mut t = c.clone();
            for (v, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = k.mul(&t, &k.pow(&point[v], e as u64));
                }
            }
            acc = k.add(&acc, &t);
        }
        acc
    }

    /// Render with terms ordered by total degree, then by variable index.
    pub fn format(&self, a: &ParamPoly) -> String {
        let mut terms: Vec<(&Mono, &Elem)> = a.terms.iter().collect();
        terms.sort_by(|(x, _), (y, _)| {
            let dx: u32 = x.iter().map(|&e| e as u32).sum();
            let dy: u32 = y.iter().map(|&e| e as u32).sum();
            dx.cmp(&dy).then_with(|| y.cmp(x))
        });
        let rendered: Vec<(Vec<(&str, usize)>, Elem)> = terms
            .into_iter()
            .map(|(m, c)| (m.iter().enumerate().filter(|(_, &e)| e > 0).map(|(v, &e)| (self.names[v].as_str(), e as usize)).collect(), c.clone()))
            .collect();
        series::format_terms(&self.field, rendered)
    }

    /// Scale so that the first term in display order has coefficient one.
    pub fn normalize(&self, a: &ParamPoly) -> ParamPoly {
        let lead = a
            .terms
            .iter()
            .min_by(|(x, _), (y, _)| {
                let dx: u32 = x.iter().map(|&e| e as u32).sum();
                let dy: u32 = y.iter().map(|&e| e as u32).sum();
                dx.cmp(&dy).then_with(|| y.cmp(x))
            })
            .map(|(_, c)| c.clone());
        match lead {
            Some(c) => self.scale(a, &self.field.inv(&c).expect("nonzero coefficient")),
            None => a.clone(),
        }
    }
}

/// Whether `a` and `b` agree up to a nonzero scalar.
pub fn proportional(ring: &ParamRing, a: &ParamPoly, b: &ParamPoly) -> bool {
    ring.normalize(a) == ring.normalize(b)
}

// ---------------------------------------------------------------------------
// the semiuniversal deformation with section

/// `F = f + Σ_{(i,j) ∈ D} u_ij x^i y^j`.
#[derive(Clone, Debug)]
pub struct DeformationFamily {
    pub tree: ResolutionTree,
    /// The monomials `D`, in parameter order.
    pub basis: Vec<(usize, usize)>,
}

impl DeformationFamily {
    /// `u_i_j` for every `(i, j) ∈ D`.
    pub fn parameter_names(&self) -> Vec<String> {
        self.basis.iter().map(|(i, j)| format!("u_{i}_{j}")).collect()
    }

    /// Index of the parameter attached to `x^i y^j`.
    pub fn parameter(&self, i: usize, j: usize) -> Option<usize> {
        self.basis.iter().position(|m| *m == (i, j))
    }

    pub fn format(&self) -> String {
        let mut s = self.tree.equation.to_string();
        for (i, j) in &self.basis {
            let mono = match (i, j) {
                (0, 1) => "y".to_string(),
                (1, 0) => "x".to_string(),
                (0, j) => format!("y^{j}"),
                (i, 0) => format!("x^{i}"),
                (1, 1) => "x*y".to_string(),
                (1, j) => format!("x*y^{j}"),
                (i, 1) => format!("x^{i}*y"),
                (i, j) => format!("x^{i}*y^{j}"),
            };
            s.push_str(&format!(" + u_{i}_{j}*{mono}"));
        }
        s
    }
}

/// The semiuniversal deformation with section, `D` the standard monomials
/// of `<f> + m<f_x, f_y>` without `1`.
pub fn semiuniversal_family(f: &BiSeries) -> Result<DeformationFamily> {
    semiuniversal_family_for(resolution::resolve(f)?)
}

/// [`semiuniversal_family`] over an already resolved curve.
pub fn semiuniversal_family_for(tree: ResolutionTree) -> Result<DeformationFamily> {
    let basis = tangent::t1_sec_R(&tree.equation)?.basis;
    Ok(DeformationFamily { tree, basis })
}

/// Same family with a caller-supplied monomial basis `D` of `m/mJ`; fails
/// unless the monomials of `D` together with `1` form a basis of
/// `P/(<f> + m<f_x, f_y>)`.
pub fn semiuniversal_family_with_basis(f: &BiSeries, basis: &[(usize, usize)]) -> Result<DeformationFamily> {
    let gens = localalg::tjurina_with_section_generators(f);
    let q = localalg::quotient_dim(&gens, None)?;
    let set: BTreeSet<(usize, usize)> = basis.iter().cloned().collect();
    if set.len() != basis.len() || set.contains(&(0, 0)) {
        return Err(Error::InvalidInput("monomials must be distinct and different from 1".into()));
    }
    if basis.len() + 1 != q.dim {
        return Err(Error::InvalidInput(format!("{} monomials given but m/mJ has dimension {}", basis.len(), q.dim - 1)));
    }
    let bound = q.bound.max(basis.iter().map(|m| m.0 + m.1 + 1).max().unwrap_or(0));
    let mut e: Echelon = localalg::ideal_echelon(&gens, bound);
    let k = f.field.clone();
    for m in std::iter::once((0, 0)).chain(basis.iter().cloned()) {
        let mut row = vec![k.zero(); e.ncols()];
        row[localalg::monomial_index(m)] = k.one();
        if !e.insert(row) {
            return Err(Error::InvalidInput(format!("x^{} y^{} is dependent modulo the ideal", m.0, m.1)));
        }
    }
    let tree = resolution::resolve(f)?;
    Ok(DeformationFamily { tree, basis: basis.to_vec() })
}

// ---------------------------------------------------------------------------
// the stratum

/// A tangential component met on the way through the tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentRecord {
    /// Point at which the component is split off.
    pub node: usize,
    /// Infinitely near point in its tangent direction.
    pub child: usize,
    pub m: usize,
    pub q: usize,
    pub m_prime: usize,
    /// Name of the auxiliary parameter of the moving tangent, if any.
    pub auxiliary: Option<String>,
}

/// One generator of the stratum ideal.
#[derive(Clone, Debug)]
pub struct StratumEquation {
    pub poly: ParamPoly,
    pub text: String,
    /// Lowest total degree of a term.
    pub order: usize,
}

/// Generators of the weakly equisingular stratum modulo parameter degree
/// `D_max`.
#[derive(Clone, Debug)]
pub struct WesConditions {
    /// Ring of the parameters `u_ij` (the first `|D|` variables) and of the
    /// auxiliary parameters.
    pub ring: ParamRing,
    pub basis: Vec<(usize, usize)>,
    pub degree_bound: usize,
    pub equations: Vec<StratumEquation>,
    /// Rank of the linear parts of the equations.
    pub linear_rank: usize,
    pub auxiliary: usize,
    /// Number of conditions solved for one of their variables.
    pub solved: usize,
    /// Conditions without linear part in the remaining variables.
    pub unsolved: usize,
    /// `|D| + auxiliary − solved`.
    pub dim_from_conditions: usize,
    pub con_wes: usize,
    pub components: Vec<ComponentRecord>,
    /// Solved variables in terms of the remaining ones: a parametrization
    /// of the stratum (exact as long as no solution was truncated).
    pub parametrization: Vec<Option<ParamPoly>>,
}

impl WesConditions {
    /// Variables left free by the parametrization.
    pub fn free_variables(&self) -> Vec<usize> {
        (0..self.ring.nvars()).filter(|&v| self.parametrization[v].is_none()).collect()
    }

    /// Parameter values `u_ij` of the stratum point with the given values of
    /// the free variables (missing ones are zero).
    pub fn point(&self, free: &BTreeMap<usize, Elem>) -> Vec<Elem> {
        let k = self.ring.field();
        let base: Vec<Elem> = (0..self.ring.nvars()).map(|v| free.get(&v).cloned().unwrap_or_else(|| k.zero())).collect();
        (0..self.basis.len())
            .map(|v| match &self.parametrization[v] {
                Some(phi) => self.ring.eval(phi, &base),
                None => base[v].clone(),
            })
            .collect()
    }

    /// The specialization `f + Σ u_ij x^i y^j` at parameter values `u`.
    pub fn specialize(&self, f: &BiSeries, u: &[Elem]) -> BiSeries {
        let k = self.ring.field();
        let mut g = f.clone();
        for ((i, j), c) in self.basis.iter().zip(u) {
            g = g.add(&BiSeries::monomial(k, *i, *j, c.clone()));
        }
        g
    }

    pub fn texts(&self) -> Vec<String> {
        self.equations.iter().map(|e| e.text.clone()).collect()
    }

    /// Whether some equation is a scalar multiple of `p`.
    pub fn contains_equation(&self, p: &ParamPoly) -> bool {
        self.equations.iter().any(|e| proportional(&self.ring, &e.poly, p))
    }

    /// Parameters `u_ij` whose vanishing is an equation.
    pub fn vanishing_parameters(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for e in &self.equations {
            if e.poly.num_terms() == 1 {
                let (m, _) = e.poly.terms().next().unwrap();
                let vars: Vec<usize> = m.iter().enumerate().filter(|(_, &x)| x > 0).map(|(v, _)| v).collect();
                if vars.len() == 1 && m[vars[0]] == 1 && vars[0] < self.basis.len() {
                    out.push(self.basis[vars[0]]);
                }
            }
        }
        out.sort();
        out
    }
}

type PBi = BTreeMap<(usize, usize), ParamPoly>;

fn p_part(p: u64, m: usize) -> usize {
    if p == 0 {
        return 1;
    }
    let mut q = 1;
    let mut r = m;
    while r.is_multiple_of(p as usize) {
        q *= p as usize;
        r /= p as usize;
    }
    q
}

/// Row `n` of Pascal's triangle in the field.
fn binomials(k: &Field, n: usize) -> Vec<Elem> {
    let mut row = vec![k.one()];
    for _ in 0..n {
        let mut next = vec![k.one(); row.len() + 1];
        for i in 1..row.len() {
            next[i] = k.add(&row[i - 1], &row[i]);
        }
        row = next;
    }
    row
}

/// Tangential component `(chart, multiplicity)` list of a point.
fn components_of(g: &BiSeries) -> Result<Vec<(Chart, usize)>> {
    let d = resolution::tangent_directions(g)?;
    if !d.irrational.is_empty() {
        return Err(Error::IrrationalTangent(format!("tangent cone of {g}")));
    }
    let mut out: Vec<(Chart, usize)> = d.finite.into_iter().map(|(b, m)| (Chart::Beta(b), m)).collect();
    if d.infinity > 0 {
        out.push((Chart::Infinity, d.infinity));
    }
    Ok(out)
}

/// The binary form `l_j` of a direction, as coefficients of `X^i Y^{m-i}`.
fn direction_form(k: &Field, chart: &Chart, m: usize) -> Vec<Elem> {
    match chart {
        Chart::Beta(b) => {
            // (Y - b X)^m
            let bin = binomials(k, m);
            let nb = k.neg(b);
            (0..=m).map(|i| k.mul(&bin[i], &k.pow(&nb, i as u64))).collect()
        }
        _ => {
            let mut v = vec![k.zero(); m + 1];
            v[m] = k.one();
            v
        }
    }
}

fn form_mul_k(k: &Field, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let mut r = vec![k.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] = k.add(&r[i + j], &k.mul(x, y));
        }
    }
    r
}

fn form_mul(ring: &ParamRing, a: &[ParamPoly], b: &[ParamPoly]) -> Vec<ParamPoly> {
    let mut r = vec![ring.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            r[i + j] = ring.add(&r[i + j], &ring.mul(x, y));
        }
    }
    r
}

/// Inverse of a square matrix over `K`.
fn invert(k: &Field, a: &[Vec<Elem>]) -> Result<Vec<Vec<Elem>>> {
    let n = a.len();
    let rows: Vec<Vec<Elem>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { k.one() } else { k.zero() }));
            row
        })
        .collect();
    let (red, piv) = linalg::rref(k, 2 * n, rows);
    if piv.len() < n || piv[n - 1] >= n {
        return Err(Error::NotCoprime);
    }
    Ok(red.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Factor the binary form `lf` (coefficients of `X^i Y^{m-i}` over the
/// parameter ring) into factors lifting the direction forms, by linear
/// Hensel steps (the maximal ideal of the ring is nilpotent).
fn split_form(ring: &ParamRing, lf: &[ParamPoly], comps: &[(Chart, usize)]) -> Result<Vec<Vec<ParamPoly>>> {
    if comps.len() == 1 {
        return Ok(vec![lf.to_vec()]);
    }
    let k = ring.field().clone();
    let m = lf.len() - 1;
    let mut ls: Vec<Vec<Elem>> = comps.iter().map(|(c, mj)| direction_form(&k, c, *mj)).collect();
    let prod = ls.iter().skip(1).fold(ls[0].clone(), |acc, l| form_mul_k(&k, &acc, l));
    let special: Vec<Elem> = lf.iter().map(|c| ring.constant_term(c)).collect();
    let i0 = prod.iter().position(|c| !k.is_zero(c)).ok_or(Error::WrongDirection)?;
    let lead = k.div(&special[i0], &prod[i0])?;
    ls[0] = ls[0].iter().map(|c| k.mul(c, &lead)).collect();
    // unknown coefficients of the corrections; factors after the first keep
    // their leading coefficient fixed
    let fixed = |j: usize| -> Option<usize> {
        if j == 0 {
            None
        } else {
            match comps[j].0 {
                Chart::Infinity => Some(comps[j].1),
                _ => Some(0),
            }
        }
    };
    let mut unknowns: Vec<(usize, usize)> = Vec::new();
    for (j, (_, mj)) in comps.iter().enumerate() {
        for i in 0..=*mj {
            if fixed(j) != Some(i) {
                unknowns.push((j, i));
            }
        }
    }
    if unknowns.len() != m + 1 {
        return Err(Error::InvalidInput("tangent cone degree mismatch".into()));
    }
    let cofactors: Vec<Vec<Elem>> = (0..comps.len())
        .map(|j| {
            let mut acc = vec![k.one()];
            for (t, l) in ls.iter().enumerate() {
                if t != j {
                    acc = form_mul_k(&k, &acc, l);
                }
            }
            acc
        })
        .collect();
    let mut a = vec![vec![k.zero(); m + 1]; m + 1];
    for (col, (j, i)) in unknowns.iter().enumerate() {
        for (t, c) in cofactors[*j].iter().enumerate() {
            a[i + t][col] = c.clone();
        }
    }
    let ainv = invert(&k, &a)?;
    let mut fs: Vec<Vec<ParamPoly>> = ls.iter().map(|l| l.iter().map(|c| ring.constant(c.clone())).collect()).collect();
    let max_iter = ring.max_weight() as usize + 2;
    for _ in 0..max_iter {
        let prod = fs.iter().skip(1).fold(fs[0].clone(), |acc, f| form_mul(ring, &acc, f));
        let err: Vec<ParamPoly> = (0..=m).map(|i| ring.sub(&lf[i], &prod[i])).collect();
        if err.iter().all(|e| e.is_zero()) {
            return Ok(fs);
        }
        for (col, (j, i)) in unknowns.iter().enumerate() {
            let mut d = ring.zero();
            for (row, e) in err.iter().enumerate() {
                if !e.is_zero() && !k.is_zero(&ainv[col][row]) {
                    d = ring.add(&d, &ring.scale(e, &ainv[col][row]));
                }
            }
            fs[*j][*i] = ring.add(&fs[*j][*i], &d);
        }
    }
    Err(Error::UnstableTruncation("Hensel lifting of the tangent cone".into()))
}

struct Walker<'a> {
    tree: &'a ResolutionTree,
    ring: ParamRing,
    nu: usize,
    aux_of: BTreeMap<usize, (usize, usize)>,
    solved: Vec<Option<ParamPoly>>,
    solved_count: usize,
    residual: Vec<ParamPoly>,
    cache: HashMap<(usize, u16), ParamPoly>,
    components: Vec<ComponentRecord>,
}

impl<'a> Walker<'a> {
    fn nf(&mut self, a: &ParamPoly) -> ParamPoly {
        self.ring.substitute_cached(a, &self.solved, &mut self.cache)
    }

    fn nf_bi(&mut self, g: &PBi) -> PBi {
        let mut out = PBi::new();
        for (e, c) in g {
            let c = self.nf(c);
            if !c.is_zero() {
                out.insert(*e, c);
            }
        }
        out
    }

    /// Add the condition `h = 0`.
    fn impose(&mut self, h: &ParamPoly) -> Result<()> {
        let ring = self.ring.clone();
        let k = ring.field().clone();
        let h = self.nf(h);
        if h.is_zero() {
            return Ok(());
        }
        if !k.is_zero(&ring.constant_term(&h)) {
            return Err(Error::InvalidInput("the special fibre violates an equisingularity condition".into()));
        }
        // prefer eliminating auxiliary parameters, then the last parameter
        let lin: Vec<usize> = (0..ring.nvars()).filter(|&v| !k.is_zero(&ring.linear_coeff(&h, v))).collect();
        let Some(&v) = lin.iter().filter(|&&v| v >= self.nu).max().or_else(|| lin.iter().max()) else {
            self.residual.push(h);
            return Ok(());
        };
        let c = ring.linear_coeff(&h, v);
        let rest = ring.sub(&h, &ring.scale(&ring.var(v), &c));
        let minus_inv = k.neg(&k.inv(&c)?);
        let mut vals: Vec<Option<ParamPoly>> = vec![None; ring.nvars()];
        let mut phi = ring.zero();
        let mut settled = false;
        for _ in 0..ring.max_weight() as usize + 2 {
            vals[v] = Some(phi.clone());
            let next = ring.scale(&ring.substitute(&rest, &vals), &minus_inv);
            if next == phi {
                settled = true;
                break;
            }
            phi = next;
        }
        if !settled {
            return Err(Error::UnstableTruncation("solving an equisingularity condition".into()));
        }
        vals[v] = Some(phi.clone());
        for s in self.solved.iter_mut().flatten() {
            *s = ring.substitute(s, &vals);
        }
        for r in self.residual.iter_mut() {
            *r = ring.substitute(r, &vals);
        }
        self.solved[v] = Some(phi);
        self.solved_count += 1;
        self.cache.clear();
        Ok(())
    }

    fn process(&mut self, id: usize, g: PBi) -> Result<()> {
        let tree = self.tree;
        let node = &tree.nodes[id];
        let ring = self.ring.clone();
        let k = ring.field().clone();
        let g = self.nf_bi(&g);
        // coefficients outside the Newton region
        let outside: Vec<(usize, usize)> = if node.parent.is_none() {
            g.keys().filter(|(i, j)| i + j < node.m).cloned().collect()
        } else {
            let poly = resolution::newton_polygon(tree, id)?;
            g.keys().filter(|e| !poly.contains(**e)).cloned().collect()
        };
        for e in outside {
            let c = g[&e].clone();
            self.impose(&c)?;
        }
        if node.children.is_empty() {
            return Ok(());
        }
        let g = self.nf_bi(&g);
        let m = node.m;
        let lf: Vec<ParamPoly> = (0..=m).map(|i| g.get(&(i, m - i)).cloned().unwrap_or_else(|| ring.zero())).collect();
        let comps = components_of(&node.strict)?;
        let factors = split_form(&ring, &lf, &comps)?;
        for ((chart, mj), fj) in comps.iter().zip(&factors) {
            let Some(&child) = node.children.iter().find(|&&c| tree.nodes[c].chart == *chart) else {
                return Err(Error::WrongDirection);
            };
            if !tree.nodes[child].essential {
                continue;
            }
            let beta = match chart {
                Chart::Beta(b) => b.clone(),
                _ => k.zero(),
            };
            let mut s = ring.constant(beta.clone());
            let aux = self.aux_of.get(&child).cloned();
            let q = p_part(k.characteristic(), *mj);
            if let Some((w, _)) = aux {
                // normalized coefficients c_i of the component's tangent cone
                let coef = |i: usize| -> &ParamPoly {
                    match chart {
                        Chart::Infinity => &fj[*mj - i],
                        _ => &fj[i],
                    }
                };
                let a0 = ring.inv_unit(coef(0))?;
                let c: Vec<ParamPoly> = (0..=*mj).map(|i| ring.mul(coef(i), &a0)).collect();
                let mp = *mj / q;
                let mp_inv = k.inv(&k.from_usize(mp))?;
                let cq = ring.scale(&c[q], &mp_inv);
                let bin = binomials(&k, mp);
                let mut conds = Vec::new();
                for (i, ci) in c.iter().enumerate().skip(1) {
                    if i % q != 0 {
                        conds.push(ci.clone());
                    }
                }
                for l in 2..=mp {
                    conds.push(ring.sub(&c[l * q], &ring.scale(&ring.pow(&cq, l), &bin[l])));
                }
                let wq = ring.pow(&ring.var(w), q);
                conds.push(ring.add(&ring.add(&wq, &ring.constant(k.pow(&beta, q as u64))), &cq));
                for h in &conds {
                    self.impose(h)?;
                }
                s = ring.add(&s, &ring.var(w));
            }
            self.components.push(ComponentRecord {
                node: id,
                child,
                m: *mj,
                q,
                m_prime: *mj / q,
                auxiliary: aux.map(|(w, _)| ring.name(w).to_string()),
            });
            let g_now = self.nf_bi(&g);
            let s = self.nf(&s);
            let gc = self.blow_up(&g_now, m, chart, &s)?;
            self.process(child, gc)?;
        }
        Ok(())
    }

    /// `x^{-m} G(X, Y)` with `(X, Y) = (x, x(y + s))` or `(x(y + s), x)`.
    fn blow_up(&self, g: &PBi, m: usize, chart: &Chart, s: &ParamPoly) -> Result<PBi> {
        let ring = &self.ring;
        let k = ring.field();
        let top = g.keys().map(|(i, j)| i.max(j)).max().copied().unwrap_or(0);
        let mut spow = vec![ring.one()];
        for _ in 0..top {
            let last = spow.last().unwrap().clone();
            spow.push(ring.mul(&last, s));
        }
        let mut out = PBi::new();
        for ((i, j), c) in g {
            if i + j < m {
                return Err(Error::NonSolvableAuxiliary(format!("coefficient of x^{i} y^{j} survives below the multiplicity")));
            }
            let xe = i + j - m;
            // exponent expanded as (y + s)^e
            let e = match chart {
                Chart::Infinity => *i,
                _ => *j,
            };
            let bin = binomials(k, e);
            for (l, b) in bin.iter().enumerate() {
                let term = ring.scale(&ring.mul(c, &spow[e - l]), b);
                if term.is_zero() {
                    continue;
                }
                let slot = out.entry((xe, l)).or_insert_with(|| ring.zero());
                *slot = ring.add(slot, &term);
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }
}

/// Working weight bound for parameter degree `d_max`.
fn working_weight(top_q: usize, d_max: usize) -> u32 {
    (top_q * (2 * d_max).max(d_max + 2)) as u32
}

/// Generators of the weakly equisingular stratum of the family modulo
/// parameter degree `d_max`.
pub fn wes_conditions(fam: &DeformationFamily, d_max: usize) -> Result<WesConditions> {
    if d_max == 0 {
        return Err(Error::TruncationTooCoarse("parameter degree bound must be positive".into()));
    }
    let tree = &fam.tree;
    let k = tree.field.clone();
    let p = k.characteristic();
    let nu = fam.basis.len();
    // auxiliary parameters: one per essential free point off the root
    let mut aux: Vec<(usize, usize)> = Vec::new();
    for n in &tree.nodes {
        if n.essential && n.kind == PointKind::Free {
            let parent = &tree.nodes[n.parent.expect("free points have a parent")];
            let comps = components_of(&parent.strict)?;
            let mj = comps.iter().find(|(c, _)| *c == n.chart).map(|(_, m)| *m).ok_or(Error::WrongDirection)?;
            aux.push((n.id, p_part(p, mj)));
        }
    }
    let top_q = aux.iter().map(|(_, q)| *q).max().unwrap_or(1);
    let mut names = fam.parameter_names();
    let mut weights = vec![top_q as u32; nu];
    let mut aux_of = BTreeMap::new();
    for (i, (id, q)) in aux.iter().enumerate() {
        names.push(format!("w_{id}"));
        weights.push((top_q / q) as u32);
        aux_of.insert(*id, (nu + i, *q));
    }
    let ring = ParamRing::new(&k, names, weights, working_weight(top_q, d_max));
    // F = f + Σ u_ij x^i y^j
    let mut g = PBi::new();
    for ((i, j), c) in tree.equation.terms() {
        g.insert((*i, *j), ring.constant(c.clone()));
    }
    for (v, (i, j)) in fam.basis.iter().enumerate() {
        let slot = g.entry((*i, *j)).or_insert_with(|| ring.zero());
        *slot = ring.add(slot, &ring.var(v));
    }
    let mut w = Walker { tree, ring: ring.clone(), nu, aux_of, solved: vec![None; ring.nvars()], solved_count: 0, residual: Vec::new(), cache: HashMap::new(), components: Vec::new() };
    if tree.root().essential {
        w.process(0, g)?;
    }
    let (_, con_wes) = condition_counts(tree);
    let equations = stratum_equations(&ring, nu, &w.solved, &w.residual, d_max)?;
    let lin: Vec<Vec<Elem>> = equations.iter().map(|e| ring.linear_part(&e.poly)[..nu].to_vec()).collect();
    let linear_rank = linalg::rank(&k, nu, lin);
    let auxiliary = aux.len();
    let solved = w.solved_count;
    if solved + w.residual.len() < con_wes + auxiliary {
        return Err(Error::TruncationTooCoarse(format!(
            "only {} of {} conditions are visible at parameter degree {d_max}",
            (solved + w.residual.len()).saturating_sub(auxiliary),
            con_wes
        )));
    }
    Ok(WesConditions {
        ring,
        basis: fam.basis.clone(),
        degree_bound: d_max,
        equations,
        linear_rank,
        auxiliary,
        solved,
        unsolved: w.residual.len(),
        dim_from_conditions: (nu + auxiliary).saturating_sub(solved),
        con_wes,
        components: w.components,
        parametrization: w.solved,
    })
}


/// Monomials of degree `1..=d` in the variables `vars` (exponent vectors of
/// the full ring), ordered by degree and then lexicographically.
fn monomials_in(n: usize, vars: &[usize], d: usize) -> Vec<Mono> {
    let mut out: Vec<Mono> = Vec::new();
    let mut layer: Vec<Mono> = vec![vec![0; n]];
    for _ in 0..d {
        let mut next: BTreeSet<Mono> = BTreeSet::new();
        for m in &layer {
            for &v in vars {
                let mut x = m.clone();
                x[v] += 1;
                next.insert(x);
            }
        }
        let mut next: Vec<Mono> = next.into_iter().collect();
        next.sort_by(|a, b| b.cmp(a));
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Ideal of the image of the parametrization `u_v ↦ solved[v]`.
fn stratum_equations(ring: &ParamRing, nu: usize, solved: &[Option<ParamPoly>], residual: &[ParamPoly], d_max: usize) -> Result<Vec<StratumEquation>> {
    let k = ring.field().clone();
    let n = ring.nvars();
    let is_aux = |p: &ParamPoly| (nu..n).any(|v| p.involves(v));
    let mut polys: Vec<ParamPoly> = Vec::new();
    let mut elim: BTreeSet<usize> = BTreeSet::new();
    let mut aux_res: Vec<ParamPoly> = Vec::new();
    for (v, s) in solved.iter().enumerate().take(nu) {
        if let Some(phi) = s {
            if is_aux(phi) {
                elim.insert(v);
            } else {
                polys.push(ring.sub(&ring.var(v), &ring.truncate_degree(phi, d_max)));
            }
        }
    }
    for r in residual {
        if is_aux(r) {
            aux_res.push(r.clone());
        } else {
            polys.push(ring.truncate_degree(r, d_max));
        }
    }
    if !elim.is_empty() || !aux_res.is_empty() {
        // free parameters entangled with the auxiliary ones
        let mut vars: BTreeSet<usize> = elim.clone();
        for v in &elim {
            for u in 0..nu {
                if solved[u].is_none() && solved[*v].as_ref().unwrap().involves(u) {
                    vars.insert(u);
                }
            }
        }
        for r in &aux_res {
            for u in 0..nu {
                if solved[u].is_none() && r.involves(u) {
                    vars.insert(u);
                }
            }
        }
        let vars: Vec<usize> = vars.into_iter().collect();
        polys.extend(eliminate(ring, &vars, solved, &aux_res, d_max)?);
    }
    let mut eqs: Vec<StratumEquation> = polys
        .into_iter()
        .filter(|p| !p.is_zero())
        .map(|p| {
            let p = ring.normalize(&p);
            StratumEquation { text: ring.format(&p), order: ring.order(&p).unwrap_or(0), poly: p }
        })
        .collect();
    let _ = &k;
    eqs.sort_by(|a, b| a.order.cmp(&b.order).then_with(|| a.text.cmp(&b.text)));
    Ok(eqs)
}

/// Minimal generators of the kernel of `K[vars]/m^{d+1} → ring/(residual)`.
fn eliminate(ring: &ParamRing, vars: &[usize], solved: &[Option<ParamPoly>], residual: &[ParamPoly], d: usize) -> Result<Vec<ParamPoly>> {
    let k = ring.field().clone();
    let n = ring.nvars();
    let monos = monomials_in(n, vars, d);
    let images: Vec<ParamPoly> = monos.iter().map(|m| ring.substitute(&ring.monomial(m.clone(), k.one()), solved)).collect();
    // residual multiples by monomials in the free variables
    let free: Vec<usize> = (0..n).filter(|&v| solved[v].is_none()).collect();
    let mut extra: Vec<ParamPoly> = Vec::new();
    for r in residual {
        let mut layer = vec![r.clone()];
        extra.push(r.clone());
        while !layer.is_empty() {
            let mut next = Vec::new();
            for p in &layer {
                for &v in &free {
                    let q = ring.mul(p, &ring.var(v));
                    if !q.is_zero() {
                        next.push(q);
                    }
                }
            }
            extra.extend(next.iter().cloned());
            layer = next;
            if extra.len() > 20000 {
                return Err(Error::TruncationTooCoarse("too many residual multiples".into()));
            }
        }
    }
    let mut cols: BTreeMap<Mono, usize> = BTreeMap::new();
    for p in images.iter().chain(&extra) {
        for (m, _) in p.terms() {
            let len = cols.len();
            cols.entry(m.clone()).or_insert(len);
        }
    }
    let ni = cols.len();
    let nm = monos.len();
    let row_of = |p: &ParamPoly, tag: Option<usize>| {
        let mut row = vec![k.zero(); ni + nm];
        for (m, c) in p.terms() {
            row[cols[m]] = c.clone();
        }
        if let Some(t) = tag {
            row[ni + t] = k.one();
        }
        row
    };
    let mut rows: Vec<Vec<Elem>> = extra.iter().map(|p| row_of(p, None)).collect();
    rows.extend(images.iter().enumerate().map(|(t, p)| row_of(p, Some(t))));
    let (red, piv) = linalg::rref(&k, ni + nm, rows);
    let kernel: Vec<Vec<Elem>> = red.into_iter().zip(piv).filter(|(_, p)| *p >= ni).map(|(r, _)| r[ni..].to_vec()).collect();
    // keep a basis of kernel / (m · kernel)
    let index: BTreeMap<Mono, usize> = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let mut span = Echelon::new(&k, nm);
    for kv in &kernel {
        for &v in vars {
            let mut row = vec![k.zero(); nm];
            let mut any = false;
            for (t, c) in kv.iter().enumerate() {
                if k.is_zero(c) {
                    continue;
                }
                let mut m = monos[t].clone();
                m[v] += 1;
                if let Some(&i) = index.get(&m) {
                    row[i] = c.clone();
                    any = true;
                }
            }
            if any {
                span.insert(row);
            }
        }
    }
    let mut out = Vec::new();
    for kv in kernel {
        if span.insert(kv.clone()) {
            let mut p = ring.zero();
            for (t, c) in kv.iter().enumerate() {
                p = ring.add(&p, &ring.monomial(monos[t].clone(), c.clone()));
            }
            out.push(p);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// dimensions and reports

/// Dimension of the weakly equisingular stratum, `dim T¹ˢᵉᶜ_R − con_wes`,
/// with the first-order values it must agree with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WesDimension {
    pub dim: usize,
    pub dim_t1_sec_r: usize,
    pub con_wes: usize,
    /// `dim T¹ᵉˢ_R + dim T¹ᵉˢ_{R̄/R}`, `T¹ᵉˢ_R` from the equisingularity ideal.
    pub via_ideal: usize,
    /// `dim T¹ᵉˢ_{R̄←R} + dim Mˢᵉᶜ`.
    pub via_normalization: usize,
    pub consistent: bool,
}

pub fn wes_dimension(f: &BiSeries) -> Result<WesDimension> {
    let tree = resolution::resolve(f)?;
    let t = tangent::t1_es_suite_for(&tree)?;
    Ok(wes_dimension_from(&tree, &t))
}

/// [`wes_dimension`] from an already computed tangent report.
pub fn wes_dimension_from(tree: &ResolutionTree, t: &tangent::EsTangentReport) -> WesDimension {
    let (_, con_wes) = condition_counts(tree);
    let dim = t.dim_t1_sec_r.saturating_sub(con_wes);
    let via_ideal = t.dim_t1_es_r_ideal + t.dim_t1_es_over;
    let via_normalization = t.dim_t1_es_norm + t.dim_msec;
    WesDimension { dim, dim_t1_sec_r: t.dim_t1_sec_r, con_wes, via_ideal, via_normalization, consistent: dim == via_ideal && dim == via_normalization }
}

/// Behaviour in good characteristic: `Mˢᵉᶜ` and `T¹ᵉˢ_{R̄/R}` vanish and the
/// weakly equisingular stratum has the dimension of `T¹ᵉˢ_R`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoodCharReport {
    pub good: bool,
    pub msec_vanishes: bool,
    pub over_vanishes: bool,
    pub vanishing_consistent: bool,
}

pub fn good_char_report(f: &BiSeries) -> Result<GoodCharReport> {
    let tree = resolution::resolve(f)?;
    let t = tangent::t1_es_suite_for(&tree)?;
    Ok(good_char_from(&tree, &t))
}

/// [`good_char_report`] from an already computed tangent report.
pub fn good_char_from(tree: &ResolutionTree, t: &tangent::EsTangentReport) -> GoodCharReport {
    let d = wes_dimension_from(tree, t);
    let msec_vanishes = t.dim_msec == 0;
    let over_vanishes = t.dim_t1_es_over == 0;
    let good = t.good_characteristic;
    GoodCharReport { good, msec_vanishes, over_vanishes, vanishing_consistent: !good || (msec_vanishes && over_vanishes && d.dim == t.dim_t1_es_r) }
}

/// Everything known about the strata of one curve.
#[derive(Clone, Debug, Serialize)]
pub struct StratumReport {
    pub parameters: Vec<String>,
    pub con_es: usize,
    pub con_wes: usize,
    pub dim_t1_sec_r: usize,
    pub dim_wes: usize,
    pub dim_from_conditions: usize,
    pub degree_bound: usize,
    pub equations: Vec<String>,
    pub linear_rank: usize,
    pub auxiliary_parameters: usize,
    pub unsolved_conditions: usize,
    pub components: Vec<ComponentRecord>,
    pub dimension: WesDimension,
    pub good_characteristic: GoodCharReport,
}

pub fn stratum_report(f: &BiSeries, d_max: usize) -> Result<StratumReport> {
    let fam = semiuniversal_family(f)?;
    stratum_report_for(&fam, d_max)
}

pub fn stratum_report_for(fam: &DeformationFamily, d_max: usize) -> Result<StratumReport> {
    let t = tangent::t1_es_suite_for(&fam.tree)?;
    stratum_report_with(fam, d_max, &t)
}

/// [`stratum_report_for`] reusing a tangent report of the same curve.
pub fn stratum_report_with(fam: &DeformationFamily, d_max: usize, t: &tangent::EsTangentReport) -> Result<StratumReport> {
    let tree = &fam.tree;
    let w = wes_conditions(fam, d_max)?;
    let (con_es, con_wes) = condition_counts(tree);
    let dimension = wes_dimension_from(tree, t);
    Ok(StratumReport {
        parameters: fam.parameter_names(),
        con_es,
        con_wes,
        dim_t1_sec_r: t.dim_t1_sec_r,
        dim_wes: dimension.dim,
        dim_from_conditions: w.dim_from_conditions,
        degree_bound: d_max,
        equations: w.texts(),
        linear_rank: w.linear_rank,
        auxiliary_parameters: w.auxiliary,
        unsolved_conditions: w.unsolved,
        components: w.components,
        dimension,
        good_characteristic: good_char_from(tree, t),
    })
}
