//! First-order deformation spaces of a curve germ `R = P/<f>`, of its
//! normalization map `P -> R̄ = ⊕ K[[t_i]]`, and of the equisingular
//! sub-functors.
//!
//! Everything except `T¹ˢᵉᶜ_R` is computed in the coefficient space
//! `⊕_i K[t_i]/t_i^n` (pairs `(a_i, b_i)` for deformations of the
//! parametrization `(x_i(t_i), y_i(t_i))`).  The truncation `n` is chosen past
//! the conductor and every dimension is certified by recomputing it at
//! `n + 8`.
//!
//! The equisingularity constraints are built by transporting the deformed
//! parametrization through the resolution tree: at an infinitely near point
//! of multiplicity at least two the transported pairs must vanish to the
//! multiplicity of each branch, and the section through the point is
//! determined by the first branch passing through it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::coeffield::{Elem, Field};
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon};
use crate::localalg;
use crate::resolution::{self, Chart, ResolutionTree};
use crate::series::{self, BiSeries, Branch, UniSeries};
use crate::strata;

/// Largest coefficient truncation tried before reporting instability.
pub const TRUNCATION_CAP: usize = 1024;

// ---------------------------------------------------------------------------
// T¹ˢᵉᶜ_R

/// `m/mJ` with its monomial basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SecBasis {
    pub dim: usize,
    /// Exponents `(i, j)` of the monomials `x^i y^j` spanning `m/mJ`.
    pub basis: Vec<(usize, usize)>,
}

/// `dim_K m/<f, x f_x, y f_x, x f_y, y f_y>` and a monomial basis of it.
#[allow(non_snake_case)]
pub fn t1_sec_R(f: &BiSeries) -> Result<SecBasis> {
    let q = localalg::quotient_dim(&localalg::tjurina_with_section_generators(f), None)?;
    let mut basis: Vec<(usize, usize)> = q.basis.into_iter().filter(|m| *m != (0, 0)).collect();
    basis.sort();
    Ok(SecBasis { dim: basis.len(), basis })
}

/// Tjurina number `dim_K P/<f, f_x, f_y>`.
#[allow(non_snake_case)]
pub fn t1_R(f: &BiSeries) -> Result<usize> {
    Ok(localalg::quotient_dim(&localalg::tjurina_generators(f), None)?.dim)
}

// ---------------------------------------------------------------------------
// coefficient spaces

/// Parametrizations of all branches together with the truncation used for
/// the coefficient space `⊕ K[t_i]/t_i^n`.
#[derive(Clone, Debug)]
pub struct BranchSpace {
    pub field: Field,
    pub branches: Vec<Branch>,
    pub n: usize,
}

impl BranchSpace {
    pub fn new(branches: &[Branch], n: usize) -> Result<BranchSpace> {
        let first = branches.first().ok_or_else(|| Error::InvalidInput("no branches".into()))?;
        let field = first.field().clone();
        for b in branches {
            if b.precision() < n {
                return Err(Error::InsufficientPrecision(format!(
                    "branch known to t^{} but truncation {n} requested",
                    b.precision()
                )));
            }
        }
        Ok(BranchSpace { field, branches: branches.to_vec(), n })
    }

    pub fn r(&self) -> usize {
        self.branches.len()
    }

    /// Dimension of `⊕ K[t_i]/t_i^n`.
    pub fn single_dim(&self) -> usize {
        self.r() * self.n
    }

    /// Dimension of the pair space.
    pub fn pair_dim(&self) -> usize {
        2 * self.r() * self.n
    }

    /// Column of coefficient `k` of component `comp` (0 = a, 1 = b) of branch `i`.
    pub fn pair_index(&self, i: usize, comp: usize, k: usize) -> usize {
        (2 * i + comp) * self.n + k
    }

    fn series_coeffs(&self, s: &UniSeries) -> Vec<Elem> {
        (0..self.n).map(|k| s.coef(k)).collect()
    }

    /// Vector of a tuple of series (one per branch) in `⊕ K[t_i]/t_i^n`.
    pub fn single_vector(&self, s: &[UniSeries]) -> Vec<Elem> {
        s.iter().flat_map(|x| self.series_coeffs(x)).collect()
    }

    /// Vector of a tuple of pairs in the pair space.
    pub fn pair_vector(&self, pairs: &[(UniSeries, UniSeries)]) -> Vec<Elem> {
        pairs.iter().flat_map(|(a, b)| self.series_coeffs(a).into_iter().chain(self.series_coeffs(b))).collect()
    }

    /// Inverse of [`BranchSpace::pair_vector`].
    pub fn pairs_of(&self, v: &[Elem]) -> Vec<(UniSeries, UniSeries)> {
        let n = self.n;
        (0..self.r())
            .map(|i| {
                let a = UniSeries::new(&self.field, v[(2 * i) * n..(2 * i + 1) * n].to_vec(), n);
                let b = UniSeries::new(&self.field, v[(2 * i + 1) * n..(2 * i + 2) * n].to_vec(), n);
                (a, b)
            })
            .collect()
    }

    fn mul_single(&self, v: &[Elem], s: &[UniSeries]) -> Vec<Elem> {
        let f = &self.field;
        let n = self.n;
        let mut out = vec![f.zero(); v.len()];
        for (i, si) in s.iter().enumerate() {
            let block = &v[i * n..(i + 1) * n];
            for (a, x) in block.iter().enumerate() {
                if f.is_zero(x) {
                    continue;
                }
                for (b, y) in si.coeffs().iter().enumerate() {
                    if a + b >= n {
                        break;
                    }
                    if !f.is_zero(y) {
                        let o = &mut out[i * n + a + b];
                        *o = f.add(o, &f.mul(x, y));
                    }
                }
            }
        }
        out
    }

    /// Echelon basis of the image of the maximal ideal `m` of `P` in
    /// `⊕ K[t_i]/t_i^n`: the span of `x`, `y` closed under multiplication
    /// by `x` and `y`.
    pub fn ideal_image(&self) -> Echelon {
        let xs: Vec<UniSeries> = self.branches.iter().map(|b| b.x.clone()).collect();
        let ys: Vec<UniSeries> = self.branches.iter().map(|b| b.y.clone()).collect();
        let mut e = Echelon::new(&self.field, self.single_dim());
        let mut queue = vec![self.single_vector(&xs), self.single_vector(&ys)];
        while let Some(v) = queue.pop() {
            if v.iter().all(|c| self.field.is_zero(c)) {
                continue;
            }
            if e.insert(v.clone()) {
                queue.push(self.mul_single(&v, &xs));
                queue.push(self.mul_single(&v, &ys));
            }
        }
        e
    }

    /// `δ = dim R̄/R` at this truncation: `rn − dim(K + image of m)`.
    pub fn delta_at(&self) -> usize {
        let mut e = self.ideal_image();
        let mut one = vec![self.field.zero(); self.single_dim()];
        for i in 0..self.r() {
            one[i * self.n] = self.field.one();
        }
        e.insert(one);
        self.single_dim() - e.rank()
    }

    /// Orders `d_i` of `(ẋ_i, ẏ_i)`.
    pub fn d_vector(&self) -> Result<Vec<usize>> {
        self.branches.iter().map(|b| Ok(b.orders()?.d)).collect()
    }

    /// Multiplicities `ordφ_i`.
    pub fn orders(&self) -> Result<Vec<usize>> {
        self.branches.iter().map(|b| Ok(b.orders()?.ord_phi)).collect()
    }

    /// Echelon basis of `m̄·(ẋ, ẏ) + (m ⊕ m)` in the pair space.
    pub fn trivial_span(&self) -> Result<Echelon> {
        let n = self.n;
        let f = &self.field;
        let img = self.ideal_image();
        let mut e = Echelon::new(f, self.pair_dim());
        for row in img.rows() {
            for comp in 0..2 {
                let mut v = vec![f.zero(); self.pair_dim()];
                for i in 0..self.r() {
                    for k in 0..n {
                        v[self.pair_index(i, comp, k)] = row[i * n + k].clone();
                    }
                }
                e.insert(v);
            }
        }
        for (i, b) in self.branches.iter().enumerate() {
            let dx = b.x.derivative();
            let dy = b.y.derivative();
            for k in 1..n {
                let mut v = vec![f.zero(); self.pair_dim()];
                let mut any = false;
                for j in 0..n - k {
                    let cx = dx.coef_checked(j)?;
                    let cy = dy.coef_checked(j)?;
                    any |= !f.is_zero(&cx) || !f.is_zero(&cy);
                    v[self.pair_index(i, 0, j + k)] = cx;
                    v[self.pair_index(i, 1, j + k)] = cy;
                }
                if any {
                    e.insert(v);
                }
            }
        }
        Ok(e)
    }

    /// Representatives `t^{k−d_i+1}(ẋ_i, ẏ_i)`, `0 ≤ k < d_i`, of
    /// `t^{−d+1} R̄·(ẋ, ẏ) / m̄·(ẋ, ẏ)`.
    pub fn normalization_section_vectors(&self) -> Result<Vec<Vec<Elem>>> {
        let n = self.n;
        let f = &self.field;
        let ds = self.d_vector()?;
        let mut out = Vec::new();
        for (i, b) in self.branches.iter().enumerate() {
            let dx = b.x.derivative();
            let dy = b.y.derivative();
            let d = ds[i];
            for k in 0..d {
                let shift = d - 1 - k;
                let mut v = vec![f.zero(); self.pair_dim()];
                for j in 0..n {
                    v[self.pair_index(i, 0, j)] = dx.coef_checked(j + shift)?;
                    v[self.pair_index(i, 1, j)] = dy.coef_checked(j + shift)?;
                }
                out.push(v);
            }
        }
        Ok(out)
    }
}

fn initial_truncation(branches: &[Branch], delta: usize) -> Result<usize> {
    let mut mo = 1;
    for b in branches {
        let o = b.orders()?;
        mo = mo.max(o.ord_phi).max(o.d + 1);
    }
    Ok(2 * delta + mo + 2)
}

fn branch_precision(n: usize, extra: usize) -> usize {
    n + extra + 24
}

/// `δ = dim_K R̄/R` computed from the branches alone (image of `P` in the
/// normalization), certified at two truncations.
pub fn delta_from_branches(branches: &[Branch]) -> Result<usize> {
    let n0 = 8 + branches.iter().map(|b| b.orders().map(|o| o.ord_phi)).sum::<Result<usize>>()?;
    let cap = branches.iter().map(|b| b.precision()).min().unwrap_or(0).saturating_sub(8);
    let (d, _) = linalg::certified_dim(n0, cap.max(n0), |n| Ok(BranchSpace::new(branches, n)?.delta_at()))?;
    Ok(d)
}

/// `dim (m̄^m ⊕ m̄^m) / (m̄·(ẋ,ẏ) + (m ⊕ m))`; `m_i = 1` for all `i`
/// gives `T¹ˢᵉᶜ_{R̄←R}`, `m = 0` the whole of `R̄ ⊕ R̄`.
pub fn t1_m_multiple_param(f: &BiSeries, m: &[usize]) -> Result<usize> {
    let tree = resolution::resolve(f)?;
    let delta = tree.numeric_invariants().delta;
    let probe = tree.branches(16 + 4 * delta)?;
    if m.len() != probe.len() && !m.is_empty() {
        return Err(Error::InvalidInput(format!("{} multiplicities for {} branches", m.len(), probe.len())));
    }
    let n0 = initial_truncation(&probe, delta)?;
    let (dim, _) = linalg::certified_dim(n0, TRUNCATION_CAP, |n| {
        let br = tree.branches(branch_precision(n, 8))?;
        for (i, b) in br.iter().enumerate() {
            let o = b.orders()?.ord_phi;
            if !m.is_empty() && m[i] > o {
                return Err(Error::InvalidInput(format!("m_{i} = {} exceeds the branch multiplicity {o}", m[i])));
            }
        }
        let sp = BranchSpace::new(&br, n)?;
        let w = sp.trivial_span()?;
        let mut u = Vec::new();
        for i in 0..sp.r() {
            let lo = if m.is_empty() { 0 } else { m[i] };
            for comp in 0..2 {
                for k in lo..n {
                    let mut v = vec![sp.field.zero(); sp.pair_dim()];
                    v[sp.pair_index(i, comp, k)] = sp.field.one();
                    u.push(v);
                }
            }
        }
        Ok(quotient_rank(&w, &u))
    })?;
    Ok(dim)
}

/// `dim (span(u) + W) / W` for an already built echelon `W`.
fn quotient_rank(w: &Echelon, u: &[Vec<Elem>]) -> usize {
    let mut e = w.clone();
    let base = e.rank();
    for v in u {
        e.insert(v.clone());
    }
    e.rank() - base
}

// ---------------------------------------------------------------------------
// linear series: coefficients are linear forms in the unknowns

/// A power series whose coefficients are linear forms on the pair space,
/// known modulo `t^prec`.  An empty form is zero.
#[derive(Clone, Debug)]
struct LinSeries {
    c: Vec<Vec<Elem>>,
    prec: usize,
}

fn form_is_zero(f: &Field, v: &[Elem]) -> bool {
    v.iter().all(|x| f.is_zero(x))
}

fn form_axpy(f: &Field, dst: &mut Vec<Elem>, c: &Elem, src: &[Elem]) {
    if src.is_empty() || f.is_zero(c) {
        return;
    }
    if dst.is_empty() {
        *dst = vec![f.zero(); src.len()];
    }
    for (d, s) in dst.iter_mut().zip(src) {
        if !f.is_zero(s) {
            *d = f.add(d, &f.mul(c, s));
        }
    }
}

impl LinSeries {
    fn unknown(sp: &BranchSpace, i: usize, comp: usize, prec: usize) -> LinSeries {
        let f = &sp.field;
        let c = (0..prec.min(sp.n))
            .map(|k| {
                let mut v = vec![f.zero(); sp.pair_dim()];
                v[sp.pair_index(i, comp, k)] = f.one();
                v
            })
            .collect();
        LinSeries { c, prec }
    }

    fn coef(&self, k: usize) -> Result<&[Elem]> {
        if k >= self.prec {
            return Err(Error::InsufficientPrecision(format!("linear coefficient t^{k} beyond precision {}", self.prec)));
        }
        Ok(self.c.get(k).map(|v| v.as_slice()).unwrap_or(&[]))
    }

    fn order_lb(&self, f: &Field) -> usize {
        self.c.iter().position(|v| !form_is_zero(f, v)).unwrap_or(self.prec)
    }

    fn set_zero(&mut self, k: usize) {
        if k < self.c.len() {
            self.c[k].clear();
        }
    }

    fn mul(&self, f: &Field, s: &UniSeries) -> LinSeries {
        let prec = (self.prec.saturating_add(s.order_lb())).min(s.prec().saturating_add(self.order_lb(f)));
        let len = prec.min(self.c.len() + s.coeffs().len());
        let mut c: Vec<Vec<Elem>> = vec![Vec::new(); len];
        for (a, form) in self.c.iter().enumerate() {
            if form.is_empty() {
                continue;
            }
            for (b, y) in s.coeffs().iter().enumerate() {
                if a + b >= len {
                    break;
                }
                form_axpy(f, &mut c[a + b], y, form);
            }
        }
        LinSeries { c, prec }
    }

    fn sub(&self, f: &Field, o: &LinSeries) -> LinSeries {
        let prec = self.prec.min(o.prec);
        let len = prec.min(self.c.len().max(o.c.len()));
        let mut c: Vec<Vec<Elem>> = (0..len).map(|k| self.c.get(k).cloned().unwrap_or_default()).collect();
        let m1 = f.neg(&f.one());
        for (k, form) in o.c.iter().enumerate().take(len) {
            form_axpy(f, &mut c[k], &m1, form);
        }
        LinSeries { c, prec }
    }

    /// Division by a series `s = t^o u`; the first `o` coefficients must
    /// already be zero forms.
    fn div(&self, f: &Field, s: &UniSeries) -> Result<LinSeries> {
        let o = s.order()?.ok_or(Error::DivisionByZero)?;
        if self.c.iter().take(o).any(|v| !form_is_zero(f, v)) {
            return Err(Error::InvalidInput("transported deformation is not divisible by the exceptional equation".into()));
        }
        if self.prec < o {
            return Err(Error::PrecisionUnderflow("linear series shorter than the divisor order".into()));
        }
        let shifted = LinSeries { c: self.c.iter().skip(o).cloned().collect(), prec: self.prec - o };
        let unit = s.shift_down(o)?;
        let inv = unit.invert_unit(shifted.prec.min(unit.prec()))?;
        Ok(shifted.mul(f, &inv))
    }
}

// ---------------------------------------------------------------------------
// the es constraint system

/// Linear constraints cutting out the equisingular deformations of the
/// parametrization inside the truncated pair space.
#[derive(Clone, Debug)]
pub struct EsConstraintSystem {
    pub space: BranchSpace,
    /// Constraint rows (linear functionals on the pair space).  The first
    /// `2r` rows force the constant terms of all `a_i, b_i` to vanish.
    pub rows: Vec<Vec<Elem>>,
    /// Rank of all rows minus the `2r` constant-term rows.
    pub rank: usize,
}

impl EsConstraintSystem {
    /// Whether a pair vector satisfies every constraint.
    pub fn satisfies(&self, v: &[Elem]) -> bool {
        let f = &self.space.field;
        self.rows.iter().all(|row| {
            let s = row.iter().zip(v).fold(f.zero(), |acc, (a, b)| if f.is_zero(a) { acc } else { f.add(&acc, &f.mul(a, b)) });
            f.is_zero(&s)
        })
    }

    /// Basis of the solution space.
    pub fn solutions(&self) -> Vec<Vec<Elem>> {
        linalg::nullspace(&self.space.field, self.space.pair_dim(), self.rows.iter().cloned())
    }

    pub fn solution_dim(&self) -> usize {
        self.space.pair_dim() - self.rank - 2 * self.space.r()
    }
}

/// Assemble the constraint system at truncation `n`.
pub fn es_constraint_system(tree: &ResolutionTree, n: usize) -> Result<EsConstraintSystem> {
    let extra: usize = tree.nodes.iter().filter(|q| q.m >= 2).map(|q| 2 * q.m).sum();
    let prec = branch_precision(n, extra);
    let params = tree.parametrizations(prec)?;
    let root_branches: Vec<Branch> = params[0].values().cloned().collect();
    let space = BranchSpace::new(&root_branches, n)?;
    let f = space.field.clone();
    let mut rows: Vec<Vec<Elem>> = Vec::new();
    for i in 0..space.r() {
        for comp in 0..2 {
            let mut v = vec![f.zero(); space.pair_dim()];
            v[space.pair_index(i, comp, 0)] = f.one();
            rows.push(v);
        }
    }
    let keys: Vec<usize> = params[0].keys().cloned().collect();
    let mut state: BTreeMap<usize, (LinSeries, LinSeries)> = BTreeMap::new();
    for (i, b) in keys.iter().enumerate() {
        state.insert(*b, (LinSeries::unknown(&space, i, 0, prec), LinSeries::unknown(&space, i, 1, prec)));
    }
    let mut stack = vec![(0usize, state)];
    while let Some((id, mut st)) = stack.pop() {
        let node = tree.node(id);
        if node.m < 2 {
            continue;
        }
        for (b, (a_s, b_s)) in st.iter_mut() {
            let o = params[id][b].orders()?.ord_phi;
            for k in 0..o {
                for s in [&mut *a_s, &mut *b_s] {
                    let form = s.coef(k)?;
                    if !form_is_zero(&f, form) {
                        rows.push(form.to_vec());
                    }
                    s.set_zero(k);
                }
            }
        }
        for &cid in &node.children {
            let child = tree.node(cid);
            if child.m < 2 {
                continue;
            }
            let mut cst: BTreeMap<usize, (LinSeries, LinSeries)> = BTreeMap::new();
            for (b, cb) in &params[cid] {
                let pb = &params[id][b];
                let (a_s, b_s) = &st[b];
                let (na, w, div) = match &child.chart {
                    Chart::Beta(beta) => {
                        let yb = cb.y.add(&UniSeries::exact(&f, vec![beta.clone()]));
                        (a_s.clone(), b_s.sub(&f, &a_s.mul(&f, &yb)), &pb.x)
                    }
                    Chart::Infinity => (b_s.clone(), a_s.sub(&f, &b_s.mul(&f, &cb.y)), &pb.y),
                    Chart::Root => return Err(Error::InvalidInput("root chart below the root".into())),
                };
                cst.insert(*b, (na, w.div(&f, div)?));
            }
            // the section through the child is fixed by its first branch
            let first = *cst.keys().next().expect("child carries a branch");
            let beta_eps = cst[&first].1.coef(0)?.to_vec();
            if !beta_eps.is_empty() {
                let m1 = f.neg(&f.one());
                for (_, bs) in cst.values_mut() {
                    if bs.c.is_empty() {
                        bs.c.push(Vec::new());
                    }
                    form_axpy(&f, &mut bs.c[0], &m1, &beta_eps);
                }
            }
            stack.push((cid, cst));
        }
    }
    let rank = linalg::rank(&f, space.pair_dim(), rows.iter().cloned()) - 2 * space.r();
    Ok(EsConstraintSystem { space, rows, rank })
}

/// A basis of `T¹ᵉˢ_{R̄←R}`: equisingular first-order deformations of the
/// parametrization modulo the trivial ones.
#[derive(Clone, Debug)]
pub struct EsBasis {
    pub dim: usize,
    /// Representatives, one pair `(a_i, b_i)` per branch, truncated.
    pub vectors: Vec<Vec<(UniSeries, UniSeries)>>,
    pub truncation: usize,
}

fn es_basis_at(tree: &ResolutionTree, n: usize) -> Result<EsBasis> {
    let sys = es_constraint_system(tree, n)?;
    let w = sys.space.trivial_span()?;
    let mut e = w.clone();
    let mut vectors = Vec::new();
    for v in sys.solutions() {
        if e.insert(v.clone()) {
            vectors.push(sys.space.pairs_of(&v));
        }
    }
    Ok(EsBasis { dim: vectors.len(), vectors, truncation: n })
}

/// `T¹ᵉˢ_{R̄←R}` with representatives, certified at two truncations.
pub fn es_tangent_basis(tree: &ResolutionTree) -> Result<EsBasis> {
    let delta = tree.numeric_invariants().delta;
    let n0 = initial_truncation(&tree.branches(16 + 4 * delta)?, delta)?;
    let (_, n) = linalg::certified_dim(n0, TRUNCATION_CAP, |n| Ok(es_basis_at(tree, n)?.dim))?;
    es_basis_at(tree, n)
}

// ---------------------------------------------------------------------------
// the full ladder

/// Results of every identity checked by [`t1_es_suite`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TangentChecks {
    /// `dim m̄(ẋ,ẏ) + (m⊕m)` lies in the es solution space.
    pub trivial_deformations_are_es: bool,
    /// Rank of the es constraints equals `con_es`.
    pub constraint_count: bool,
    /// `dim T¹ˢᵉᶜ_R = dim T¹ˢᵉᶜ_{R̄←R} + δ + r − 1 + dim Mˢᵉᶜ`.
    pub sec_dimension_identity: bool,
    /// The four-term sequence has vanishing alternating sum when
    /// `T¹ᵉˢ_R` is computed from the equisingularity ideal.
    pub exact_sequence: bool,
    /// In good characteristic `Mˢᵉᶜ = T¹ᵉˢ_{R̄/R} = 0` (vacuous otherwise).
    pub good_characteristic_vanishing: bool,
    /// `dim T¹ˢᵉᶜ_{R̄/R} = |d|`.
    pub sec_over_is_d: bool,
}

impl TangentChecks {
    pub fn all(&self) -> bool {
        self.trivial_deformations_are_es
            && self.constraint_count
            && self.sec_dimension_identity
            && self.exact_sequence
            && self.good_characteristic_vanishing
            && self.sec_over_is_d
    }
}

/// Every first-order dimension attached to a curve germ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EsTangentReport {
    pub dim_t1_r: usize,
    pub dim_t1_sec_r: usize,
    pub sec_basis: Vec<(usize, usize)>,
    /// `T¹ˢᵉᶜ_{R̄←R}`.
    pub dim_t1_sec_norm: usize,
    /// `Mˢᵉᶜ_R`.
    pub dim_msec: usize,
    /// `T¹ˢᵉᶜ_{R̄/R}`.
    pub dim_t1_sec_over: usize,
    /// `T¹ᵉˢ_{R̄←R}`.
    pub dim_t1_es_norm: usize,
    /// `T¹ᵉˢ_R` by exactness.
    pub dim_t1_es_r: usize,
    /// `T¹ᵉˢ_R` from the equisingularity ideal.
    pub dim_t1_es_r_ideal: usize,
    /// `T¹ᵉˢ_{R̄/R}`.
    pub dim_t1_es_over: usize,
    pub delta: usize,
    pub r: usize,
    pub d_vector: Vec<usize>,
    pub con_es: usize,
    pub good_characteristic: bool,
    pub truncation: usize,
    pub checks: TangentChecks,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Ladder {
    sec_norm: usize,
    msec: usize,
    sec_over: usize,
    es_norm: usize,
    es_over: usize,
    es_rank: usize,
    trivial_in_es: bool,
    d: Vec<usize>,
}

fn ladder_at(tree: &ResolutionTree, n: usize) -> Result<Ladder> {
    let sys = es_constraint_system(tree, n)?;
    let sp = &sys.space;
    let w = sp.trivial_span()?;
    let trivial_in_es = w.rows().iter().all(|v| sys.satisfies(v));
    let sec_norm = sp.r() * 2 * (sp.n - 1) - w.rank();
    let es_norm = sys.solution_dim().saturating_sub(w.rank());
    let s = sp.normalization_section_vectors()?;
    let sec_over = s.len();
    let msec = sec_over - quotient_rank(&w, &s);
    // T¹ᵉˢ_{R̄/R}: combinations of the section vectors satisfying the constraints
    let f = &sp.field;
    let images: Vec<Vec<Elem>> = sys
        .rows
        .iter()
        .map(|row| {
            s.iter()
                .map(|v| row.iter().zip(v).fold(f.zero(), |acc, (a, b)| if f.is_zero(a) { acc } else { f.add(&acc, &f.mul(a, b)) }))
                .collect()
        })
        .collect();
    let es_over = sec_over - linalg::rank(f, sec_over, images);
    Ok(Ladder { sec_norm, msec, sec_over, es_norm, es_over, es_rank: sys.rank, trivial_in_es, d: sp.d_vector()? })
}

/// Whether the characteristic is good: zero, or dividing no branch multiplicity.
pub fn is_good_characteristic(tree: &ResolutionTree) -> Result<bool> {
    let p = tree.field.characteristic();
    if p == 0 {
        return Ok(true);
    }
    let br = tree.branches(32)?;
    for b in &br {
        if (b.orders()?.ord_phi as u64).is_multiple_of(p) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Compute the whole first-order ladder of `f` and check the identities
/// relating its terms.
pub fn t1_es_suite(f: &BiSeries) -> Result<EsTangentReport> {
    let tree = resolution::resolve(f)?;
    t1_es_suite_for(&tree)
}

/// [`t1_es_suite`] for an already resolved curve.
pub fn t1_es_suite_for(tree: &ResolutionTree) -> Result<EsTangentReport> {
    let f = &tree.equation;
    let inv = tree.numeric_invariants();
    let delta = inv.delta;
    let r = inv.r;
    let (con_es, _) = strata::condition_counts(tree);
    let n0 = initial_truncation(&tree.branches(16 + 4 * delta)?, delta)?;
    let mut n = n0;
    let ladder = loop {
        let a = ladder_at(tree, n)?;
        let b = ladder_at(tree, n + 8)?;
        if a == b {
            break a;
        }
        if 2 * n > TRUNCATION_CAP {
            return Err(Error::UnstableTruncation(format!("tangent ladder {a:?} at {n} differs at {}", n + 8)));
        }
        n *= 2;
    };
    let sec = t1_sec_R(f)?;
    let t1 = t1_R(f)?;
    let ideal = es_ideal_for(tree)?;
    let good = is_good_characteristic(tree)?;
    let es_r = (ladder.es_norm + ladder.msec).checked_sub(ladder.es_over).ok_or_else(|| {
        Error::UnstableTruncation(format!(
            "negative T1es_R: norm {} + msec {} < over {}",
            ladder.es_norm, ladder.msec, ladder.es_over
        ))
    })?;
    let checks = TangentChecks {
        trivial_deformations_are_es: ladder.trivial_in_es,
        constraint_count: ladder.es_rank == con_es,
        sec_dimension_identity: sec.dim == ladder.sec_norm + delta + r - 1 + ladder.msec,
        exact_sequence: ladder.msec + ladder.es_norm == ladder.es_over + ideal.dim,
        good_characteristic_vanishing: !good || (ladder.msec == 0 && ladder.es_over == 0),
        sec_over_is_d: ladder.sec_over == ladder.d.iter().sum::<usize>(),
    };
    Ok(EsTangentReport {
        dim_t1_r: t1,
        dim_t1_sec_r: sec.dim,
        sec_basis: sec.basis,
        dim_t1_sec_norm: ladder.sec_norm,
        dim_msec: ladder.msec,
        dim_t1_sec_over: ladder.sec_over,
        dim_t1_es_norm: ladder.es_norm,
        dim_t1_es_r: es_r,
        dim_t1_es_r_ideal: ideal.dim,
        dim_t1_es_over: ladder.es_over,
        delta,
        r,
        d_vector: ladder.d,
        con_es,
        good_characteristic: good,
        truncation: n,
        checks,
    })
}

// ---------------------------------------------------------------------------
// the equisingularity ideal

/// The equisingularity ideal modulo a power of the maximal ideal.
#[derive(Clone, Debug)]
pub struct EsIdeal {
    /// `f, f_x, f_y` followed by representatives of `I^es / Tjurina`.
    pub generators: Vec<BiSeries>,
    /// `dim I^es / <f, f_x, f_y>`.
    pub dim: usize,
    /// Generators are reduced modulo `<x, y>^degree_bound`.
    pub degree_bound: usize,
}

/// `I^es`, computed as `<f_x, f_y>` plus the preimage in `P` of the image of
/// the es solution space under `(a, b) ↦ a f_x + b f_y`.
pub fn es_ideal(f: &BiSeries) -> Result<EsIdeal> {
    es_ideal_for(&resolution::resolve(f)?)
}

fn es_ideal_for(tree: &ResolutionTree) -> Result<EsIdeal> {
    let delta = tree.numeric_invariants().delta;
    let f = &tree.equation;
    let gens = localalg::tjurina_with_section_generators(f);
    let q = localalg::quotient_dim(&gens, None)?;
    let bound = q.basis.iter().map(|m| m.0 + m.1).max().unwrap_or(0) + 1;
    let n0 = initial_truncation(&tree.branches(16 + 4 * delta)?, delta)?;
    let (_, n) = linalg::certified_dim(n0, TRUNCATION_CAP, |n| Ok(es_ideal_at(tree, &gens, q.dim, bound, n)?.dim))?;
    es_ideal_at(tree, &gens, q.dim, bound, n)
}

fn es_ideal_at(tree: &ResolutionTree, gens: &[BiSeries], colength: usize, bound: usize, n: usize) -> Result<EsIdeal> {
    let f = &tree.equation;
    let k = tree.field.clone();
    let sys = es_constraint_system(tree, n)?;
    let sp = &sys.space;
    // images of f_x, f_y along the branches
    let fx = f.derivative_x();
    let fy = f.derivative_y();
    let mut grad = Vec::new();
    for b in &sp.branches {
        let gx = series::substitute(&fx, b)?;
        let gy = series::substitute(&fy, b)?;
        if gx.prec() < n || gy.prec() < n {
            return Err(Error::InsufficientPrecision("gradient along the branch".into()));
        }
        grad.push((gx, gy));
    }
    let mut img = Echelon::new(&k, sp.single_dim());
    for v in sys.solutions() {
        let mut out = vec![k.zero(); sp.single_dim()];
        for (idx, c) in v.iter().enumerate() {
            if k.is_zero(c) {
                continue;
            }
            let (blk, kk) = (idx / sp.n, idx % sp.n);
            let (i, comp) = (blk / 2, blk % 2);
            let g = if comp == 0 { &grad[i].0 } else { &grad[i].1 };
            for j in 0..sp.n - kk {
                let gj = g.coef(j);
                if !k.is_zero(&gj) {
                    let o = &mut out[i * sp.n + kk + j];
                    *o = k.add(o, &k.mul(c, &gj));
                }
            }
        }
        img.insert(out);
    }
    // monomials of degree < bound, reduced modulo the image
    let monos = localalg::monomials_below(bound);
    let ncols_m = bound * (bound + 1) / 2;
    let total = sp.single_dim() + ncols_m;
    let mut aug = Echelon::new(&k, total);
    let mut xp: Vec<Vec<UniSeries>> = Vec::new();
    let mut yp: Vec<Vec<UniSeries>> = Vec::new();
    for b in &sp.branches {
        let mut xs = vec![UniSeries::one(&k)];
        let mut ys = vec![UniSeries::one(&k)];
        for _ in 1..bound {
            let nx = xs.last().unwrap().mul(&b.x).truncate(sp.n);
            xs.push(nx);
            let ny = ys.last().unwrap().mul(&b.y).truncate(sp.n);
            ys.push(ny);
        }
        xp.push(xs);
        yp.push(ys);
    }
    for &(a, b) in &monos {
        if a + b == 0 {
            continue;
        }
        let vals: Vec<UniSeries> = (0..sp.r()).map(|i| xp[i][a].mul(&yp[i][b]).truncate(sp.n)).collect();
        let mut v = sp.single_vector(&vals);
        img.reduce(&mut v);
        v.resize(total, k.zero());
        v[sp.single_dim() + localalg::monomial_index((a, b))] = k.one();
        aug.insert(v);
    }
    let kernel: Vec<Vec<Elem>> =
        aug.rows().iter().zip(aug.pivots()).filter(|(_, &p)| p >= sp.single_dim()).map(|(r, _)| r[sp.single_dim()..].to_vec()).collect();
    // compare with <f> + m<f_x, f_y>, which contains <x, y>^bound
    let mut sec = localalg::ideal_echelon(gens, bound);
    let sec_rank = sec.rank();
    let mut generators = vec![f.clone(), f.derivative_x(), f.derivative_y()];
    for v in &kernel {
        if sec.insert(v.clone()) {
            let terms: Vec<((usize, usize), Elem)> = monos
                .iter()
                .filter(|m| !k.is_zero(&v[localalg::monomial_index(**m)]))
                .map(|m| (*m, v[localalg::monomial_index(*m)].clone()))
                .collect();
            generators.push(BiSeries::new(&k, terms, bound));
        }
    }
    if sec_rank != ncols_m - colength {
        return Err(Error::InvalidInput("truncated section ideal has the wrong colength".into()));
    }
    // I^es_fix / (<f> + m J') has the same dimension as I^es / Tjurina
    let dim = kernel.len().checked_sub(sec_rank).ok_or_else(|| {
        Error::UnstableTruncation("equisingularity ideal smaller than the section Tjurina ideal".into())
    })?;
    Ok(EsIdeal { generators, dim, degree_bound: bound })
}
