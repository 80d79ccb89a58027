//! Embedded resolution of plane curve germs by point blow-ups.
//!
//! Local conventions: at every infinitely near point other than the root the
//! local coordinates `(x, y)` are chosen so that the exceptional curve created
//! last is `E = {x = 0}` and, at satellite points, the older exceptional
//! curve is `D = {y = 0}`.  Children are created by two charts:
//!
//! * `Beta(b)`:  parent `(X, Y) = (x, x (y + b))`;
//! * `Infinity`: parent `(X, Y) = (x y, x)`.
//!
//! Equations of strict transforms stay exact polynomials, so the tree is
//! computed without truncation; only branch parametrizations are series.

use std::collections::BTreeMap;

use num_integer::Integer;
use serde_json::{json, Value};

use crate::coeffield::{make_field, Elem, Embedding, Field};
use crate::error::{Error, Result};
use crate::localalg;
use crate::series::{self, BiSeries, Branch, UniSeries, EXACT};
use crate::upoly::{self, UPoly};

/// Default bound on the extension degree used to split tangent cones.
pub const DEFAULT_MAX_EXTENSION: u32 = 16;

/// How an infinitely near point was reached from its parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Chart {
    Root,
    Beta(Elem),
    Infinity,
}

impl Chart {
    pub fn describe(&self, field: &Field) -> String {
        match self {
            Chart::Root => "root".into(),
            Chart::Beta(b) => field.format(b),
            Chart::Infinity => "inf".into(),
        }
    }
}

/// Position of a point with respect to the exceptional configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Root,
    Free,
    Satellite,
}

impl PointKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointKind::Root => "root",
            PointKind::Free => "free",
            PointKind::Satellite => "satellite",
        }
    }

    /// The root counts as a free point.
    pub fn is_free(&self) -> bool {
        !matches!(self, PointKind::Satellite)
    }
}

/// One infinitely near point on the curve.
#[derive(Clone, Debug)]
pub struct ResNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub chart: Chart,
    pub depth: usize,
    /// Multiplicity of the strict transform.
    pub m: usize,
    /// Branches through the point (`Λ_Q`).
    pub branches: Vec<usize>,
    pub kind: PointKind,
    pub essential: bool,
    pub has_e: bool,
    pub has_d: bool,
    /// Number of points on the curve infinitely near to this one and lying
    /// on `E` (resp. `D`); `1` when the curve does not exist.
    pub e: usize,
    pub d: usize,
    /// Local equation of the strict transform.
    pub strict: BiSeries,
    pub children: Vec<usize>,
}

impl ResNode {
    /// Whether the strict transform is singular here.
    pub fn strict_singular(&self) -> bool {
        self.m >= 2
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Tree of infinitely near points down to an embedded good resolution.
#[derive(Clone, Debug)]
pub struct ResolutionTree {
    /// Coefficient field (possibly extended while splitting tangent cones).
    pub field: Field,
    /// The input equation read in [`ResolutionTree::field`].
    pub equation: BiSeries,
    pub nodes: Vec<ResNode>,
    /// Number of branches.
    pub r: usize,
}

/// Resolution options.
#[derive(Clone, Debug)]
pub struct ResolveOptions {
    pub max_ext: u32,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions { max_ext: DEFAULT_MAX_EXTENSION }
    }
}

// ---------------------------------------------------------------------------
// blow-ups

/// Result of blowing up an equation.
#[derive(Clone, Debug)]
pub struct Blowup {
    pub strict: BiSeries,
    pub reduced_total: BiSeries,
    pub exceptional: BiSeries,
}

fn binomial_expansions(k: &Field, beta: &Elem, upto: usize) -> Vec<UPoly> {
    // (y + beta)^j for j = 0..=upto, low degree first
    let lin = vec![beta.clone(), k.one()];
    let mut out = vec![vec![k.one()]];
    for _ in 0..upto {
        let next = upoly::mul(k, out.last().unwrap(), &lin);
        out.push(next);
    }
    out
}

/// Strict transform `x^{-m} g(x, x(y+b))` or `x^{-m} g(xy, x)`, together with
/// the exceptional curve `x` and the reduced total transform `x * strict`.
pub fn blowup_equation(g: &BiSeries, chart: &Chart) -> Result<Blowup> {
    let k = g.field.clone();
    let m = g.order()?.ok_or_else(|| Error::InvalidInput("cannot blow up the zero series".into()))?;
    let prec = if g.is_exact() { EXACT } else { g.prec() - m };
    if prec == 0 {
        return Err(Error::PrecisionUnderflow("nothing of the strict transform is known".into()));
    }
    let mut terms: Vec<((usize, usize), Elem)> = Vec::new();
    match chart {
        Chart::Root => return Err(Error::InvalidInput("the root is not a blow-up chart".into())),
        Chart::Beta(b) => {
            let pw = binomial_expansions(&k, b, g.y_degree().unwrap_or(0));
            for ((i, j), c) in g.terms() {
                for (l, bc) in pw[*j].iter().enumerate() {
                    if !k.is_zero(bc) {
                        terms.push(((i + j - m, l), k.mul(c, bc)));
                    }
                }
            }
        }
        Chart::Infinity => {
            for ((i, j), c) in g.terms() {
                terms.push(((i + j - m, *i), c.clone()));
            }
        }
    }
    let strict = BiSeries::new(&k, terms, prec);
    let exceptional = BiSeries::x(&k);
    let reduced_total = strict.mul(&exceptional);
    Ok(Blowup { strict, reduced_total, exceptional })
}

/// Transform of a parametrization through the chart.
pub fn blowup_branch(b: &Branch, chart: &Chart) -> Result<Branch> {
    let k = b.field().clone();
    let ox = b.x.order()?;
    let oy = b.y.order()?;
    match chart {
        Chart::Root => Err(Error::InvalidInput("the root is not a blow-up chart".into())),
        Chart::Beta(beta) => {
            let ox = ox.ok_or(Error::WrongDirection)?;
            if oy.is_some_and(|o| o < ox) {
                return Err(Error::WrongDirection);
            }
            let n = b.precision().saturating_sub(ox);
            if n == 0 {
                return Err(Error::PrecisionUnderflow("branch precision below its order".into()));
            }
            let q = if b.y.is_exact() && b.y.coeffs().is_empty() {
                UniSeries::new(&k, Vec::new(), n)
            } else {
                b.y.div(&b.x, n)?
            };
            if q.coef(0) != *beta {
                return Err(Error::WrongDirection);
            }
            let y = q.sub(&UniSeries::exact(&k, vec![beta.clone()])).truncate(n);
            Ok(Branch::new(b.x.truncate(b.precision()), y))
        }
        Chart::Infinity => {
            let oy = oy.ok_or(Error::WrongDirection)?;
            if ox.is_some_and(|o| o <= oy) {
                return Err(Error::WrongDirection);
            }
            let n = b.precision().saturating_sub(oy);
            if n == 0 {
                return Err(Error::PrecisionUnderflow("branch precision below its order".into()));
            }
            let q = if b.x.is_exact() && b.x.coeffs().is_empty() {
                UniSeries::new(&k, Vec::new(), n)
            } else {
                b.x.div(&b.y, n)?
            };
            Ok(Branch::new(b.y.truncate(b.precision()), q))
        }
    }
}

/// Inverse of [`blowup_branch`]: the parent parametrization.
pub fn pull_back_branch(b: &Branch, chart: &Chart) -> Branch {
    let k = b.field().clone();
    match chart {
        Chart::Root => b.clone(),
        Chart::Beta(beta) => {
            let yb = b.y.add(&UniSeries::exact(&k, vec![beta.clone()]));
            Branch::new(b.x.clone(), b.x.mul(&yb))
        }
        Chart::Infinity => Branch::new(b.x.mul(&b.y), b.x.clone()),
    }
}

// ---------------------------------------------------------------------------
// tangent directions

/// Tangent directions of a germ: rational slopes `y = b x` with their
/// multiplicities, the multiplicity of the direction `x = 0`, and the
/// degrees of irreducible non-linear factors of the tangent cone.
#[derive(Clone, Debug)]
pub struct Directions {
    pub m: usize,
    pub finite: Vec<(Elem, usize)>,
    pub infinity: usize,
    pub irrational: Vec<usize>,
}

/// Tangent cone `L(1, t)` as a polynomial in `t` (low degree first).
fn dehomogenized_cone(m: usize, lf: &[Elem], k: &Field) -> UPoly {
    // L = sum c_i x^i y^{m-i}; L(1,t) = sum c_i t^{m-i}
    let mut u: UPoly = (0..=m).map(|t| lf[m - t].clone()).collect();
    upoly::trim(k, &mut u);
    u
}

pub fn tangent_directions(g: &BiSeries) -> Result<Directions> {
    let k = g.field.clone();
    let (m, lf) = g.leading_form()?;
    let infinity = lf.iter().position(|c| !k.is_zero(c)).unwrap_or(0);
    let u = dehomogenized_cone(m, &lf, &k);
    let (roots, irrational) = upoly::roots_and_factor_degrees(&k, &u)?;
    let finite = roots.iter().map(|r| (r.clone(), upoly::root_multiplicity(&k, &u, r))).collect();
    Ok(Directions { m, finite, infinity, irrational })
}

// ---------------------------------------------------------------------------
// tree construction

enum Build {
    Extend(u32),
    Fail(Error),
}

impl From<Error> for Build {
    fn from(e: Error) -> Self {
        Build::Fail(e)
    }
}

struct Builder {
    field: Field,
    nodes: Vec<ResNode>,
    depth_limit: usize,
    term_limit: usize,
}

impl Builder {
    fn add(&mut self, parent: Option<usize>, chart: Chart, strict: BiSeries, has_d: bool) -> std::result::Result<usize, Build> {
        let id = self.nodes.len();
        let depth = parent.map(|p| self.nodes[p].depth + 1).unwrap_or(0);
        if depth > self.depth_limit || strict.num_terms() > self.term_limit {
            return Err(Build::Fail(Error::NotReduced(format!(
                "resolution does not terminate within {} blow-ups",
                self.depth_limit
            ))));
        }
        let m = strict.order()?.ok_or_else(|| Error::NotReduced("strict transform vanishes identically".into()))?;
        let is_root = parent.is_none();
        if is_root && m == 0 {
            return Err(Build::Fail(Error::InvalidInput("the curve does not pass through the origin".into())));
        }
        let kind = if is_root {
            PointKind::Root
        } else if has_d {
            PointKind::Satellite
        } else {
            PointKind::Free
        };
        let essential = if is_root {
            m >= 2
        } else {
            m >= 2 || has_d || (m == 1 && self.field.is_zero(&strict.coef(0, 1)))
        };
        self.nodes.push(ResNode {
            id,
            parent,
            chart,
            depth,
            m,
            branches: Vec::new(),
            kind,
            essential,
            has_e: !is_root,
            has_d,
            e: 1,
            d: 1,
            strict,
            children: Vec::new(),
        });
        if essential {
            let g = self.nodes[id].strict.clone();
            let dirs = tangent_directions(&g)?;
            if !dirs.irrational.is_empty() {
                if !self.field.is_finite() {
                    return Err(Build::Fail(Error::IrrationalTangent(format!(
                        "tangent cone of {} has an irreducible factor of degree {} over Q",
                        g, dirs.irrational[0]
                    ))));
                }
                let l = dirs.irrational.iter().fold(1usize, |a, b| a.lcm(b));
                return Err(Build::Extend(l as u32));
            }
            for (beta, _) in &dirs.finite {
                let chart = Chart::Beta(beta.clone());
                let b = blowup_equation(&g, &chart)?;
                let child_d = has_d && self.field.is_zero(beta);
                let c = self.add(Some(id), chart, b.strict, child_d)?;
                self.nodes[id].children.push(c);
            }
            if dirs.infinity > 0 {
                let b = blowup_equation(&g, &Chart::Infinity)?;
                let c = self.add(Some(id), Chart::Infinity, b.strict, !is_root)?;
                self.nodes[id].children.push(c);
            }
        }
        Ok(id)
    }
}

fn build(f: &BiSeries) -> std::result::Result<ResolutionTree, Build> {
    let n = f.total_degree().unwrap_or(1).max(1);
    let mut b = Builder { field: f.field.clone(), nodes: Vec::new(), depth_limit: 4 * n * n + 16, term_limit: 40 * n * n + 400 };
    b.add(None, Chart::Root, f.clone(), false)?;
    let mut nodes = b.nodes;
    // branch ids: leaves in preorder
    let mut r = 0;
    for node in nodes.iter_mut() {
        if node.children.is_empty() {
            node.branches = vec![r];
            r += 1;
        }
    }
    for id in (0..nodes.len()).rev() {
        if !nodes[id].children.is_empty() {
            let mut br: Vec<usize> = nodes[id].children.iter().flat_map(|&c| nodes[c].branches.clone()).collect();
            br.sort();
            nodes[id].branches = br;
        }
    }
    // e and d: lengths of the chains of points on E and D
    let zero = f.field.zero();
    let child_with = |nodes: &[ResNode], id: usize, chart: &Chart| nodes[id].children.iter().copied().find(|&c| nodes[c].chart == *chart);
    for id in 0..nodes.len() {
        if nodes[id].has_e {
            let mut e = 1;
            let mut cur = child_with(&nodes, id, &Chart::Infinity);
            while let Some(c) = cur {
                e += 1;
                cur = child_with(&nodes, c, &Chart::Beta(zero.clone()));
            }
            nodes[id].e = e;
        }
        if nodes[id].has_d {
            let mut d = 1;
            let mut cur = child_with(&nodes, id, &Chart::Beta(zero.clone()));
            while let Some(c) = cur {
                d += 1;
                cur = child_with(&nodes, c, &Chart::Beta(zero.clone()));
            }
            nodes[id].d = d;
        }
    }
    Ok(ResolutionTree { field: f.field.clone(), equation: f.clone(), nodes, r })
}

/// Resolve the germ of `f` at the origin.
pub fn resolve(f: &BiSeries) -> Result<ResolutionTree> {
    resolve_with(f, &ResolveOptions::default())
}

/// Resolve with explicit options; the field is extended whenever a tangent
/// cone does not split, and the construction restarts over the larger field.
pub fn resolve_with(f: &BiSeries, opts: &ResolveOptions) -> Result<ResolutionTree> {
    if !f.is_exact() {
        return Err(Error::NonPolynomialInput("resolution needs an exact polynomial".into()));
    }
    let base = f.field.clone();
    let mut cur = f.clone();
    loop {
        match build(&cur) {
            Ok(t) => return Ok(t),
            Err(Build::Fail(e)) => return Err(e),
            Err(Build::Extend(l)) => {
                let k = cur.field.degree() * l;
                if k > opts.max_ext {
                    return Err(Error::FieldExtensionLimit(format!(
                        "splitting the tangent cones needs degree {k} over F_{}, limit {}",
                        base.characteristic(),
                        opts.max_ext
                    )));
                }
                let big = make_field(base.characteristic(), k).map_err(|e| Error::FieldExtensionLimit(e.to_string()))?;
                let emb = Embedding::new(&base, &big)?;
                cur = f.map_field(&big, |c| emb.map(c));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// tree queries

/// Numeric resolution invariants (sums over essential points).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumericInvariants {
    pub delta: usize,
    pub mult_sequence: Vec<usize>,
    pub ef: usize,
    pub sum_m: usize,
    pub sum_m_m_plus_1_half: usize,
    pub r: usize,
    pub essential_points: usize,
}

impl ResolutionTree {
    pub fn root(&self) -> &ResNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &ResNode {
        &self.nodes[id]
    }

    /// Essential points in preorder.
    pub fn essential(&self) -> impl Iterator<Item = &ResNode> {
        self.nodes.iter().filter(|n| n.essential)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ResNode> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }

    /// Number of essential free points (the root counts as free).
    pub fn ef(&self) -> usize {
        self.essential().filter(|n| n.kind.is_free()).count()
    }

    /// Parametrizations of every branch at every node (local coordinates of
    /// the node), known at least modulo `t^prec`.  Entry `[id][b]` exists for
    /// `b` in `Λ_Q`.
    pub fn parametrizations(&self, prec: usize) -> Result<Vec<BTreeMap<usize, Branch>>> {
        let mut out: Vec<BTreeMap<usize, Branch>> = vec![BTreeMap::new(); self.nodes.len()];
        for leaf in self.leaves() {
            let b = leaf.branches[0];
            let mut br = leaf_parametrization(&leaf.strict, prec)?;
            let mut id = leaf.id;
            loop {
                out[id].insert(b, br.truncate(prec));
                let n = &self.nodes[id];
                match n.parent {
                    None => break,
                    Some(p) => {
                        br = pull_back_branch(&br, &n.chart);
                        id = p;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Primitive parametrizations of the branches at the root.
    pub fn branches(&self, prec: usize) -> Result<Vec<Branch>> {
        let p = self.parametrizations(prec)?;
        Ok(p[0].values().cloned().collect())
    }

    pub fn numeric_invariants(&self) -> NumericInvariants {
        numeric_invariants(self)
    }

    /// JSON rendering with one record per node.
    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .map(|n| {
                json!({
                    "id": n.id,
                    "parent": n.parent,
                    "chart": n.chart.describe(&self.field),
                    "m": n.m,
                    "kind": n.kind.as_str(),
                    "essential": n.essential,
                    "e": n.e,
                    "d": n.d,
                    "branches": n.branches,
                    "strict": n.strict.to_string(),
                })
            })
            .collect();
        json!({ "field": self.field.name(), "r": self.r, "nodes": nodes })
    }
}

/// Solve a smooth germ: `(t, s(t))` if `g_y(0) != 0`, else `(s(t), t)`.
pub fn leaf_parametrization(g: &BiSeries, prec: usize) -> Result<Branch> {
    let k = g.field.clone();
    let swap = k.is_zero(&g.coef(0, 1));
    if swap && k.is_zero(&g.coef(1, 0)) {
        return Err(Error::InvalidInput("germ is not smooth".into()));
    }
    if !k.is_zero(&g.coef(0, 0)) {
        return Err(Error::InvalidInput("germ does not pass through the origin".into()));
    }
    // h(t, s) with h_s(0,0) != 0
    let h = if swap {
        BiSeries::new(&k, g.terms().map(|((i, j), c)| ((*j, *i), c.clone())).collect::<Vec<_>>(), g.prec())
    } else {
        g.clone()
    };
    let hs = h.derivative_y();
    let mut s = UniSeries::new(&k, Vec::new(), 1);
    let mut n = 1;
    while n < prec {
        n = (2 * n).min(prec);
        let t = UniSeries::new(&k, vec![k.zero(), k.one()], n);
        let sp = UniSeries::new(&k, s.coeffs().to_vec(), n);
        let br = Branch::new(t.clone(), sp.clone());
        let val = substitute_smooth(&h, &br, n)?;
        let der = substitute_smooth(&hs, &br, n)?;
        let corr = val.mul(&der.invert_unit(n)?).truncate(n);
        s = sp.sub(&corr).truncate(n);
    }
    let t = UniSeries::new(&k, vec![k.zero(), k.one()], prec);
    let s = s.truncate(prec);
    Ok(if swap { Branch::new(s, t) } else { Branch::new(t, s) })
}

/// `h(t, s(t))` where `s` may vanish identically.
fn substitute_smooth(h: &BiSeries, br: &Branch, n: usize) -> Result<UniSeries> {
    let k = h.field.clone();
    let mut acc = UniSeries::new(&k, Vec::new(), n);
    let mut ypow = vec![UniSeries::new(&k, vec![k.one()], n)];
    for _ in 0..h.y_degree().unwrap_or(0) {
        let nx = ypow.last().unwrap().mul_to(&br.y, n);
        ypow.push(nx);
    }
    for ((i, j), c) in h.terms() {
        if *i >= n {
            continue;
        }
        acc = acc.add(&ypow[*j].shift_up(*i).scale(c).truncate(n));
    }
    Ok(acc.truncate(n))
}

/// Primitive parametrizations of the branches of `f`.
pub fn branches_of(f: &BiSeries, prec: usize) -> Result<Vec<Branch>> {
    resolve(f)?.branches(prec)
}

pub fn numeric_invariants(tree: &ResolutionTree) -> NumericInvariants {
    let ms: Vec<usize> = tree.essential().map(|n| n.m).collect();
    NumericInvariants {
        delta: ms.iter().map(|m| m * (m - 1) / 2).sum(),
        sum_m: ms.iter().sum(),
        sum_m_m_plus_1_half: ms.iter().map(|m| m * (m + 1) / 2).sum(),
        ef: tree.ef(),
        r: tree.r,
        essential_points: ms.len(),
        mult_sequence: ms,
    }
}

/// Intersection multiplicity `dim K[[x,y]]/<f,g>` computed along the
/// branches of `g`; `None` when they share a component.
pub fn intersection_mult(f: &BiSeries, g: &BiSeries) -> Result<Option<usize>> {
    let tree = resolve(g)?;
    let k = tree.field.clone();
    let emb = Embedding::new(&f.field, &k)?;
    let fk = f.map_field(&k, |c| emb.map(c));
    let mut prec = series::DEFAULT_PRECISION;
    loop {
        let brs = tree.branches(prec)?;
        let mut total = 0;
        let mut unresolved = false;
        for b in &brs {
            let v = series::substitute(&fk, b)?;
            match v.order() {
                Ok(Some(o)) => total += o,
                Ok(None) => return Ok(None),
                Err(_) => unresolved = true,
            }
        }
        if !unresolved {
            return Ok(Some(total));
        }
        if prec >= series::PRECISION_CAP {
            return Ok(None);
        }
        prec *= 2;
    }
}

// ---------------------------------------------------------------------------
// tangential components

/// Factor a germ into tangential components: one factor per rational
/// tangent direction, plus one factor for all non-rational directions.
/// Factors are correct up to total degree `n` (exact inputs).
pub fn tangential_split(g: &BiSeries, n: usize) -> Result<Vec<BiSeries>> {
    let k = g.field.clone();
    let dirs = tangent_directions(g)?;
    let (m, lf) = g.leading_form()?;
    let mut init: Vec<BiSeries> = Vec::new();
    let mut prod = BiSeries::one(&k);
    for (b, mult) in &dirs.finite {
        // (y - b x)^mult
        let lin = BiSeries::y(&k).sub(&BiSeries::x(&k).scale(b));
        let p = lin.pow(*mult, EXACT);
        prod = prod.mul(&p);
        init.push(p);
    }
    if dirs.infinity > 0 {
        let p = BiSeries::x(&k).pow(dirs.infinity, EXACT);
        prod = prod.mul(&p);
        init.push(p);
    }
    let cone = BiSeries::new(&k, lf.iter().enumerate().map(|(i, c)| ((i, m - i), c.clone())).collect::<Vec<_>>(), EXACT);
    let rest = cone.div_exact(&prod)?;
    if rest.order()? == Some(0) {
        // constant: fold into the first factor
        let c = rest.coef(0, 0);
        init[0] = init[0].scale(&c);
    } else {
        init.push(rest);
    }
    if init.len() == 1 {
        return Ok(vec![g.truncate(n)]);
    }
    series::hensel_factor(g, &init, n)
}

// ---------------------------------------------------------------------------
// Newton polygons and equipolygonal data

/// Lower-left Newton polygon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// Vertices from the `j`-axis to the `i`-axis.
    pub vertices: Vec<(usize, usize)>,
    /// `(start, end, (a, b))`: the segment lies on `a i + b j = c`.
    pub segments: Vec<((usize, usize), (usize, usize), (usize, usize))>,
}

impl NewtonPolygon {
    /// Whether the lattice point lies in the Newton region `N + R_{>=0}^2`.
    pub fn contains(&self, p: (usize, usize)) -> bool {
        if self.vertices.len() == 1 {
            let v = self.vertices[0];
            return p.0 >= v.0 && p.1 >= v.1;
        }
        let first = self.vertices[0];
        let last = *self.vertices.last().unwrap();
        if p.0 < first.0 || p.1 < last.1 {
            return false;
        }
        self.segments.iter().all(|(s, _, (a, b))| a * p.0 + b * p.1 >= a * s.0 + b * s.1)
    }

    /// Lattice points outside the Newton region (finite when both axes are met).
    pub fn points_below(&self) -> Vec<(usize, usize)> {
        let first = self.vertices[0];
        let last = *self.vertices.last().unwrap();
        let mut out = Vec::new();
        for i in 0..=last.0 {
            for j in 0..=first.1 {
                if !self.contains((i, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Newton polygon of the support of `g` (exponent `i` of `x`, `j` of `y`).
pub fn newton_polygon_of(g: &BiSeries) -> Result<NewtonPolygon> {
    if g.is_zero() {
        return Err(Error::InvalidInput("Newton polygon of zero".into()));
    }
    // minimal j per i
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for ((i, j), _) in g.terms() {
        let e = best.entry(*i).or_insert(*j);
        *e = (*e).min(*j);
    }
    let mut pts: Vec<(usize, usize)> = Vec::new();
    let mut min_j = usize::MAX;
    for (i, j) in best {
        if j < min_j {
            pts.push((i, j));
            min_j = j;
        }
    }
    // lower convex hull (points sorted by i, j strictly decreasing)
    let mut hull: Vec<(usize, usize)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // keep b if it lies strictly below segment a-p
            let cross = (b.0 as i64 - a.0 as i64) * (p.1 as i64 - a.1 as i64) - (b.1 as i64 - a.1 as i64) * (p.0 as i64 - a.0 as i64);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut segments = Vec::new();
    for w in hull.windows(2) {
        let (s, e) = (w[0], w[1]);
        let di = e.0 - s.0;
        let dj = s.1 - e.1;
        let g = di.gcd(&dj);
        segments.push((s, e, (dj / g, di / g)));
    }
    Ok(NewtonPolygon { vertices: hull, segments })
}

/// Strict transform of node `id` in generic adapted coordinates, possibly
/// over an extension of the tree field (returned alongside).
pub fn generic_adapted_equation(tree: &ResolutionTree, id: usize) -> Result<(BiSeries, Field)> {
    let node = &tree.nodes[id];
    let g = node.strict.clone();
    // the root has no exceptional curves: its own coordinates are adapted
    // and are kept as given; satellite points have both axes fixed by E, D
    if node.kind != PointKind::Free {
        return Ok((g, tree.field.clone()));
    }
    let k0 = tree.field.clone();
    let (m, lf) = g.leading_form()?;
    // try the current field, then extensions large enough to avoid all roots
    let mut k = k0.clone();
    let mut g = g;
    loop {
        let lfk: Vec<Elem> = lf.to_vec();
        let lfk = if k == k0 {
            lfk
        } else {
            let emb = Embedding::new(&k0, &k)?;
            lfk.iter().map(|c| emb.map(c)).collect()
        };
        let cone = |a: &Elem, b: &Elem| -> Elem {
            // L(a, b) = sum c_i a^i b^{m-i}
            let mut acc = k.zero();
            for (i, c) in lfk.iter().enumerate() {
                acc = k.add(&acc, &k.mul(c, &k.mul(&k.pow(a, i as u64), &k.pow(b, (m - i) as u64))));
            }
            acc
        };
        let cands: Vec<Elem> = match k.elements() {
            Some(it) => it.take(4096).collect(),
            None => (0..64).map(|n| k.from_i64(if n % 2 == 0 { n / 2 } else { -(n + 1) / 2 })).collect(),
        };
        let one = k.one();
        {
            // free point: keep u = x, v = y + b x with L(1, b) != 0
            for b in &cands {
                if !k.is_zero(&cone(&one, b)) {
                    return Ok((g.shear(b), k));
                }
            }
        }
        if !k.is_finite() {
            return Err(Error::InvalidInput("no generic coordinates found".into()));
        }
        let p = k.characteristic();
        let mut deg = k.degree() + 1;
        while p.pow(deg) <= (m as u64) + 2 {
            deg += 1;
        }
        // smallest multiple of the base degree
        let base = k0.degree();
        let deg = deg.div_ceil(base) * base;
        if deg > DEFAULT_MAX_EXTENSION {
            return Err(Error::FieldExtensionLimit("no generic adapted coordinates".into()));
        }
        let big = make_field(p, deg)?;
        let emb = Embedding::new(&k0, &big)?;
        g = node.strict.map_field(&big, |c| emb.map(c));
        k = big;
    }
}

/// Newton polygon of a node in generic adapted coordinates.
pub fn newton_polygon(tree: &ResolutionTree, id: usize) -> Result<NewtonPolygon> {
    let (g, _) = generic_adapted_equation(tree, id)?;
    newton_polygon_of(&g)
}

/// Equipolygonal data of a node.
#[derive(Clone, Debug)]
pub struct EpData {
    pub polygon: NewtonPolygon,
    /// Minimal monomial generators of `I^ep`.
    pub iep_gens: Vec<(usize, usize)>,
    /// `g, u g_u, u^e g_v, v^d g_u, v g_v` in generic adapted coordinates.
    pub j_gens: Vec<BiSeries>,
    /// `dim (I^ep + J) / J` (equal to `dim I^ep / J` whenever `J ⊂ I^ep`).
    pub tep_dim: usize,
}

pub fn ep_data(tree: &ResolutionTree, id: usize) -> Result<EpData> {
    let node = &tree.nodes[id];
    let (g, k) = generic_adapted_equation(tree, id)?;
    let polygon = newton_polygon_of(&g)?;
    let gu = g.derivative_x();
    let gv = g.derivative_y();
    let u = BiSeries::x(&k);
    let v = BiSeries::y(&k);
    let j_gens = vec![
        g.clone(),
        u.mul(&gu),
        u.pow(node.e, EXACT).mul(&gv),
        v.pow(node.d, EXACT).mul(&gu),
        v.mul(&gv),
    ];
    let iep_gens: Vec<(usize, usize)> = {
        let mut gens = Vec::new();
        let first = polygon.vertices[0];
        let last = *polygon.vertices.last().unwrap();
        for i in 0..=last.0 {
            for j in 0..=first.1 {
                let p = (i, j);
                if polygon.contains(p)
                    && (i == 0 || !polygon.contains((i - 1, j)))
                    && (j == 0 || !polygon.contains((i, j - 1)))
                {
                    gens.push(p);
                }
            }
        }
        gens
    };
    // dim (I^ep + J) / J
    let qj = localalg::quotient_dim(&j_gens, None)?;
    let mut sum = j_gens.clone();
    sum.extend(iep_gens.iter().map(|&(i, j)| BiSeries::monomial(&k, i, j, k.one())));
    let qs = localalg::quotient_dim(&sum, None)?;
    let tep_dim = qj.dim - qs.dim;
    Ok(EpData { polygon, iep_gens, j_gens, tep_dim })
}
