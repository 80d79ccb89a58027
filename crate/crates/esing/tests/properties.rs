use proptest::prelude::*;

use esing::coeffield::{make_field, Elem, Field};
use esing::localalg;
use esing::resolution::{self, intersection_mult, resolve, ResolutionTree};
use esing::series::{self, BiSeries, Branch, UniSeries, EXACT};
use esing::{strata, tangent};

// ---------------------------------------------------------------------------
// generators

const FIELDS: &[(u64, u32)] = &[(0, 1), (2, 1), (3, 1), (5, 1), (7, 1), (2, 2), (2, 3), (3, 2), (5, 2)];
const CURVE_CHARS: &[u64] = &[0, 2, 3, 5, 7];

fn field(idx: usize) -> Field {
    let (p, k) = FIELDS[idx % FIELDS.len()];
    make_field(p, k).unwrap()
}

/// Element from two integer digits: `d0 + d1 a` in extensions, `d0 / (1 + |d1|)`
/// over Q, `d0` in prime fields.
fn elem(k: &Field, d: (i64, i64)) -> Elem {
    if k.characteristic() == 0 {
        return k.div(&k.from_i64(d.0), &k.from_i64(1 + d.1.abs())).unwrap();
    }
    if k.degree() == 1 {
        return k.from_i64(d.0);
    }
    k.from_digits(&[d.0, d.1]).unwrap()
}

fn poly(k: &Field, terms: &[(usize, usize, (i64, i64))]) -> BiSeries {
    BiSeries::new(k, terms.iter().map(|(i, j, d)| ((*i, *j), elem(k, *d))), EXACT)
}

fn digits() -> impl Strategy<Value = (i64, i64)> {
    (-6i64..=6, -6i64..=6)
}

fn terms(max_deg: usize, min_deg: usize, len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<(usize, usize, (i64, i64))>> {
    prop::collection::vec((0..=max_deg, 0..=max_deg, digits()), len).prop_map(move |v| {
        v.into_iter().filter(|(i, j, _)| i + j >= min_deg && i + j <= max_deg).collect()
    })
}

/// A random reduced curve singular at the origin with small δ, over a prime
/// field or Q.
fn curve() -> impl Strategy<Value = (BiSeries, ResolutionTree)> {
    (0..CURVE_CHARS.len(), terms(5, 2, 2..7), 2usize..=5, 2usize..=6).prop_filter_map("reduced, small δ", |(pi, t, a, b)| {
        let k = make_field(CURVE_CHARS[pi], 1).unwrap();
        // y^a + x^b keeps most samples reduced and not too degenerate
        let f = poly(&k, &t).add(&BiSeries::from_ints(&k, &[(0, a, 1), (b, 0, 1)]));
        let tree = resolve(&f).ok()?;
        let inv = tree.numeric_invariants();
        (inv.delta <= 8 && tree.field.degree() <= 2).then_some((f, tree))
    })
}

/// `(x, y) -> (a x + b y, c x + d y)` with `ad - bc != 0`.
fn linear_change(k: &Field, f: &BiSeries, m: [(i64, i64); 4]) -> Option<BiSeries> {
    let [a, b, c, d] = m.map(|e| elem(k, e));
    let det = k.sub(&k.mul(&a, &d), &k.mul(&b, &c));
    if k.is_zero(&det) {
        return None;
    }
    let x = BiSeries::x(k);
    let y = BiSeries::y(k);
    let nx = x.scale(&a).add(&y.scale(&b));
    let ny = x.scale(&c).add(&y.scale(&d));
    Some(f.compose(&nx, &ny, EXACT))
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort();
    v
}

// ---------------------------------------------------------------------------
// coefficient fields

#[test]
fn small_fields_satisfy_the_axioms_exhaustively() {
    for (p, k) in [(2, 1), (3, 1), (5, 1), (2, 2), (2, 3), (3, 2), (2, 4)] {
        let f = make_field(p, k).unwrap();
        let el: Vec<Elem> = f.elements().unwrap().collect();
        for a in &el {
            if !f.is_zero(a) {
                assert!(f.is_one(&f.mul(a, &f.inv(a).unwrap())));
            }
            for b in &el {
                assert_eq!(f.frobenius(&f.add(a, b)), f.add(&f.frobenius(a), &f.frobenius(b)));
                assert_eq!(f.mul(a, b), f.mul(b, a));
            }
        }
        // associativity and distributivity on a stride through all triples
        for (i, a) in el.iter().enumerate() {
            for b in el.iter().skip(i % 3).step_by(3) {
                for c in el.iter().step_by(5) {
                    assert_eq!(f.add(&f.add(a, b), c), f.add(a, &f.add(b, c)));
                    assert_eq!(f.mul(a, &f.add(b, c)), f.add(&f.mul(a, b), &f.mul(a, c)));
                    assert_eq!(f.mul(&f.mul(a, b), c), f.mul(a, &f.mul(b, c)));
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn field_axioms(fi in 0..FIELDS.len(), a in digits(), b in digits(), c in digits()) {
        let k = field(fi);
        let (a, b, c) = (elem(&k, a), elem(&k, b), elem(&k, c));
        prop_assert_eq!(k.add(&k.add(&a, &b), &c), k.add(&a, &k.add(&b, &c)));
        prop_assert_eq!(k.mul(&a, &k.add(&b, &c)), k.add(&k.mul(&a, &b), &k.mul(&a, &c)));
        if !k.is_zero(&a) {
            prop_assert!(k.is_one(&k.mul(&a, &k.inv(&a).unwrap())));
        }
        if k.characteristic() > 0 {
            prop_assert_eq!(k.frobenius(&k.add(&a, &b)), k.add(&k.frobenius(&a), &k.frobenius(&b)));
        }
    }
}

// ---------------------------------------------------------------------------
// series

proptest! {
    #[test]
    fn truncation_is_sound(fi in 0..FIELDS.len(), a in terms(8, 0, 1..10), b in terms(8, 0, 1..10), n in 4usize..10, cut in 1usize..4) {
        let k = field(fi);
        let f = BiSeries::new(&k, a.iter().map(|(i, j, d)| ((*i, *j), elem(&k, *d))), n);
        let g = BiSeries::new(&k, b.iter().map(|(i, j, d)| ((*i, *j), elem(&k, *d))), n);
        let m = n - cut.min(n - 1);
        prop_assert_eq!(f.mul(&g).truncate(m), f.truncate(m).mul(&g.truncate(m)).truncate(m));
        prop_assert_eq!(f.pow(3, n).truncate(m), f.truncate(m).pow(3, m));
    }

    #[test]
    fn orders_add_under_products(fi in 0..FIELDS.len(), a in terms(6, 0, 1..8), b in terms(6, 0, 1..8)) {
        let k = field(fi);
        let (f, g) = (poly(&k, &a), poly(&k, &b));
        prop_assume!(!f.is_zero() && !g.is_zero());
        let (of, og) = (f.order().unwrap().unwrap(), g.order().unwrap().unwrap());
        prop_assert_eq!(f.mul(&g).order().unwrap(), Some(of + og));
    }

    #[test]
    fn hensel_factors_multiply_back(pi in 1..CURVE_CHARS.len(), a in terms(4, 1, 1..6), b in terms(4, 1, 1..6), n in 4usize..10) {
        let k = make_field(CURVE_CHARS[pi], 1).unwrap();
        // (y + a(x, y)) (y + 1 + b(x, y)) with a, b divisible by x
        let a: Vec<_> = a.into_iter().filter(|t| t.0 > 0).collect();
        let b: Vec<_> = b.into_iter().filter(|t| t.0 > 0).collect();
        let y = BiSeries::y(&k);
        let g = y.add(&poly(&k, &a));
        let h = y.add(&BiSeries::one(&k)).add(&poly(&k, &b));
        let f = g.mul(&h);
        let init = [y.clone(), y.add(&BiSeries::one(&k))];
        let parts = series::hensel_factor(&f, &init, n).unwrap();
        let prod = parts[0].mul(&parts[1]);
        for i in 0..n {
            for j in 0..n - i {
                prop_assert_eq!(prod.coef(i, j), f.coef(i, j), "x^{} y^{}", i, j);
            }
        }
    }

    #[test]
    fn implicit_equations_vanish_on_their_branch(pi in 0..CURVE_CHARS.len(), a in 1usize..4, gap in 1usize..4, cx in -3i64..=3, cy in -3i64..=3) {
        let k = make_field(CURVE_CHARS[pi], 1).unwrap();
        let b = a + gap;
        let x = UniSeries::exact(&k, (0..=a + 1).map(|i| if i == a { k.one() } else if i == a + 1 { k.from_i64(cx) } else { k.zero() }).collect());
        let y = UniSeries::exact(&k, (0..=b + 1).map(|i| if i == b { k.one() } else if i == b + 1 { k.from_i64(cy) } else { k.zero() }).collect());
        let br = Branch::new(x, y);
        if let Ok(g) = series::implicitize(&br) {
            let v = series::substitute(&g, &br).unwrap();
            prop_assert!(v.coeffs().iter().all(|c| k.is_zero(c)));
        }
    }
}

// ---------------------------------------------------------------------------
// local algebra

fn zero_dimensional(k: &Field, t: &[(usize, usize, (i64, i64))], a: usize, b: usize) -> Vec<BiSeries> {
    let mut gens: Vec<BiSeries> = t.chunks(2).map(|c| poly(k, c)).filter(|g| !g.is_zero()).collect();
    gens.push(BiSeries::from_ints(k, &[(a, 0, 1)]).add(&poly(k, &t[..t.len().min(1)]).mul(&BiSeries::y(k))));
    gens.push(BiSeries::from_ints(k, &[(0, b, 1)]));
    gens
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standard_bases_agree_with_elimination(fi in 0..FIELDS.len(), t in terms(4, 1, 1..6), a in 2usize..6, b in 2usize..6) {
        let k = field(fi);
        let gens = zero_dimensional(&k, &t, a, b);
        let q = localalg::quotient_dim(&gens, None).unwrap();
        prop_assume!(q.dim <= 30);
        let bf = localalg::brute_force_quotient(&gens, Some(q.bound)).unwrap();
        prop_assert_eq!(q.dim, bf.dim);
    }

    #[test]
    fn normal_forms(fi in 0..FIELDS.len(), t in terms(4, 1, 1..6), a in 2usize..6, b in 2usize..6, h in terms(6, 0, 1..8)) {
        let k = field(fi);
        let gens = zero_dimensional(&k, &t, a, b);
        let bound = localalg::quotient_dim(&gens, None).unwrap().bound;
        let sb = localalg::std_basis(&gens, bound);
        let h = poly(&k, &h);
        let once = localalg::mora_reduce(&h, &sb, bound);
        prop_assert_eq!(localalg::mora_reduce(&once, &sb, bound), once);
        for g in &gens {
            prop_assert!(localalg::mora_reduce(g, &sb, bound).is_zero());
        }
    }

    #[test]
    fn quotient_dimension_is_coordinate_free(pi in 0..CURVE_CHARS.len(), t in terms(4, 1, 1..6), a in 2usize..6, b in 2usize..6, m in prop::array::uniform4(digits())) {
        let k = make_field(CURVE_CHARS[pi], 1).unwrap();
        let gens = zero_dimensional(&k, &t, a, b);
        let moved: Option<Vec<BiSeries>> = gens.iter().map(|g| linear_change(&k, g, m)).collect();
        prop_assume!(moved.is_some());
        let d0 = localalg::quotient_dim(&gens, None).unwrap().dim;
        let d1 = localalg::quotient_dim(&moved.unwrap(), None).unwrap().dim;
        prop_assert_eq!(d0, d1);
    }
}

// ---------------------------------------------------------------------------
// resolution

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplicities_never_increase((f, tree) in curve()) {
        for n in &tree.nodes {
            if let Some(p) = n.parent {
                prop_assert!(n.m <= tree.nodes[p].m, "{}", f);
            }
        }
        // the multiplicity of f is the sum of the branch multiplicities
        let brs = tree.branches(24).unwrap();
        let total: usize = brs.iter().map(|b| b.orders().unwrap().ord_phi).sum();
        prop_assert_eq!(Some(total), f.order().unwrap());
    }

    #[test]
    fn delta_from_tree_and_semigroups((f, tree) in curve()) {
        let delta = tree.numeric_invariants().delta;
        let brs = tree.branches(16 + 4 * delta).unwrap();
        prop_assert_eq!(tangent::delta_from_branches(&brs).unwrap(), delta, "{}", f);
    }

    #[test]
    fn invariants_are_coordinate_free((f, tree) in curve(), m in prop::array::uniform4(digits())) {
        let k = f.field.clone();
        let g = linear_change(&k, &f, m);
        prop_assume!(g.is_some());
        let t2 = resolve(&g.unwrap()).unwrap();
        let (a, b) = (tree.numeric_invariants(), t2.numeric_invariants());
        prop_assert_eq!(a.delta, b.delta);
        prop_assert_eq!(sorted(a.mult_sequence), sorted(b.mult_sequence));
        prop_assert_eq!((a.ef, a.r, a.essential_points), (b.ef, b.r, b.essential_points));
    }

    #[test]
    fn intersection_multiplicity_is_a_colength(pi in 0..CURVE_CHARS.len(), a in terms(4, 1, 1..5), b in terms(4, 1, 1..5), e in 1usize..5, d in 1usize..5) {
        let k = make_field(CURVE_CHARS[pi], 1).unwrap();
        let f = poly(&k, &a).add(&BiSeries::from_ints(&k, &[(0, e, 1)]));
        let g = poly(&k, &b).add(&BiSeries::from_ints(&k, &[(d, 0, 1)]));
        prop_assume!(f.order().unwrap() > Some(0) && g.order().unwrap() > Some(0));
        if let Ok(Some(i)) = intersection_mult(&f, &g) {
            prop_assume!(i <= 30);
            prop_assert_eq!(localalg::quotient_dim(&[f, g], None).unwrap().dim, i);
        }
    }

    #[test]
    fn tangential_factors_multiply_back((f, tree) in curve(), n in 6usize..12) {
        let parts = resolution::tangential_split(&tree.equation, n).unwrap();
        let prod = parts.iter().skip(1).fold(parts[0].clone(), |a, b| a.mul(b)).truncate(n);
        prop_assert_eq!(prod, tree.equation.truncate(n), "{}", f);
    }
}

// ---------------------------------------------------------------------------
// first-order deformations and strata

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn first_order_identities((f, tree) in curve()) {
        let t = tangent::t1_es_suite_for(&tree).unwrap();
        prop_assert!(t.checks.all(), "{}: {:?}", f, t.checks);
        // exactness: Mˢᵉᶜ − T¹ᵉˢ_{R̄/R} + T¹ᵉˢ_{R̄←R} − T¹ᵉˢ_R = 0
        prop_assert_eq!(t.dim_msec + t.dim_t1_es_norm, t.dim_t1_es_over + t.dim_t1_es_r_ideal);
        prop_assert_eq!(t.dim_t1_sec_r, t.dim_t1_sec_norm + t.delta + t.r - 1 + t.dim_msec);
        if t.good_characteristic {
            prop_assert_eq!(t.dim_t1_es_norm, t.dim_t1_es_r);
        }
    }

    #[test]
    fn equisingularity_ideal_is_an_ideal((f, _tree) in curve()) {
        let ideal = tangent::es_ideal(&f).unwrap();
        let k = f.field.clone();
        let bound = ideal.degree_bound;
        let mut gens = ideal.generators.clone();
        for i in 0..=bound {
            gens.push(BiSeries::from_ints(&k, &[(i, bound - i, 1)]));
        }
        for v in &ideal.generators {
            for h in [BiSeries::x(&k), BiSeries::y(&k)] {
                prop_assert!(localalg::ideal_member(&h.mul(v).truncate(bound), &gens, bound + 2), "{}", f);
            }
        }
    }

    #[test]
    fn stratum_dimension_routes_agree((f, tree) in curve()) {
        let t = tangent::t1_es_suite_for(&tree).unwrap();
        let d = strata::wes_dimension_from(&tree, &t);
        prop_assert!(d.consistent, "{}: {:?}", f, d);
        let fam = strata::semiuniversal_family_for(tree.clone()).unwrap();
        let w = strata::wes_conditions(&fam, 3).unwrap();
        prop_assert_eq!(w.dim_from_conditions, d.dim, "{}", f);
        if t.good_characteristic {
            // smooth stratum: linear parts carry every condition, and the
            // stratum is the equisingular one
            prop_assert_eq!(w.linear_rank, w.con_wes, "{}", f);
            prop_assert_eq!(w.dim_from_conditions, t.dim_t1_es_r, "{}", f);
        }
    }
}
