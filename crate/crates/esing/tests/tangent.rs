use esing::coeffield::{make_field, Field};
use esing::resolution::resolve;
use esing::series::BiSeries;
use esing::tangent::{self, delta_from_branches, es_ideal, es_tangent_basis, t1_es_suite, t1_m_multiple_param, t1_sec_R};

fn poly(k: &Field, t: &[(usize, usize, i64)]) -> BiSeries {
    BiSeries::from_ints(k, t)
}

fn cusp() -> BiSeries {
    poly(&Field::rationals(), &[(0, 2, 1), (3, 0, -1)])
}

fn two_p_curve(p: usize) -> BiSeries {
    let k = make_field(p as u64, 1).unwrap();
    poly(&k, &[(0, 2 * p, 1), (2 * p + 1, 0, 1), (p, p + 1, 1)])
}

#[test]
fn cusp_section_tjurina_basis() {
    let s = t1_sec_R(&cusp()).unwrap();
    assert_eq!(s.dim, 3);
    assert_eq!(s.basis, vec![(0, 1), (1, 0), (2, 0)]);
}

#[test]
fn char_two_quartic_section_tjurina_basis() {
    let k = make_field(2, 1).unwrap();
    let s = t1_sec_R(&poly(&k, &[(0, 4, 1), (6, 0, 1), (7, 0, 1)])).unwrap();
    let mut expect: Vec<(usize, usize)> = (0..=5).flat_map(|i| (0..=3).map(move |j| (i, j))).filter(|&(i, j)| i + j > 0).collect();
    expect.push((6, 0));
    expect.sort();
    assert_eq!(s.dim, 24);
    assert_eq!(s.basis, expect);
}

#[test]
fn two_p_curve_section_tjurina_number() {
    assert_eq!(t1_sec_R(&two_p_curve(3)).unwrap().dim, 28);
}

#[test]
fn multiple_parametric_spaces() {
    let q = Field::rationals();
    // a smooth branch: x surjects m onto m̄
    assert_eq!(t1_m_multiple_param(&poly(&q, &[(0, 1, 1), (3, 0, -1)]), &[1]).unwrap(), 0);
    assert_eq!(t1_m_multiple_param(&cusp(), &[1]).unwrap(), 2);
    for p in [2usize, 3] {
        assert_eq!(t1_m_multiple_param(&two_p_curve(p), &[1]).unwrap(), p * p + p + 1, "p = {p}");
    }
}

#[test]
fn delta_from_semigroup_span() {
    let q = Field::rationals();
    for (f, delta) in [(cusp(), 1), (poly(&q, &[(0, 3, 1), (4, 0, -1)]), 3), (poly(&q, &[(1, 1, 1)]), 1), (poly(&q, &[(2, 1, 1), (0, 3, -1)]), 3)] {
        let t = resolve(&f).unwrap();
        assert_eq!(delta_from_branches(&t.branches(64).unwrap()).unwrap(), delta);
        assert_eq!(t.numeric_invariants().delta, delta);
    }
}

#[test]
fn cusp_has_no_equisingular_directions() {
    let t = resolve(&cusp()).unwrap();
    assert_eq!(es_tangent_basis(&t).unwrap().dim, 0);
    let r = t1_es_suite(&cusp()).unwrap();
    assert_eq!((r.dim_msec, r.dim_t1_es_over, r.dim_t1_es_norm, r.dim_t1_es_r), (0, 0, 0, 0));
    assert!(r.checks.all());
}

#[test]
fn two_p_curve_in_characteristic_two() {
    let f = two_p_curve(2);
    let t = resolve(&f).unwrap();
    let b = es_tangent_basis(&t).unwrap();
    assert_eq!(b.dim, 1);
    let r = t1_es_suite(&f).unwrap();
    assert_eq!((r.dim_msec, r.dim_t1_es_over, r.dim_t1_es_norm, r.dim_t1_es_r), (0, 1, 1, 0));
    assert!(r.checks.all());
}

#[test]
fn char_two_quartic_has_two_dimensional_msec() {
    let k = make_field(2, 1).unwrap();
    let r = t1_es_suite(&poly(&k, &[(0, 4, 1), (6, 0, 1), (7, 0, 1)])).unwrap();
    assert_eq!(r.dim_msec, 2);
    assert_eq!(r.dim_t1_es_over, 2);
    assert_eq!(r.dim_t1_sec_over, 6);
    assert!(r.checks.all());
}

#[test]
fn section_tjurina_identity_and_exactness_on_small_curves() {
    let q = Field::rationals();
    let k3 = make_field(3, 1).unwrap();
    let k5 = make_field(5, 1).unwrap();
    let curves = vec![
        poly(&q, &[(1, 1, 1)]),
        poly(&q, &[(0, 2, 1), (5, 0, -1)]),
        poly(&q, &[(0, 3, 1), (4, 0, -1)]),
        poly(&k3, &[(0, 3, 1), (5, 0, -1), (2, 2, 1)]),
        poly(&k5, &[(0, 3, 1), (7, 0, 1)]),
    ];
    for f in curves {
        let r = t1_es_suite(&f).unwrap();
        assert!(r.checks.all(), "{f}: {:?}", r.checks);
        assert_eq!(r.dim_t1_sec_r, r.dim_t1_sec_norm + r.delta + r.r - 1 + r.dim_msec);
        assert_eq!(r.dim_t1_es_r, r.dim_t1_es_r_ideal);
    }
}

#[test]
fn equisingularity_ideal_examples() {
    let q = Field::rationals();
    let c = es_ideal(&cusp()).unwrap();
    assert_eq!(c.dim, 0);
    assert_eq!(c.generators.len(), 3);
    assert_eq!(es_ideal(&poly(&q, &[(1, 1, 1)])).unwrap().dim, 0);
    // y^p - x^{p+2} + x^l y^l with (p, l) = (5, 3): (l-2)^2 = 1
    let k5 = make_field(5, 1).unwrap();
    let e = es_ideal(&poly(&k5, &[(0, 5, 1), (7, 0, -1), (3, 3, 1)])).unwrap();
    assert_eq!(e.dim, 1);
    assert_eq!(e.generators.len(), 4);
}

#[test]
fn es_constraints_are_stable_under_the_ring_action() {
    // multiplying a solution by x or y along the branches keeps it a solution
    let f = two_p_curve(3);
    let t = resolve(&f).unwrap();
    let sys = tangent::es_constraint_system(&t, 48).unwrap();
    let sp = &sys.space;
    let sols = sys.solutions();
    for v in sols.iter().take(12) {
        let pairs = sp.pairs_of(v);
        for coord in 0..2 {
            let moved: Vec<_> = pairs
                .iter()
                .zip(&sp.branches)
                .map(|((a, bb), br)| {
                    let h = if coord == 0 { &br.x } else { &br.y };
                    (a.mul(h).truncate(sp.n), bb.mul(h).truncate(sp.n))
                })
                .collect();
            assert!(sys.satisfies(&sp.pair_vector(&moved)));
        }
    }
}
