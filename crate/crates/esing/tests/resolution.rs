use esing::coeffield::{make_field, Field};
use esing::resolution::{self, intersection_mult, newton_polygon, resolve, tangential_split, Chart, PointKind};
use esing::series::{self, BiSeries};

fn poly(k: &Field, t: &[(usize, usize, i64)]) -> BiSeries {
    BiSeries::from_ints(k, t)
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort();
    v
}

#[test]
fn one_point_of_multiplicity_2p_then_2p_simple_points() {
    for p in [2u64, 3, 5] {
        let k = make_field(p, 1).unwrap();
        let pp = p as usize;
        let f = poly(&k, &[(0, 2 * pp, 1), (2 * pp + 1, 0, 1), (pp, pp + 1, 1)]);
        let t = resolve(&f).unwrap();
        let inv = t.numeric_invariants();
        let mut expect = vec![1; 2 * pp];
        expect.push(2 * pp);
        assert_eq!(sorted(inv.mult_sequence.clone()), sorted(expect), "p = {p}");
        assert_eq!(inv.ef, 2);
        assert_eq!(inv.delta, 2 * pp * pp - pp);
    }
}

#[test]
fn branch_pair_tree_multiplicities() {
    for p in [2u64, 3, 5] {
        let k = make_field(p, 1).unwrap();
        let pp = p as usize;
        // y (y^p - x^{p+1})
        let f = poly(&k, &[(0, pp + 1, 1), (pp + 1, 1, -1)]);
        let t = resolve(&f).unwrap();
        let inv = t.numeric_invariants();
        let mut expect = vec![pp + 1, 2];
        expect.extend(vec![1; pp - 1]);
        assert_eq!(sorted(inv.mult_sequence.clone()), sorted(expect), "p = {p}");
        assert_eq!(inv.ef, 2);
        assert_eq!(t.r, 2);
    }
}

#[test]
fn e6_delta_and_branch_orders() {
    let k = Field::rationals();
    let f = poly(&k, &[(0, 3, 1), (5, 0, -1)]);
    let t = resolve(&f).unwrap();
    assert_eq!(t.numeric_invariants().delta, 4);
    let brs = t.branches(40).unwrap();
    assert_eq!(brs.len(), 1);
    let o = brs[0].orders().unwrap();
    assert_eq!((o.ord_x, o.ord_y), (Some(3), Some(5)));
    let v = series::substitute(&f, &brs[0]).unwrap();
    assert!(v.coeffs().is_empty());
}

#[test]
fn cusp_branch_orders_and_satellite() {
    let k = Field::rationals();
    let f = poly(&k, &[(0, 2, 1), (3, 0, -1)]);
    let t = resolve(&f).unwrap();
    let brs = t.branches(20).unwrap();
    let o = brs[0].orders().unwrap();
    assert_eq!((o.ord_x, o.ord_y), (Some(2), Some(3)));
    assert_eq!(t.nodes[2].kind, PointKind::Satellite);
    assert_eq!(t.nodes[2].chart, Chart::Infinity);
}

#[test]
fn intersection_multiplicities() {
    let k = make_field(7, 1).unwrap();
    let x = poly(&k, &[(1, 0, 1)]);
    let y = poly(&k, &[(0, 1, 1)]);
    let cusp = poly(&k, &[(0, 2, 1), (3, 0, -1)]);
    let other = poly(&k, &[(0, 2, 1), (3, 0, 1)]);
    assert_eq!(intersection_mult(&x, &y).unwrap(), Some(1));
    assert_eq!(intersection_mult(&y, &cusp).unwrap(), Some(3));
    assert_eq!(intersection_mult(&cusp, &other).unwrap(), Some(6));
    assert_eq!(intersection_mult(&cusp, &cusp).unwrap(), None);
}

#[test]
fn irrational_tangents_extend_the_field() {
    // y^2 - 2 x^2 over F_5: 2 is not a square
    let k = make_field(5, 1).unwrap();
    let f = poly(&k, &[(0, 2, 1), (2, 0, -2)]);
    let t = resolve(&f).unwrap();
    assert_eq!(t.field.degree(), 2);
    assert_eq!(t.r, 2);
    // over Q the same curve is rejected
    let q = Field::rationals();
    let g = poly(&q, &[(0, 2, 1), (2, 0, -2)]);
    assert!(matches!(resolve(&g), Err(esing::error::Error::IrrationalTangent(_))));
}

#[test]
fn non_reduced_input_is_rejected() {
    let k = make_field(3, 1).unwrap();
    let f = poly(&k, &[(0, 2, 1)]);
    assert!(matches!(resolve(&f), Err(esing::error::Error::NotReduced(_))));
}

#[test]
fn tangential_components_multiply_back() {
    let k = make_field(5, 1).unwrap();
    // (y - x)(y + x) + x^3
    let f = poly(&k, &[(0, 2, 1), (2, 0, -1), (3, 0, 1)]);
    let parts = tangential_split(&f, 12).unwrap();
    assert_eq!(parts.len(), 2);
    let prod = parts[0].mul(&parts[1]).truncate(12);
    assert_eq!(prod, f.truncate(12));
    // y (y - x^2)(y^p - x^{p+1}): a single tangential component
    let g = poly(&k, &[(0, 1, 1)]).mul(&poly(&k, &[(0, 1, 1), (2, 0, -1)])).mul(&poly(&k, &[(0, 5, 1), (6, 0, -1)]));
    assert_eq!(tangential_split(&g, 12).unwrap().len(), 1);
    // y^2 + x^2 over F_5 splits into two conjugate lines
    let h = poly(&k, &[(0, 2, 1), (2, 0, 1)]);
    let parts = tangential_split(&h, 8).unwrap();
    assert_eq!(parts.len(), 2);
    assert_eq!(parts[0].mul(&parts[1]).truncate(8), h.truncate(8));
}

#[test]
fn newton_polygons() {
    let q = Field::rationals();
    let t = resolve(&poly(&q, &[(0, 2, 1), (3, 0, -1)])).unwrap();
    assert_eq!(newton_polygon(&t, 0).unwrap().vertices, vec![(0, 2), (3, 0)]);
    let k2 = make_field(2, 1).unwrap();
    let t = resolve(&poly(&k2, &[(0, 4, 1), (6, 0, 1), (7, 0, 1)])).unwrap();
    assert_eq!(newton_polygon(&t, 0).unwrap().vertices, vec![(0, 4), (6, 0)]);
}

#[test]
fn ep_dimensions_at_the_root() {
    let q = Field::rationals();
    for f in [poly(&q, &[(0, 2, 1), (3, 0, -1)]), poly(&q, &[(0, 2, 1), (5, 0, -1)])] {
        let t = resolve(&f).unwrap();
        assert_eq!(resolution::ep_data(&t, 0).unwrap().tep_dim, 0);
    }
}

#[test]
fn tree_json_is_key_sorted() {
    let q = Field::rationals();
    let t = resolve(&poly(&q, &[(1, 1, 1)])).unwrap();
    let s = serde_json::to_string(&t.to_json()).unwrap();
    assert!(s.starts_with("{\"field\""));
    assert!(s.contains("\"chart\":\"root\""));
}
