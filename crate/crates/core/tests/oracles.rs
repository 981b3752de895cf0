//! Place counts and map identities checked against brute-force scans that
//! do not use the enumeration chains or the expression compiler.

use std::collections::BTreeSet;

use galois_points::autos::{close_group, Automorphism, TestSet};
use galois_points::catalog::{fermat_quartic, gk, hermitian, skabelund_suzuki, Scenario};
use galois_points::divisor::{orbit_divisor, Divisor};
use galois_points::geometry::{Place, ProjPoint};
use galois_points::gf::{FieldCtx, FieldElem};

fn elems(ctx: &FieldCtx, d: u32) -> Vec<FieldElem> {
    ctx.subfield_elements(d).unwrap()
}

fn affine(ctx: &FieldCtx, v: &[FieldElem]) -> Place {
    Place::Ordinary(ProjPoint::from_affine(ctx, v))
}

/// Affine points of `eq` over GF(p^d), scanning every coordinate tuple.
fn scan(ctx: &FieldCtx, d: u32, n: usize, eq: impl Fn(&[FieldElem]) -> bool) -> BTreeSet<Place> {
    let e = elems(ctx, d);
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; n];
    loop {
        let v: Vec<FieldElem> = idx.iter().map(|&i| e[i]).collect();
        if eq(&v) {
            out.insert(affine(ctx, &v));
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < e.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            return out;
        }
    }
}

fn enumerated(s: &Scenario, d: u32) -> BTreeSet<Place> {
    s.curve.enumerate_places(&s.ctx, d).unwrap().into_iter().collect()
}

fn gk_oracle(q: u64) -> (Scenario, BTreeSet<Place>) {
    let s = Scenario::from_doc(gk(q, 1).unwrap()).unwrap();
    let c = &s.ctx;
    let mut pts = scan(c, s.test_degree, 3, |v| {
        let (x, y, z) = (v[0], v[1], v[2]);
        let t = c.add(c.pow(x, q), x);
        let e1 = c.sub(t, c.pow(y, q + 1));
        let e2 = c.sub(
            c.mul(y, c.sub(c.pow(t, q - 1), c.one())),
            c.pow(z, q * q - q + 1),
        );
        e1.is_zero() && e2.is_zero()
    });
    pts.insert(s.place("(1:0:0:0)").unwrap());
    (s, pts)
}

#[test]
fn gk_q2_has_9_places_over_f4() {
    let (s, oracle) = gk_oracle(2);
    assert_eq!(oracle.len(), 9);
    assert_eq!(enumerated(&s, 2), oracle);
}

#[test]
fn gk_q3_has_28_places_over_f9() {
    let (s, oracle) = gk_oracle(3);
    assert_eq!(oracle.len(), 28);
    assert_eq!(enumerated(&s, 2), oracle);
}

#[test]
fn suzuki_cover_has_65_places_over_f8() {
    let s = Scenario::from_doc(skabelund_suzuki(2, 1).unwrap()).unwrap();
    let c = &s.ctx;
    let mut oracle = scan(c, 3, 3, |v| {
        let (x, y, z) = (v[0], v[1], v[2]);
        let t = c.add(c.pow(x, 8), x);
        let e1 = c.sub(c.add(c.pow(y, 8), y), c.mul(c.pow(x, 2), t));
        let e2 = c.sub(t, c.pow(z, 5));
        e1.is_zero() && e2.is_zero()
    });
    oracle.insert(Place::special("pole_of_x"));
    assert_eq!(oracle.len(), 65);
    assert_eq!(enumerated(&s, 3), oracle);
}

#[test]
fn hermitian_q3_has_28_places_over_f9() {
    let s = Scenario::from_doc(hermitian(3, 1).unwrap()).unwrap();
    let c = &s.ctx;
    let mut oracle = scan(c, 2, 2, |v| {
        c.sub(c.add(c.pow(v[0], 3), v[0]), c.pow(v[1], 4)).is_zero()
    });
    oracle.insert(s.place("(1:0:0)").unwrap());
    assert_eq!(oracle.len(), 28);
    assert_eq!(enumerated(&s, 2), oracle);
}

#[test]
fn fermat_places_match_scan() {
    for p in [7u64, 13] {
        let s = Scenario::from_doc(fermat_quartic(p, 0).unwrap()).unwrap();
        let c = &s.ctx;
        let eq = |v: &[FieldElem]| {
            c.add(c.add(c.pow(v[0], 3), c.pow(v[1], 4)), c.one()).is_zero()
        };
        for d in [1, s.sample_degree] {
            let mut oracle = scan(c, d, 2, eq);
            oracle.insert(s.place("(1:0:0)").unwrap());
            assert_eq!(enumerated(&s, d), oracle, "p = {p}, degree {d}");
        }
    }
}

#[test]
fn fermat_y0_section_is_four_rational_places() {
    let s = Scenario::from_doc(fermat_quartic(7, 0).unwrap()).unwrap();
    let c = &s.ctx;
    // x^3 = -1 over GF(7): x in {3, 5, 6}
    let mut want: BTreeSet<Place> = [3, 5, 6]
        .iter()
        .map(|&x| affine(c, &[c.from_int(x), c.zero()]))
        .collect();
    want.insert(s.place("(1:0:0)").unwrap());
    let got: BTreeSet<Place> = enumerated(&s, 1)
        .into_iter()
        .filter(|p| p.point().is_some_and(|q| q.coords()[1].is_zero()))
        .collect();
    assert_eq!(got, want);
}

fn probes(s: &Scenario) -> std::sync::Arc<TestSet> {
    TestSet::new(s.curve.enumerate_places(&s.ctx, s.sample_degree).unwrap())
}

#[test]
fn suzuki_xi_is_an_involution_swapping_p1_p2() {
    let s = Scenario::from_doc(skabelund_suzuki(2, 1).unwrap()).unwrap();
    let xi = &s.maps["xi"];
    let c = &s.ctx;
    let places = s.curve.enumerate_places(c, s.sample_degree).unwrap();
    for p in &places {
        let img = xi.apply(c, p).unwrap();
        assert!(s.curve.on_curve(c, &img).unwrap());
        assert_eq!(&xi.apply(c, &img).unwrap(), p);
    }
    let origin = s.place("(0:0:0:1)").unwrap();
    assert_eq!(xi.apply(c, &origin).unwrap(), Place::special("pole_of_x"));
}

#[test]
fn gk_xi_squares_to_identity() {
    let s = Scenario::from_doc(gk(2, 1).unwrap()).unwrap();
    let c = &s.ctx;
    let xi = &s.maps["xi"];
    let sq = xi.compose(c, xi);
    let m = sq.matrix().unwrap();
    assert!(m.projectively_equal(c, &galois_points::autos::Matrix::identity(c, 4)));
    for p in s.curve.enumerate_places(c, 2).unwrap() {
        assert!(s.curve.on_curve(c, &xi.apply(c, &p).unwrap()).unwrap());
    }
}

#[test]
fn hermitian_g2_is_g1_conjugated_by_the_coordinate_swap() {
    for q in [2u64, 3, 4] {
        let s = Scenario::from_doc(hermitian(q, 1).unwrap()).unwrap();
        let c = &s.ctx;
        let t = probes(&s);
        let gens = |g: &galois_points::catalog::GroupSpec| match g {
            galois_points::catalog::GroupSpec::Generators(v) => v.clone(),
            _ => unreachable!(),
        };
        let g1 = close_group(c, &t, &gens(&s.g1), 4096).unwrap();
        let g2 = close_group(c, &t, &gens(&s.g2), 4096).unwrap();
        let swap = &s.maps["swap"];
        let conj = galois_points::autos::conjugate_group(c, swap, swap, &g1).unwrap();
        assert_eq!(g1.order() as u64, q);
        assert!(conj.same_elements(&g2), "q = {q}");
    }
}

#[test]
fn fermat_g2_preserves_curve_and_has_order_3() {
    let s = Scenario::from_doc(fermat_quartic(7, 0).unwrap()).unwrap();
    let c = &s.ctx;
    let t = probes(&s);
    let galois_points::catalog::GroupSpec::Generators(gens) = &s.g2 else {
        unreachable!()
    };
    let g2 = close_group(c, &t, gens, 64).unwrap();
    assert_eq!(g2.order(), 3);
    for e in g2.elements() {
        for img in e.sig.iter() {
            assert!(s.curve.on_curve(c, img).unwrap());
        }
    }
    let p2 = s.place("(-1:0:1)").unwrap();
    assert!(g2.fixes(c, &p2).unwrap());
}

#[test]
fn fermat_orbit_divisor_with_omega_2() {
    let s = Scenario::from_doc(fermat_quartic(7, 0).unwrap()).unwrap();
    let c = &s.ctx;
    let t = probes(&s);
    let galois_points::catalog::GroupSpec::Generators(gens) = &s.g1 else {
        unreachable!()
    };
    let sigma: &Automorphism = &gens[0];
    assert_eq!(sigma.matrix().unwrap().get(0, 0), c.from_int(2));
    let g1 = close_group(c, &t, gens, 64).unwrap();
    let p2 = s.place("(-1:0:1)").unwrap();
    // x -> 2x on x^3 = -1 cycles 6 -> 5 -> 3
    let want = Divisor::from_places([6, 5, 3].iter().map(|&x| affine(c, &[c.from_int(x), c.zero()])));
    assert_eq!(orbit_divisor(c, &g1, &p2).unwrap(), want);
}
