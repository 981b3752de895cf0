//! Formal sums of places, orbit divisors, and transport along the quotient
//! map by a finite group H.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use serde_json::{json, Value};

use crate::autos::{AutoError, FiniteAutoGroup};
use crate::geometry::Place;
use crate::gf::FieldCtx;

/// Finite integer combination of places; zero multiplicities are never
/// stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Divisor<P: Ord> {
    support: BTreeMap<P, i64>,
}

impl<P: Ord + Clone> Default for Divisor<P> {
    fn default() -> Self {
        Divisor {
            support: BTreeMap::new(),
        }
    }
}

impl<P: Ord + Clone> Divisor<P> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn point(p: P) -> Self {
        let mut d = Self::zero();
        d.add_place(p, 1);
        d
    }

    pub fn from_places<I: IntoIterator<Item = P>>(places: I) -> Self {
        let mut d = Self::zero();
        for p in places {
            d.add_place(p, 1);
        }
        d
    }

    pub fn add_place(&mut self, p: P, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.support.entry(p.clone()).or_insert(0);
        *e += m;
        if *e == 0 {
            self.support.remove(&p);
        }
    }

    pub fn multiplicity(&self, p: &P) -> i64 {
        self.support.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.support.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, i64)> {
        self.support.iter().map(|(p, &m)| (p, m))
    }

    pub fn scale(&self, n: i64) -> Self {
        if n == 0 {
            return Self::zero();
        }
        Divisor {
            support: self.support.iter().map(|(p, &m)| (p.clone(), m * n)).collect(),
        }
    }

    /// Every multiplicity is 1.
    pub fn is_reduced(&self) -> bool {
        self.support.values().all(|&m| m == 1)
    }
}

impl<P: Ord + Clone> Add for &Divisor<P> {
    type Output = Divisor<P>;
    fn add(self, rhs: Self) -> Divisor<P> {
        let mut out = self.clone();
        for (p, &m) in &rhs.support {
            out.add_place(p.clone(), m);
        }
        out
    }
}

impl<P: Ord + Clone> Neg for &Divisor<P> {
    type Output = Divisor<P>;
    fn neg(self) -> Divisor<P> {
        self.scale(-1)
    }
}

impl<P: Ord + Clone> Sub for &Divisor<P> {
    type Output = Divisor<P>;
    fn sub(self, rhs: Self) -> Divisor<P> {
        self + &(-rhs)
    }
}

impl Divisor<Place> {
    pub fn to_json(&self, ctx: &FieldCtx) -> Value {
        Value::Array(
            self.support
                .iter()
                .map(|(p, m)| json!([p.display(ctx), m]))
                .collect(),
        )
    }
}

impl Divisor<QuotientPlace> {
    pub fn to_json(&self, ctx: &FieldCtx) -> Value {
        Value::Array(
            self.support
                .iter()
                .map(|(p, m)| json!([p.representative().display(ctx), p.orbit.len(), m]))
                .collect(),
        )
    }
}

/// The image of a place on the quotient by H: its sorted H-orbit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuotientPlace {
    orbit: Vec<Place>,
}

impl QuotientPlace {
    pub fn of(ctx: &FieldCtx, h: &FiniteAutoGroup, p: &Place) -> Result<QuotientPlace, AutoError> {
        Ok(QuotientPlace {
            orbit: h.orbit(ctx, p)?.into_iter().collect(),
        })
    }

    /// Least place of the orbit.
    pub fn representative(&self) -> &Place {
        &self.orbit[0]
    }

    pub fn orbit(&self) -> &[Place] {
        &self.orbit
    }
}

/// `sum_{g in G} g(P)`; each orbit point has multiplicity `|Stab_G(P)|`.
pub fn orbit_divisor(
    ctx: &FieldCtx,
    g: &FiniteAutoGroup,
    p: &Place,
) -> Result<Divisor<Place>, AutoError> {
    let mut d = Divisor::zero();
    for e in g.elements() {
        d.add_place(e.apply(ctx, p)?, 1);
    }
    Ok(d)
}

/// Each place goes to its H-orbit with unchanged multiplicity.
pub fn pushforward(
    ctx: &FieldCtx,
    h: &FiniteAutoGroup,
    d: &Divisor<Place>,
) -> Result<Divisor<QuotientPlace>, AutoError> {
    let mut out = Divisor::zero();
    for (p, m) in d.iter() {
        out.add_place(QuotientPlace::of(ctx, h, p)?, m);
    }
    Ok(out)
}

/// `Pbar -> sum_{h in H} h(P)`, so each orbit point carries the stabilizer
/// order as its ramification multiplicity.
pub fn pullback(
    ctx: &FieldCtx,
    h: &FiniteAutoGroup,
    d: &Divisor<QuotientPlace>,
) -> Result<Divisor<Place>, AutoError> {
    let mut out = Divisor::zero();
    for (q, m) in d.iter() {
        let rep = q.representative();
        for e in h.elements() {
            out.add_place(e.apply(ctx, rep)?, m);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autos::{close_group, Automorphism, Matrix, TestSet};
    use crate::geometry::ProjPoint;
    use proptest::prelude::*;

    fn setup() -> (FieldCtx, Vec<Place>, FiniteAutoGroup) {
        let ctx = FieldCtx::build(5, &[1]).unwrap();
        let mut places = Vec::new();
        for a in 0..5 {
            for b in 0..5 {
                let v = [ctx.from_int(a), ctx.from_int(b), ctx.one()];
                places.push(Place::Ordinary(ProjPoint::normalize(&ctx, &v).unwrap()));
            }
        }
        let t = TestSet::new(places.clone());
        let z = ctx.zero();
        // (x, y) -> (x, -y): order 2
        let m = Matrix::new(3, vec![ctx.one(), z, z, z, ctx.from_int(4), z, z, z, ctx.one()]);
        let h = close_group(&ctx, &t, &[Automorphism::linear(m, BTreeMap::new(), "eta")], 10).unwrap();
        (ctx, places, h)
    }

    #[test]
    fn orbit_divisor_degree_and_fixed_points() {
        let (ctx, places, h) = setup();
        for p in &places {
            let d = orbit_divisor(&ctx, &h, p).unwrap();
            assert_eq!(d.degree(), 2);
        }
        // y = 0 is fixed
        let fixed = &places[0];
        assert_eq!(orbit_divisor(&ctx, &h, fixed).unwrap(), Divisor::point(fixed.clone()).scale(2));
    }

    #[test]
    fn push_pull_identities() {
        let (ctx, places, h) = setup();
        for p in &places {
            let q = QuotientPlace::of(&ctx, &h, p).unwrap();
            let pulled = pullback(&ctx, &h, &Divisor::point(q.clone())).unwrap();
            assert_eq!(pulled, orbit_divisor(&ctx, &h, p).unwrap());
            let back = pushforward(&ctx, &h, &pulled).unwrap();
            assert_eq!(back, Divisor::point(q).scale(2));
        }
        let triv = FiniteAutoGroup::trivial(h.test_set().clone());
        let d = Divisor::from_places(places[..3].iter().cloned());
        let pd = pushforward(&ctx, &triv, &d).unwrap();
        assert_eq!(pd.degree(), 3);
        assert_eq!(pullback(&ctx, &triv, &pd).unwrap(), d);
    }

    #[test]
    fn zero_is_neutral() {
        let (_, places, _) = setup();
        let d = Divisor::from_places(places[..4].iter().cloned());
        assert_eq!(&d + &Divisor::zero(), d);
        assert!((&d - &d).is_zero());
    }

    fn divisor_strategy() -> impl Strategy<Value = Vec<(usize, i64)>> {
        proptest::collection::vec((0usize..25, -3i64..4), 0..12)
    }

    fn build(places: &[Place], spec: &[(usize, i64)]) -> Divisor<Place> {
        let mut d = Divisor::zero();
        for &(i, m) in spec {
            d.add_place(places[i].clone(), m);
        }
        d
    }

    proptest! {
        #[test]
        fn transport_is_additive(a in divisor_strategy(), b in divisor_strategy()) {
            let (ctx, places, h) = setup();
            let (da, db) = (build(&places, &a), build(&places, &b));
            let sum = &da + &db;
            let push = |d: &Divisor<Place>| pushforward(&ctx, &h, d).unwrap();
            prop_assert_eq!(push(&sum), &push(&da) + &push(&db));
            let pull = |d: &Divisor<QuotientPlace>| pullback(&ctx, &h, d).unwrap();
            prop_assert_eq!(pull(&push(&sum)), &pull(&push(&da)) + &pull(&push(&db)));
        }

        #[test]
        fn scaling_cancels(a in divisor_strategy(), b in divisor_strategy(), n in 1i64..6) {
            let (_, places, _) = setup();
            let (da, db) = (build(&places, &a), build(&places, &b));
            prop_assert_eq!(da.scale(n) == db.scale(n), da == db);
            prop_assert!(da.iter().all(|(_, m)| m != 0));
        }
    }
}
