//! Automorphisms of curves and the finite groups they generate.
//!
//! Group elements carry a signature: the images of a fixed probe set of
//! places. Two elements are equal exactly when their signatures agree, and
//! the signature of a product is obtained by applying the left factor to
//! the right factor's signature. For linear maps the signature is
//! cross-checked against projective matrix equality, which is how an
//! insufficient probe set is detected.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::Node;
use crate::geometry::{GeometryError, Place, ProjPoint};
use crate::gf::{FieldCtx, FieldElem, GfError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutoError {
    #[error("map `{map}` has no special action at {place}")]
    MissingSpecialAction { map: String, place: String },
    #[error("group exceeds the cap of {0} elements")]
    GroupTooLarge(usize),
    #[error("probe set does not separate distinct linear maps; enlarge it")]
    UnfaithfulTestSet,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("map `{0}` is not invertible")]
    NotInvertible(String),
    #[error("groups act on different probe sets")]
    ProbeMismatch,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Gf(#[from] GfError),
}

/// Square matrix over the ambient field, row major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    n: usize,
    m: Vec<FieldElem>,
}

impl Matrix {
    pub fn new(n: usize, entries: Vec<FieldElem>) -> Matrix {
        assert_eq!(entries.len(), n * n);
        Matrix { n, m: entries }
    }

    pub fn identity(ctx: &FieldCtx, n: usize) -> Matrix {
        let mut m = vec![FieldElem::ZERO; n * n];
        for i in 0..n {
            m[i * n + i] = ctx.one();
        }
        Matrix { n, m }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        self.m[r * self.n + c]
    }

    /// `self * other`.
    pub fn mul(&self, ctx: &FieldCtx, other: &Matrix) -> Matrix {
        let n = self.n;
        let mut out = vec![FieldElem::ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                let mut acc = FieldElem::ZERO;
                for k in 0..n {
                    acc = ctx.add(acc, ctx.mul(self.get(r, k), other.get(k, c)));
                }
                out[r * n + c] = acc;
            }
        }
        Matrix { n, m: out }
    }

    pub fn apply(&self, ctx: &FieldCtx, v: &[FieldElem]) -> Vec<FieldElem> {
        (0..self.n)
            .map(|r| {
                (0..self.n).fold(FieldElem::ZERO, |acc, c| {
                    ctx.add(acc, ctx.mul(self.get(r, c), v[c]))
                })
            })
            .collect()
    }

    /// Gauss-Jordan inverse; `None` if singular.
    pub fn inverse(&self, ctx: &FieldCtx) -> Option<Matrix> {
        let n = self.n;
        let mut a = self.m.clone();
        let mut inv = Matrix::identity(ctx, n).m;
        for col in 0..n {
            let piv = (col..n).find(|&r| !a[r * n + col].is_zero())?;
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
                inv.swap(col * n + k, piv * n + k);
            }
            let s = ctx.inv(a[col * n + col]).ok()?;
            for k in 0..n {
                a[col * n + k] = ctx.mul(a[col * n + k], s);
                inv[col * n + k] = ctx.mul(inv[col * n + k], s);
            }
            for r in 0..n {
                if r != col && !a[r * n + col].is_zero() {
                    let f = a[r * n + col];
                    for k in 0..n {
                        a[r * n + k] = ctx.sub(a[r * n + k], ctx.mul(f, a[col * n + k]));
                        inv[r * n + k] = ctx.sub(inv[r * n + k], ctx.mul(f, inv[col * n + k]));
                    }
                }
            }
        }
        Some(Matrix { n, m: inv })
    }

    /// Equality in PGL: `self = c * other` for some nonzero scalar c.
    pub fn projectively_equal(&self, ctx: &FieldCtx, other: &Matrix) -> bool {
        if self.n != other.n {
            return false;
        }
        let Some(k) = (0..self.m.len()).find(|&i| !other.m[i].is_zero()) else {
            return false;
        };
        let Ok(c) = ctx.div(self.m[k], other.m[k]) else {
            return false;
        };
        !c.is_zero() && self.m.iter().zip(&other.m).all(|(&a, &b)| a == ctx.mul(c, b))
    }

    pub fn display(&self, ctx: &FieldCtx) -> String {
        let rows: Vec<String> = (0..self.n)
            .map(|r| {
                let cells: Vec<String> = (0..self.n).map(|c| ctx.display(self.get(r, c))).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        format!("[{}]", rows.join(","))
    }
}

/// How a map acts on ordinary places.
#[derive(Debug)]
pub enum MapKind {
    Identity,
    Linear(Matrix),
    /// Affine chart map `x -> num(x) / den(x)`.
    Rational { num: Vec<Node>, den: Node },
    /// Applied left to right.
    Chain(Vec<Automorphism>),
    /// Finite lookup; places outside the table have no image.
    Table,
}

#[derive(Debug)]
struct AutoInner {
    kind: MapKind,
    special: BTreeMap<Place, Place>,
    label: String,
}

/// A curve automorphism. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Automorphism(Arc<AutoInner>);

/// How an inverse was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InverseKind {
    Identity,
    Matrix,
    /// The map squared is the identity on the supplied places.
    Involution,
    /// Built pointwise from the supplied places.
    Table,
    Chain,
}

impl InverseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InverseKind::Identity => "identity",
            InverseKind::Matrix => "matrix",
            InverseKind::Involution => "involution",
            InverseKind::Table => "table",
            InverseKind::Chain => "chain",
        }
    }
}

impl Automorphism {
    fn from_parts(kind: MapKind, special: BTreeMap<Place, Place>, label: impl Into<String>) -> Self {
        Automorphism(Arc::new(AutoInner {
            kind,
            special,
            label: label.into(),
        }))
    }

    pub fn identity() -> Self {
        Self::from_parts(MapKind::Identity, BTreeMap::new(), "id")
    }

    pub fn linear(m: Matrix, special: BTreeMap<Place, Place>, label: impl Into<String>) -> Self {
        Self::from_parts(MapKind::Linear(m), special, label)
    }

    pub fn rational(
        num: Vec<Node>,
        den: Node,
        special: BTreeMap<Place, Place>,
        label: impl Into<String>,
    ) -> Self {
        Self::from_parts(MapKind::Rational { num, den }, special, label)
    }

    pub fn table(table: BTreeMap<Place, Place>, label: impl Into<String>) -> Self {
        Self::from_parts(MapKind::Table, table, label)
    }

    pub fn kind(&self) -> &MapKind {
        &self.0.kind
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn special_action(&self) -> &BTreeMap<Place, Place> {
        &self.0.special
    }

    pub fn matrix(&self) -> Option<&Matrix> {
        match &self.0.kind {
            MapKind::Linear(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.0.kind, MapKind::Identity)
    }

    pub fn apply(&self, ctx: &FieldCtx, place: &Place) -> Result<Place, AutoError> {
        if let Some(img) = self.0.special.get(place) {
            return Ok(img.clone());
        }
        match (&self.0.kind, place) {
            (MapKind::Identity, _) => Ok(place.clone()),
            (MapKind::Chain(parts), _) => {
                let mut cur = place.clone();
                for p in parts {
                    cur = p.apply(ctx, &cur)?;
                }
                Ok(cur)
            }
            (MapKind::Linear(m), Place::Ordinary(p)) => {
                let img = m.apply(ctx, p.coords());
                Ok(Place::Ordinary(ProjPoint::normalize(ctx, &img)?))
            }
            (MapKind::Rational { num, den }, Place::Ordinary(p)) => {
                if let Some(a) = p.affine(ctx) {
                    let d = den.eval(ctx, &a);
                    if !d.is_zero() {
                        let dinv = ctx.inv(d)?;
                        let img: Vec<FieldElem> =
                            num.iter().map(|n| ctx.mul(n.eval(ctx, &a), dinv)).collect();
                        return Ok(Place::Ordinary(ProjPoint::from_affine(ctx, &img)));
                    }
                }
                Err(self.missing(ctx, place))
            }
            _ => Err(self.missing(ctx, place)),
        }
    }

    fn missing(&self, ctx: &FieldCtx, place: &Place) -> AutoError {
        AutoError::MissingSpecialAction {
            map: self.0.label.clone(),
            place: place.display(ctx),
        }
    }

    fn parts(&self) -> Vec<Automorphism> {
        match &self.0.kind {
            MapKind::Identity => Vec::new(),
            MapKind::Chain(p) => p.clone(),
            _ => vec![self.clone()],
        }
    }

    /// `self ∘ other`: apply `other` first. Adjacent linear factors are
    /// multiplied out so products of linear maps stay linear.
    pub fn compose(&self, ctx: &FieldCtx, other: &Automorphism) -> Automorphism {
        let mut parts: Vec<Automorphism> = Vec::new();
        for p in other.parts().into_iter().chain(self.parts()) {
            if let (Some(last), MapKind::Linear(m2)) = (parts.last(), &p.0.kind) {
                if let MapKind::Linear(m1) = &last.0.kind {
                    let special = last
                        .0
                        .special
                        .iter()
                        .filter_map(|(k, v)| p.apply(ctx, v).ok().map(|img| (k.clone(), img)))
                        .collect();
                    let label = format!("{}∘{}", p.0.label, last.0.label);
                    let merged = Automorphism::linear(m2.mul(ctx, m1), special, label);
                    parts.pop();
                    parts.push(merged);
                    continue;
                }
            }
            parts.push(p);
        }
        match parts.len() {
            0 => Automorphism::identity(),
            1 => parts.pop().unwrap(),
            _ => {
                let label = parts
                    .iter()
                    .rev()
                    .map(|p| p.0.label.as_str())
                    .collect::<Vec<_>>()
                    .join("∘");
                Self::from_parts(MapKind::Chain(parts), BTreeMap::new(), label)
            }
        }
    }

    /// Inverse map. Linear maps invert exactly; other maps are tested for
    /// being involutions on `places`, and otherwise inverted pointwise on
    /// `places` (which must then cover every place the inverse is applied
    /// to).
    pub fn inverse(
        &self,
        ctx: &FieldCtx,
        places: &[Place],
    ) -> Result<(Automorphism, InverseKind), AutoError> {
        let inv_special = |s: &BTreeMap<Place, Place>| -> BTreeMap<Place, Place> {
            s.iter().map(|(k, v)| (v.clone(), k.clone())).collect()
        };
        let label = format!("{}^-1", self.0.label);
        match &self.0.kind {
            MapKind::Identity => Ok((self.clone(), InverseKind::Identity)),
            MapKind::Linear(m) => {
                let mi = m
                    .inverse(ctx)
                    .ok_or_else(|| AutoError::NotInvertible(self.0.label.clone()))?;
                Ok((
                    Automorphism::linear(mi, inv_special(&self.0.special), label),
                    InverseKind::Matrix,
                ))
            }
            MapKind::Table => Ok((
                Automorphism::table(inv_special(&self.0.special), label),
                InverseKind::Table,
            )),
            MapKind::Chain(parts) => {
                let mut out = Automorphism::identity();
                for p in parts {
                    let (pi, _) = p.inverse(ctx, places)?;
                    out = out.compose(ctx, &pi);
                }
                Ok((out, InverseKind::Chain))
            }
            MapKind::Rational { .. } => {
                let mut involution = true;
                let mut table = BTreeMap::new();
                for p in places {
                    let img = self.apply(ctx, p)?;
                    if involution && self.apply(ctx, &img)? != *p {
                        involution = false;
                    }
                    if table.insert(img, p.clone()).is_some() {
                        return Err(AutoError::NotInvertible(self.0.label.clone()));
                    }
                }
                if involution {
                    Ok((self.clone(), InverseKind::Involution))
                } else {
                    Ok((Automorphism::table(table, label), InverseKind::Table))
                }
            }
        }
    }
}

/// Equality as curve automorphisms: projective equality for linear pairs,
/// otherwise agreement on `probes`.
pub fn pgl_equal(ctx: &FieldCtx, a: &Automorphism, b: &Automorphism, probes: &[Place]) -> bool {
    if let (Some(ma), Some(mb)) = (a.matrix(), b.matrix()) {
        return ma.projectively_equal(ctx, mb);
    }
    probes
        .iter()
        .all(|p| matches!((a.apply(ctx, p), b.apply(ctx, p)), (Ok(x), Ok(y)) if x == y))
}

/// The probe places used to tell group elements apart.
#[derive(Debug, PartialEq, Eq)]
pub struct TestSet {
    places: Vec<Place>,
}

impl TestSet {
    pub fn new(mut places: Vec<Place>) -> Arc<TestSet> {
        places.sort_unstable();
        places.dedup();
        Arc::new(TestSet { places })
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }
}

pub type Signature = Arc<[Place]>;

#[derive(Clone, Debug)]
pub struct GroupElem {
    pub map: Automorphism,
    pub sig: Signature,
}

impl GroupElem {
    pub fn new(ctx: &FieldCtx, map: Automorphism, test: &TestSet) -> Result<GroupElem, AutoError> {
        let sig: Result<Vec<Place>, AutoError> =
            test.places.iter().map(|p| map.apply(ctx, p)).collect();
        Ok(GroupElem {
            map,
            sig: sig?.into(),
        })
    }

    pub fn apply(&self, ctx: &FieldCtx, place: &Place) -> Result<Place, AutoError> {
        self.map.apply(ctx, place)
    }
}

/// `a ∘ b` with its signature.
pub fn compose_elems(ctx: &FieldCtx, a: &GroupElem, b: &GroupElem) -> Result<GroupElem, AutoError> {
    let sig: Result<Vec<Place>, AutoError> = b.sig.iter().map(|p| a.map.apply(ctx, p)).collect();
    Ok(GroupElem {
        map: a.map.compose(ctx, &b.map),
        sig: sig?.into(),
    })
}

/// A finite group of automorphisms, elements sorted by signature.
#[derive(Clone, Debug)]
pub struct FiniteAutoGroup {
    elems: Vec<GroupElem>,
    index: HashMap<Signature, usize>,
    test: Arc<TestSet>,
}

pub const DEFAULT_GROUP_CAP: usize = 4096;

impl FiniteAutoGroup {
    fn from_unique(mut elems: Vec<GroupElem>, test: Arc<TestSet>) -> FiniteAutoGroup {
        elems.sort_by(|a, b| a.sig.cmp(&b.sig));
        let index = elems
            .iter()
            .enumerate()
            .map(|(i, e)| (e.sig.clone(), i))
            .collect();
        FiniteAutoGroup { elems, index, test }
    }

    pub fn trivial(test: Arc<TestSet>) -> FiniteAutoGroup {
        let id = GroupElem {
            map: Automorphism::identity(),
            sig: test.places.clone().into(),
        };
        Self::from_unique(vec![id], test)
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn elements(&self) -> &[GroupElem] {
        &self.elems
    }

    pub fn test_set(&self) -> &Arc<TestSet> {
        &self.test
    }

    pub fn position(&self, sig: &[Place]) -> Option<usize> {
        self.index.get(sig).copied()
    }

    pub fn contains(&self, e: &GroupElem) -> bool {
        self.index.contains_key(&e.sig)
    }

    pub fn identity_index(&self) -> usize {
        self.position(&self.test.places)
            .expect("every group contains the identity")
    }

    pub fn is_trivial(&self) -> bool {
        self.elems.len() == 1
    }

    pub fn signatures(&self) -> BTreeSet<Signature> {
        self.elems.iter().map(|e| e.sig.clone()).collect()
    }

    pub fn is_subgroup_of(&self, other: &FiniteAutoGroup) -> bool {
        self.elems.iter().all(|e| other.contains(e))
    }

    pub fn same_elements(&self, other: &FiniteAutoGroup) -> bool {
        self.order() == other.order() && self.is_subgroup_of(other)
    }

    /// Orbit of a place, as a set.
    pub fn orbit(&self, ctx: &FieldCtx, place: &Place) -> Result<BTreeSet<Place>, AutoError> {
        self.elems.iter().map(|e| e.apply(ctx, place)).collect()
    }

    pub fn fixes(&self, ctx: &FieldCtx, place: &Place) -> Result<bool, AutoError> {
        Ok(self.orbit(ctx, place)?.len() == 1)
    }

    /// Order of the element at index `i`.
    pub fn element_order(&self, ctx: &FieldCtx, i: usize) -> Result<usize, AutoError> {
        let g = &self.elems[i];
        let mut cur = g.clone();
        for k in 1..=self.order() {
            if *cur.sig == *self.test.places {
                return Ok(k);
            }
            cur = compose_elems(ctx, g, &cur)?;
        }
        Err(AutoError::NotInvertible(g.map.label().to_string()))
    }

    /// Identity present, every element has finite order (hence an inverse
    /// in the group), products stay in the group and a seeded sample of
    /// triples is associative.
    pub fn verify_axioms(&self, ctx: &FieldCtx, seed: u64) -> Result<bool, AutoError> {
        if self.position(&self.test.places).is_none() {
            return Ok(false);
        }
        for i in 0..self.order() {
            self.element_order(ctx, i)?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx: Vec<usize> = (0..self.order()).collect();
        for _ in 0..16 {
            let pick = |rng: &mut ChaCha8Rng| &self.elems[*idx.choose(rng).unwrap()];
            let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let ab = compose_elems(ctx, a, b)?;
            let bc = compose_elems(ctx, b, c)?;
            let l = compose_elems(ctx, &ab, c)?;
            let r = compose_elems(ctx, a, &bc)?;
            if !self.contains(&ab) || l.sig != r.sig {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn check_same_probes(a: &FiniteAutoGroup, b: &FiniteAutoGroup) -> Result<(), AutoError> {
    if Arc::ptr_eq(&a.test, &b.test) || a.test == b.test {
        Ok(())
    } else {
        Err(AutoError::ProbeMismatch)
    }
}

/// Breadth-first closure of `gens` under left multiplication.
pub fn close_group(
    ctx: &FieldCtx,
    test: &Arc<TestSet>,
    gens: &[Automorphism],
    cap: usize,
) -> Result<FiniteAutoGroup, AutoError> {
    let gens: Vec<GroupElem> = gens
        .iter()
        .map(|g| GroupElem::new(ctx, g.clone(), test))
        .collect::<Result<_, _>>()?;
    let id = GroupElem {
        map: Automorphism::identity(),
        sig: test.places.clone().into(),
    };
    let mut elems = vec![id];
    let mut index: HashMap<Signature, usize> = HashMap::new();
    index.insert(elems[0].sig.clone(), 0);
    let mut head = 0;
    while head < elems.len() {
        let e = elems[head].clone();
        head += 1;
        for g in &gens {
            let n = compose_elems(ctx, g, &e)?;
            if let Some(&j) = index.get(&n.sig) {
                if let (Some(a), Some(b)) = (n.map.matrix(), elems[j].map.matrix()) {
                    if !a.projectively_equal(ctx, b) {
                        return Err(AutoError::UnfaithfulTestSet);
                    }
                }
                continue;
            }
            if elems.len() >= cap {
                return Err(AutoError::GroupTooLarge(cap));
            }
            index.insert(n.sig.clone(), elems.len());
            elems.push(n);
        }
    }
    Ok(FiniteAutoGroup::from_unique(elems, test.clone()))
}

/// `{x g x^-1 : g in G}`, with `x_inv` supplied by the caller.
pub fn conjugate_group(
    ctx: &FieldCtx,
    x: &Automorphism,
    x_inv: &Automorphism,
    g: &FiniteAutoGroup,
) -> Result<FiniteAutoGroup, AutoError> {
    let mut seen = HashSet::new();
    let mut elems = Vec::with_capacity(g.order());
    for e in &g.elems {
        let map = x.compose(ctx, &e.map.compose(ctx, x_inv));
        let c = GroupElem::new(ctx, map, &g.test)?;
        if !seen.insert(c.sig.clone()) {
            return Err(AutoError::UnfaithfulTestSet);
        }
        elems.push(c);
    }
    Ok(FiniteAutoGroup::from_unique(elems, g.test.clone()))
}

pub fn intersect(a: &FiniteAutoGroup, b: &FiniteAutoGroup) -> Result<FiniteAutoGroup, AutoError> {
    check_same_probes(a, b)?;
    let elems: Vec<GroupElem> = a.elems.iter().filter(|e| b.contains(e)).cloned().collect();
    Ok(FiniteAutoGroup::from_unique(elems, a.test.clone()))
}

/// `{ab : a in A, b in B}`, deduplicated and sorted by signature.
pub fn product_set(
    ctx: &FieldCtx,
    a: &FiniteAutoGroup,
    b: &FiniteAutoGroup,
) -> Result<Vec<GroupElem>, AutoError> {
    check_same_probes(a, b)?;
    let mut seen: BTreeMap<Signature, GroupElem> = BTreeMap::new();
    for x in &a.elems {
        for y in &b.elems {
            let p = compose_elems(ctx, x, y)?;
            seen.entry(p.sig.clone()).or_insert(p);
        }
    }
    Ok(seen.into_values().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemidirectVerdict {
    /// HG is not closed under composition.
    NotAGroup,
    /// HG is a group but H is not normal in it.
    NotNormal,
    /// HG is a group with H normal, but H ∩ G ≠ 1.
    NontrivialIntersection,
    Semidirect,
    Direct,
}

impl SemidirectVerdict {
    pub fn is_semidirect(self) -> bool {
        matches!(self, SemidirectVerdict::Semidirect | SemidirectVerdict::Direct)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SemidirectVerdict::NotAGroup => "NotAGroup",
            SemidirectVerdict::NotNormal => "NotNormal",
            SemidirectVerdict::NontrivialIntersection => "NontrivialIntersection",
            SemidirectVerdict::Semidirect => "Semidirect",
            SemidirectVerdict::Direct => "Direct",
        }
    }
}

/// Decides whether `HG = H ⋊ G`, and whether the product is direct.
pub fn semidirect_check(
    ctx: &FieldCtx,
    h: &FiniteAutoGroup,
    g: &FiniteAutoGroup,
) -> Result<SemidirectVerdict, AutoError> {
    check_same_probes(h, g)?;
    let mut hg_all = BTreeSet::new();
    let mut gh_all = BTreeSet::new();
    let mut normal = true;
    let mut commute = true;
    for y in &g.elems {
        let mut gh = BTreeSet::new();
        let mut hg = BTreeSet::new();
        for x in &h.elems {
            let a = compose_elems(ctx, x, y)?.sig;
            let b = compose_elems(ctx, y, x)?.sig;
            commute &= a == b;
            hg.insert(a);
            gh.insert(b);
        }
        normal &= hg == gh;
        hg_all.extend(hg);
        gh_all.extend(gh);
    }
    if hg_all != gh_all {
        return Ok(SemidirectVerdict::NotAGroup);
    }
    if !normal {
        return Ok(SemidirectVerdict::NotNormal);
    }
    if intersect(h, g)?.order() > 1 {
        return Ok(SemidirectVerdict::NontrivialIntersection);
    }
    Ok(if commute {
        SemidirectVerdict::Direct
    } else {
        SemidirectVerdict::Semidirect
    })
}

/// Whether `h` is a normal subgroup of `g`.
pub fn is_normal(ctx: &FieldCtx, h: &FiniteAutoGroup, g: &FiniteAutoGroup) -> Result<bool, AutoError> {
    check_same_probes(h, g)?;
    if !h.is_subgroup_of(g) {
        return Ok(false);
    }
    for y in &g.elems {
        let mut left = BTreeSet::new();
        let mut right = BTreeSet::new();
        for x in &h.elems {
            left.insert(compose_elems(ctx, y, x)?.sig);
            right.insert(compose_elems(ctx, x, y)?.sig);
        }
        if left != right {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Cosets of a normal subgroup with their induced multiplication.
#[derive(Clone, Debug)]
pub struct Quotient {
    /// Member indices into the parent group; the first is the
    /// representative (least signature).
    pub cosets: Vec<Vec<usize>>,
    /// `table[i][j]` = coset of `rep_i ∘ rep_j`.
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
}

impl Quotient {
    pub fn order(&self) -> usize {
        self.cosets.len()
    }

    pub fn rep(&self, i: usize) -> usize {
        self.cosets[i][0]
    }
}

/// Right cosets `Hg`, which coincide with left cosets since H is normal.
pub fn quotient_group(
    ctx: &FieldCtx,
    g: &FiniteAutoGroup,
    h: &FiniteAutoGroup,
) -> Result<Quotient, AutoError> {
    if !is_normal(ctx, h, g)? {
        return Err(AutoError::NotNormal);
    }
    let mut coset_of = vec![usize::MAX; g.order()];
    let mut cosets: Vec<Vec<usize>> = Vec::new();
    for i in 0..g.order() {
        if coset_of[i] != usize::MAX {
            continue;
        }
        let mut members = Vec::with_capacity(h.order());
        for x in &h.elems {
            let p = compose_elems(ctx, x, &g.elems[i])?;
            let j = g.position(&p.sig).ok_or(AutoError::NotNormal)?;
            coset_of[j] = cosets.len();
            members.push(j);
        }
        members.sort_unstable();
        members.dedup();
        cosets.push(members);
    }
    let n = cosets.len();
    let mut table = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in 0..n {
            let p = compose_elems(ctx, &g.elems[cosets[a][0]], &g.elems[cosets[b][0]])?;
            let j = g.position(&p.sig).ok_or(AutoError::NotNormal)?;
            table[a][b] = coset_of[j];
            // well defined: another pair of members lands in the same coset
            let a2 = *cosets[a].last().unwrap();
            let b2 = *cosets[b].last().unwrap();
            let p2 = compose_elems(ctx, &g.elems[a2], &g.elems[b2])?;
            let j2 = g.position(&p2.sig).ok_or(AutoError::NotNormal)?;
            if coset_of[j2] != coset_of[j] {
                return Err(AutoError::NotNormal);
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                assert_eq!(
                    table[table[a][b]][c],
                    table[a][table[b][c]],
                    "induced coset multiplication must be associative"
                );
            }
        }
    }
    let identity = coset_of[g.identity_index()];
    Ok(Quotient {
        cosets,
        table,
        identity,
    })
}
