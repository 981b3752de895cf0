//! Projective points, places of smooth models and rational-place
//! enumeration.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::Node;
use crate::gf::{AdditivePoly, AdditiveSolver, FieldCtx, FieldElem, GfError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("zero vector is not a projective point")]
    ZeroVector,
    #[error("point has {got} coordinates, curve lives in {want}-space")]
    DimensionMismatch { got: usize, want: usize },
    #[error("unknown special place `{0}`")]
    UnknownSpecial(String),
    #[error("malformed place `{0}`")]
    BadPlace(String),
    #[error(transparent)]
    Gf(#[from] GfError),
}

/// A normalized point of P^n, n <= 4: the leftmost nonzero coordinate is 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ProjPoint {
    len: u8,
    coords: [FieldElem; 5],
}

impl ProjPoint {
    pub fn normalize(ctx: &FieldCtx, raw: &[FieldElem]) -> Result<ProjPoint, GeometryError> {
        assert!((1..=5).contains(&raw.len()), "projective points have 1 to 5 coordinates");
        let lead = raw
            .iter()
            .find(|c| !c.is_zero())
            .ok_or(GeometryError::ZeroVector)?;
        let inv = ctx.inv(*lead)?;
        let mut coords = [FieldElem::ZERO; 5];
        for (o, &c) in coords.iter_mut().zip(raw) {
            *o = ctx.mul(c, inv);
        }
        Ok(ProjPoint {
            len: raw.len() as u8,
            coords,
        })
    }

    /// Point of the chart "last coordinate = 1".
    pub fn from_affine(ctx: &FieldCtx, affine: &[FieldElem]) -> ProjPoint {
        let mut raw = affine.to_vec();
        raw.push(ctx.one());
        Self::normalize(ctx, &raw).expect("last coordinate is 1")
    }

    pub fn coords(&self) -> &[FieldElem] {
        &self.coords[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_affine(&self) -> bool {
        !self.coords[self.len as usize - 1].is_zero()
    }

    /// Affine coordinates on the chart "last coordinate = 1".
    pub fn affine(&self, ctx: &FieldCtx) -> Option<Vec<FieldElem>> {
        let last = self.coords[self.len as usize - 1];
        let inv = ctx.inv(last).ok()?;
        Some(
            self.coords()[..self.len as usize - 1]
                .iter()
                .map(|&c| ctx.mul(c, inv))
                .collect(),
        )
    }

    /// Smallest extension degree containing every coordinate.
    pub fn degree(&self, ctx: &FieldCtx) -> u32 {
        self.coords()
            .iter()
            .map(|&c| ctx.degree_of(c))
            .fold(1, num_integer::lcm)
    }

    pub fn display(&self, ctx: &FieldCtx) -> String {
        let parts: Vec<String> = self.coords().iter().map(|&c| ctx.display(c)).collect();
        format!("({})", parts.join(":"))
    }
}

/// A place of the smooth model: an ordinary projective point, or a
/// symbolic place registered by the curve.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Place {
    Ordinary(ProjPoint),
    Special(Arc<str>),
}

impl Place {
    pub fn special(tag: &str) -> Place {
        Place::Special(Arc::from(tag))
    }

    pub fn point(&self) -> Option<&ProjPoint> {
        match self {
            Place::Ordinary(p) => Some(p),
            Place::Special(_) => None,
        }
    }

    pub fn display(&self, ctx: &FieldCtx) -> String {
        match self {
            Place::Ordinary(p) => p.display(ctx),
            Place::Special(t) => t.to_string(),
        }
    }

    /// Display-independent key: the raw coordinate indices.
    pub fn key(&self) -> PlaceKey<'_> {
        PlaceKey(self)
    }
}

/// Formats a place without a field context (coordinate indices).
pub struct PlaceKey<'a>(&'a Place);

impl fmt::Display for PlaceKey<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Place::Ordinary(p) => {
                let parts: Vec<String> = p.coords().iter().map(|c| c.index().to_string()).collect();
                write!(f, "[{}]", parts.join(","))
            }
            Place::Special(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialPlace {
    pub tag: String,
    /// The place is rational over GF(p^d) whenever `degree | d`.
    pub degree: u32,
}

/// One step of the enumeration chain on the affine chart.
#[derive(Clone, Debug)]
pub enum EnumStep {
    /// Variable runs over the whole subfield.
    Free { var: usize },
    /// `L(var) = rhs` with `L` additive.
    Additive { var: usize, poly: AdditivePoly, rhs: Node },
    /// `var^n = rhs`.
    Power { var: usize, n: u64, rhs: Node },
}

impl EnumStep {
    fn var(&self) -> usize {
        match self {
            EnumStep::Free { var } | EnumStep::Additive { var, .. } | EnumStep::Power { var, .. } => {
                *var
            }
        }
    }
}

/// A curve in P^2 or P^3 given on the chart "last coordinate = 1", with
/// declared points off that chart and symbolic special places.
#[derive(Clone, Debug)]
pub struct CurveModel {
    pub name: String,
    pub proj_vars: Vec<String>,
    pub affine_vars: Vec<String>,
    pub equations: Vec<Node>,
    pub equation_src: Vec<String>,
    /// Homogeneous equations in `proj_vars`, used off the affine chart.
    pub homogeneous: Vec<Node>,
    pub at_infinity: Vec<ProjPoint>,
    pub specials: Vec<SpecialPlace>,
    pub steps: Vec<EnumStep>,
}

impl CurveModel {
    pub fn dim(&self) -> usize {
        self.proj_vars.len()
    }

    pub fn is_registered(&self, tag: &str) -> bool {
        self.specials.iter().any(|s| s.tag == tag)
    }

    pub fn on_curve(&self, ctx: &FieldCtx, place: &Place) -> Result<bool, GeometryError> {
        match place {
            Place::Special(t) => Ok(self.is_registered(t)),
            Place::Ordinary(p) => {
                if p.len() != self.dim() {
                    return Err(GeometryError::DimensionMismatch {
                        got: p.len(),
                        want: self.dim(),
                    });
                }
                if let Some(a) = p.affine(ctx) {
                    Ok(self.equations.iter().all(|e| e.eval(ctx, &a).is_zero()))
                } else if !self.homogeneous.is_empty() {
                    Ok(self
                        .homogeneous
                        .iter()
                        .all(|e| e.eval(ctx, p.coords()).is_zero()))
                } else {
                    Ok(self.at_infinity.contains(p))
                }
            }
        }
    }

    /// Checks the enumeration chain covers every affine variable exactly
    /// once and starts with a free variable.
    pub fn validate_steps(&self) -> Result<(), String> {
        let mut seen = vec![false; self.affine_vars.len()];
        for (i, s) in self.steps.iter().enumerate() {
            let v = s.var();
            if v >= seen.len() || seen[v] {
                return Err(format!("enumeration step {i} repeats or misnames a variable"));
            }
            if let EnumStep::Additive { rhs, .. } | EnumStep::Power { rhs, .. } = s {
                if let Some(m) = rhs.max_var() {
                    let later = self.steps[i..].iter().any(|t| t.var() == m);
                    if later {
                        return Err(format!(
                            "step for `{}` uses `{}` before it is solved",
                            self.affine_vars[v], self.affine_vars[m]
                        ));
                    }
                }
            }
            seen[v] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err("enumeration chain misses a variable".into());
        }
        if !matches!(self.steps.first(), Some(EnumStep::Free { .. })) {
            return Err("enumeration chain must start with a free variable".into());
        }
        Ok(())
    }

    /// All places rational over GF(p^d): affine solutions of the chain that
    /// satisfy every equation, declared points at infinity with coordinates
    /// in GF(p^d), and special places of degree dividing d. Sorted.
    pub fn enumerate_places(&self, ctx: &FieldCtx, d: u32) -> Result<Vec<Place>, GeometryError> {
        if !ctx.is_subfield(d) {
            return Err(GfError::NotASubfield(d).into());
        }
        let mut solvers: BTreeMap<usize, AdditiveSolver> = BTreeMap::new();
        for (i, s) in self.steps.iter().enumerate() {
            if let EnumStep::Additive { poly, .. } = s {
                solvers.insert(i, AdditiveSolver::new(ctx, poly, d)?);
            }
        }
        let scope = ctx.subfield_elements(d)?;
        let nvars = self.affine_vars.len();
        let EnumStep::Free { var: first } = self.steps[0] else {
            unreachable!("validated chain starts with a free variable");
        };
        let chunks: Result<Vec<Vec<ProjPoint>>, GeometryError> = scope
            .par_iter()
            .map(|&v0| {
                let mut vals = vec![FieldElem::ZERO; nvars];
                vals[first] = v0;
                let mut out = Vec::new();
                self.extend(ctx, d, &scope, &solvers, 1, &mut vals, &mut out)?;
                Ok(out)
            })
            .collect();
        let mut places: Vec<Place> = chunks?
            .into_iter()
            .flatten()
            .map(Place::Ordinary)
            .collect();
        for p in &self.at_infinity {
            if p.coords().iter().all(|&c| ctx.in_subfield(c, d)) {
                places.push(Place::Ordinary(*p));
            }
        }
        for s in &self.specials {
            if d.is_multiple_of(s.degree) {
                places.push(Place::special(&s.tag));
            }
        }
        places.sort_unstable();
        places.dedup();
        Ok(places)
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        ctx: &FieldCtx,
        d: u32,
        scope: &[FieldElem],
        solvers: &BTreeMap<usize, AdditiveSolver>,
        step: usize,
        vals: &mut Vec<FieldElem>,
        out: &mut Vec<ProjPoint>,
    ) -> Result<(), GeometryError> {
        if step == self.steps.len() {
            if self.equations.iter().all(|e| e.eval(ctx, vals).is_zero()) {
                out.push(ProjPoint::from_affine(ctx, vals));
            }
            return Ok(());
        }
        let candidates = match &self.steps[step] {
            EnumStep::Free { .. } => scope.to_vec(),
            EnumStep::Additive { rhs, .. } => solvers[&step].solve(ctx, rhs.eval(ctx, vals)),
            EnumStep::Power { n, rhs, .. } => ctx.solve_power_in(*n, rhs.eval(ctx, vals), d)?,
        };
        let var = self.steps[step].var();
        for c in candidates {
            vals[var] = c;
            self.extend(ctx, d, scope, solvers, step + 1, vals, out)?;
        }
        vals[var] = FieldElem::ZERO;
        Ok(())
    }
}
