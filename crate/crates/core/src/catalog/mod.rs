//! Scenario catalog: declarative descriptions, their compilation into
//! curves, maps and witnesses, and the built-in families.

mod builtin;
mod doc;
mod model;
mod perturb;

use std::collections::BTreeMap;

use num_integer::Integer;
use thiserror::Error;

use crate::autos::{AutoError, Automorphism, Matrix};
use crate::criterion::{WValue, Witness};
use crate::expr::{
    compile_str, const_value, eval_int, expand_univariate, parse, parse_equation, Ast, ExprError,
    Node, Scope,
};
use crate::geometry::{CurveModel, EnumStep, GeometryError, Place, ProjPoint, SpecialPlace};
use crate::gf::{AdditivePoly, FieldCtx, FieldElem, GfError};

pub use builtin::{
    builtin_names, fermat_quartic, gk, hermitian, skabelund_ree, skabelund_suzuki, ReeConfig,
};
pub use doc::{
    CrossCheckDoc, CurveDoc, ExpectDoc, FamilyDoc, FieldDoc, GenDoc, GroupDoc, MapDoc,
    ModelCheckDoc, ScenarioDoc, SpecialDoc, StepDoc, WitnessDoc,
};
pub use model::{quotient_model_check, ModelCheck};
pub use perturb::{perturb, Perturbation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("parameter violation: {0}")]
    ParamViolation(String),
    #[error("scenario `{0}` needs externally supplied generators")]
    MissingGenerators(String),
    #[error("constant `{0}` does not exist in the ambient field")]
    ConstantUnavailable(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Auto(#[from] AutoError),
}

/// How a group is obtained once the probe set is known.
#[derive(Clone, Debug)]
pub enum GroupSpec {
    Trivial,
    Generators(Vec<Automorphism>),
    /// `xi G1 xi^-1`.
    Conjugate { name: String, xi: Automorphism },
    SameAsG1,
    TwoPartOfJoin,
}

#[derive(Clone, Debug)]
pub enum PlaceSpec {
    Fixed(Place),
    /// The least sample place not rational over the test degree.
    Generic,
}

#[derive(Clone, Debug)]
pub enum CrossCheck {
    RationalPlaces(u32),
    Section { coord: usize, name: String },
}

/// A compiled scenario, ready for the pipeline.
#[derive(Debug)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub ctx: FieldCtx,
    pub test_degree: u32,
    pub sample_degree: u32,
    pub generic_probes: usize,
    pub curve: CurveModel,
    pub maps: BTreeMap<String, Automorphism>,
    pub g1: GroupSpec,
    pub g2: GroupSpec,
    pub h: GroupSpec,
    pub p1: Place,
    pub p2: PlaceSpec,
    pub w1: Witness,
    /// `None` means the pullback of `w1` along the inverse of the
    /// conjugating map.
    pub w2: Option<Witness>,
    pub cross_checks: Vec<CrossCheck>,
    pub model_check: Option<ModelCheck>,
    names: Names,
}

pub const DEFAULT_GENERIC_PROBES: usize = 24;

/// Smallest multiple of `base` with `p^d >= 4 * bound`.
pub fn default_sample_degree(p: u64, base: u32, bound: usize) -> u32 {
    let target = 4.0 * bound.max(1) as f64;
    let mut d = base;
    while (p as f64).powi(d as i32) < target {
        d += base;
    }
    d
}

/// `(p, k)` with `q = p^k`, if `q` is a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut k = 0;
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

/// Least `e >= 1` with `p^e = 1 mod n`; 1 for `n = 1`.
pub fn order_mod(p: u64, n: u64) -> Option<u32> {
    if n == 1 {
        return Some(1);
    }
    if p.gcd(&n) != 1 {
        return None;
    }
    let mut acc = p % n;
    for e in 1..=n as u32 {
        if acc == 1 {
            return Some(e);
        }
        acc = acc * p % n;
    }
    None
}

#[derive(Debug)]
struct Names {
    params: BTreeMap<String, i64>,
    consts: BTreeMap<String, FieldElem>,
    defs: BTreeMap<String, Ast>,
}

impl Names {
    fn scope<'a>(&'a self, ctx: &'a FieldCtx, vars: &'a [String]) -> Scope<'a> {
        Scope {
            ctx,
            params: &self.params,
            consts: &self.consts,
            defs: &self.defs,
            vars,
        }
    }
}

fn int_expr(src: &str, params: &BTreeMap<String, i64>) -> Result<i64, CatalogError> {
    eval_int(&parse(src)?, params)
        .ok_or_else(|| CatalogError::Invalid(format!("`{src}` is not an integer expression")))
}

fn resolve_constant(
    ctx: &FieldCtx,
    names: &Names,
    spec: &str,
) -> Result<(String, FieldElem), CatalogError> {
    let (name, rest) = spec
        .split_once(':')
        .ok_or_else(|| CatalogError::Invalid(format!("constant `{spec}` lacks `name:`")))?;
    let name = name.trim().to_string();
    let rest = rest.trim();
    if let Some(n) = rest.strip_prefix("primitive") {
        let n = int_expr(n.trim(), &names.params)?;
        let v = u64::try_from(n)
            .ok()
            .and_then(|n| ctx.primitive_root_of_unity(n))
            .ok_or_else(|| CatalogError::ConstantUnavailable(spec.to_string()))?;
        return Ok((name, v));
    }
    let (eq, k) = match rest.rsplit_once('@') {
        Some((eq, k)) => (
            eq.trim(),
            k.trim()
                .parse::<usize>()
                .map_err(|_| CatalogError::Invalid(format!("bad root index in `{spec}`")))?,
        ),
        None => (rest, 0),
    };
    if ctx.size() as u64 > ctx.scan_cap() {
        return Err(CatalogError::ConstantUnavailable(spec.to_string()));
    }
    let vars = [name.clone()];
    let poly = crate::expr::compile(&parse_equation(eq)?, &names.scope(ctx, &vars))?;
    let roots: Vec<FieldElem> = (0..ctx.size())
        .map(|i| ctx.from_index(i))
        .filter(|&x| poly.eval(ctx, &[x]).is_zero())
        .collect();
    let v = roots
        .get(k)
        .copied()
        .ok_or_else(|| CatalogError::ConstantUnavailable(spec.to_string()))?;
    Ok((name, v))
}

fn var_index(vars: &[String], v: &str) -> Result<usize, CatalogError> {
    vars.iter()
        .position(|x| x == v)
        .ok_or_else(|| CatalogError::Invalid(format!("unknown variable `{v}`")))
}

/// Parses `(a:b:c)` or a registered special tag.
pub fn parse_place(
    ctx: &FieldCtx,
    scope: &Scope,
    curve: &CurveModel,
    src: &str,
) -> Result<Place, CatalogError> {
    let s = src.trim();
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let coords: Vec<FieldElem> = inner
            .split(':')
            .map(|c| const_value(c.trim(), scope))
            .collect::<Result<_, _>>()?;
        if coords.len() != curve.dim() {
            return Err(GeometryError::DimensionMismatch {
                got: coords.len(),
                want: curve.dim(),
            }
            .into());
        }
        return Ok(Place::Ordinary(ProjPoint::normalize(ctx, &coords)?));
    }
    if curve.is_registered(s) {
        Ok(Place::special(s))
    } else {
        Err(GeometryError::UnknownSpecial(s.to_string()).into())
    }
}

struct Builder<'a> {
    ctx: &'a FieldCtx,
    names: Names,
    curve: CurveModel,
}

impl Builder<'_> {
    fn place(&self, src: &str) -> Result<Place, CatalogError> {
        parse_place(self.ctx, &self.names.scope(self.ctx, &[]), &self.curve, src)
    }

    fn special_table(
        &self,
        src: &BTreeMap<String, String>,
    ) -> Result<BTreeMap<Place, Place>, CatalogError> {
        src.iter()
            .map(|(k, v)| Ok((self.place(k)?, self.place(v)?)))
            .collect()
    }

    fn matrix(&self, names: &Names, rows: &[Vec<String>]) -> Result<Matrix, CatalogError> {
        let n = self.curve.dim();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(CatalogError::Invalid(format!("matrix must be {n}x{n}")));
        }
        let scope = names.scope(self.ctx, &[]);
        let entries = rows
            .iter()
            .flatten()
            .map(|e| const_value(e, &scope))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Matrix::new(n, entries))
    }

    fn map(&self, name: &str, m: &MapDoc) -> Result<Automorphism, CatalogError> {
        let special = self.special_table(&m.special_action)?;
        let label = m.label.clone().unwrap_or_else(|| name.to_string());
        match (&m.linear, &m.rational) {
            (Some(rows), None) => Ok(Automorphism::linear(
                self.matrix(&self.names, rows)?,
                special,
                label,
            )),
            (None, Some(num)) => {
                let scope = self.names.scope(self.ctx, &self.curve.affine_vars);
                if num.len() != self.curve.affine_vars.len() {
                    return Err(CatalogError::Invalid(format!(
                        "rational map `{name}` needs one component per affine variable"
                    )));
                }
                let num = num
                    .iter()
                    .map(|s| compile_str(s, &scope))
                    .collect::<Result<Vec<_>, _>>()?;
                let den = compile_str(m.den.as_deref().unwrap_or("1"), &scope)?;
                Ok(Automorphism::rational(num, den, special, label))
            }
            _ => Err(CatalogError::Invalid(format!(
                "map `{name}` must be exactly one of linear or rational"
            ))),
        }
    }

    fn family(&self, f: &FamilyDoc) -> Result<Vec<Automorphism>, CatalogError> {
        let range = self.ctx.subfield_elements(f.range)?;
        let special = self.special_table(&f.special_action)?;
        let k = f.params.len();
        let total = range.len().checked_pow(k as u32).unwrap_or(usize::MAX);
        if total > 1 << 20 {
            return Err(CatalogError::Invalid("family parameter space too large".into()));
        }
        let mut out = Vec::new();
        let mut names = Names {
            params: self.names.params.clone(),
            consts: self.names.consts.clone(),
            defs: self.names.defs.clone(),
        };
        for idx in 0..total {
            let mut r = idx;
            let mut label = Vec::with_capacity(k);
            for p in &f.params {
                let v = range[r % range.len()];
                r /= range.len();
                names.consts.insert(p.clone(), v);
                label.push(format!("{p}={}", self.ctx.display(v)));
            }
            if let Some(c) = &f.condition {
                if !const_value(c, &names.scope(self.ctx, &[]))?.is_zero() {
                    continue;
                }
            }
            let m = self.matrix(&names, &f.linear)?;
            out.push(Automorphism::linear(m, special.clone(), label.join(",")));
        }
        Ok(out)
    }

    fn generators(
        &self,
        gens: &[GenDoc],
        maps: &BTreeMap<String, Automorphism>,
    ) -> Result<Vec<Automorphism>, CatalogError> {
        let mut out = Vec::new();
        for (i, g) in gens.iter().enumerate() {
            match g {
                GenDoc::Named(n) => out.push(
                    maps.get(n)
                        .cloned()
                        .ok_or_else(|| CatalogError::Invalid(format!("unknown map `{n}`")))?,
                ),
                GenDoc::Family { family } => out.extend(self.family(family)?),
                GenDoc::Inline(m) => out.push(self.map(&format!("gen{i}"), m)?),
            }
        }
        Ok(out)
    }

    fn group(
        &self,
        g: &GroupDoc,
        maps: &BTreeMap<String, Automorphism>,
        which: &str,
    ) -> Result<GroupSpec, CatalogError> {
        let set = [
            !g.generators.is_empty(),
            g.conjugate_of_g1_by.is_some(),
            g.same_as_g1,
            g.two_part_of_join,
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if set > 1 {
            return Err(CatalogError::Invalid(format!(
                "{which} must use a single construction"
            )));
        }
        if let Some(name) = &g.conjugate_of_g1_by {
            let xi = maps
                .get(name)
                .cloned()
                .ok_or_else(|| CatalogError::Invalid(format!("unknown map `{name}`")))?;
            return Ok(GroupSpec::Conjugate {
                name: name.clone(),
                xi,
            });
        }
        if g.same_as_g1 {
            return Ok(GroupSpec::SameAsG1);
        }
        if g.two_part_of_join {
            return Ok(GroupSpec::TwoPartOfJoin);
        }
        let gens = self.generators(&g.generators, maps)?;
        Ok(if gens.is_empty() {
            GroupSpec::Trivial
        } else {
            GroupSpec::Generators(gens)
        })
    }

    fn witness(&self, w: &WitnessDoc, label: &str) -> Result<Witness, CatalogError> {
        let scope = self.names.scope(self.ctx, &self.curve.proj_vars);
        let num = compile_str(&w.num, &scope)?;
        let den = compile_str(&w.den, &scope)?;
        let cscope = self.names.scope(self.ctx, &[]);
        let mut values = BTreeMap::new();
        for (k, v) in &w.values {
            let val = match v.trim() {
                "pole" => WValue::Pole,
                other => WValue::Finite(const_value(other, &cscope)?),
            };
            values.insert(self.place(k)?, val);
        }
        Ok(Witness::Ratio {
            num,
            den,
            values,
            label: format!("{label}={}/{}", w.num, w.den),
        })
    }
}

fn build_curve(ctx: &FieldCtx, names: &Names, c: &CurveDoc) -> Result<CurveModel, CatalogError> {
    if c.proj_vars.len() != c.affine_vars.len() + 1 {
        return Err(CatalogError::Invalid(
            "projective coordinates must be one more than affine ones".into(),
        ));
    }
    let ascope = names.scope(ctx, &c.affine_vars);
    let pscope = names.scope(ctx, &c.proj_vars);
    let equations = c
        .equations
        .iter()
        .map(|e| Ok(crate::expr::compile(&parse_equation(e)?, &ascope)?))
        .collect::<Result<Vec<Node>, CatalogError>>()?;
    let homogeneous = c
        .homogeneous
        .iter()
        .map(|e| Ok(crate::expr::compile(&parse_equation(e)?, &pscope)?))
        .collect::<Result<Vec<Node>, CatalogError>>()?;
    let specials: Vec<SpecialPlace> = c
        .special
        .iter()
        .map(|s| SpecialPlace {
            tag: s.tag.clone(),
            degree: s.degree,
        })
        .collect();
    let mut steps = Vec::new();
    for s in &c.enumerate {
        let var = var_index(&c.affine_vars, &s.var)?;
        let rhs = || -> Result<Node, CatalogError> {
            let r = s
                .rhs
                .as_deref()
                .ok_or_else(|| CatalogError::Invalid(format!("step for `{}` lacks rhs", s.var)))?;
            Ok(compile_str(r, &ascope)?)
        };
        let step = match (&s.additive, &s.power) {
            (None, None) => EnumStep::Free { var },
            (Some(a), None) => {
                let uni = expand_univariate(&compile_str(a, &ascope)?, var, ctx)?;
                let terms: Vec<(FieldElem, u64)> = uni.iter().map(|(&e, &c)| (c, e)).collect();
                EnumStep::Additive {
                    var,
                    poly: AdditivePoly::from_exponents(ctx, &terms)?,
                    rhs: rhs()?,
                }
            }
            (None, Some(n)) => {
                let n = int_expr(n, &names.params)?;
                if n < 1 {
                    return Err(CatalogError::Invalid(format!("power {n} for `{}`", s.var)));
                }
                EnumStep::Power {
                    var,
                    n: n as u64,
                    rhs: rhs()?,
                }
            }
            _ => {
                return Err(CatalogError::Invalid(format!(
                    "step for `{}` is both additive and a power",
                    s.var
                )))
            }
        };
        steps.push(step);
    }
    let mut curve = CurveModel {
        name: String::new(),
        proj_vars: c.proj_vars.clone(),
        affine_vars: c.affine_vars.clone(),
        equations,
        equation_src: c.equations.clone(),
        homogeneous,
        at_infinity: Vec::new(),
        specials,
        steps,
    };
    curve.validate_steps().map_err(CatalogError::Invalid)?;
    let cscope = names.scope(ctx, &[]);
    for s in &c.at_infinity {
        match parse_place(ctx, &cscope, &curve, s)? {
            Place::Ordinary(p) if !p.is_affine() => curve.at_infinity.push(p),
            _ => {
                return Err(CatalogError::Invalid(format!(
                    "`{s}` is not a point off the affine chart"
                )))
            }
        }
    }
    Ok(curve)
}

impl Scenario {
    pub fn from_doc(doc: ScenarioDoc) -> Result<Scenario, CatalogError> {
        Self::from_doc_with(doc, None)
    }

    /// Compiles `doc`; `sample_degree` overrides the declared or default
    /// sample degree.
    pub fn from_doc_with(
        doc: ScenarioDoc,
        sample_degree: Option<u32>,
    ) -> Result<Scenario, CatalogError> {
        let f = &doc.field;
        if f.degrees.is_empty() || f.degrees.contains(&0) {
            return Err(CatalogError::Invalid("field degrees must be positive".into()));
        }
        let test_degree = doc.test_degree.unwrap_or(f.degrees[0]);
        let base = f
            .degrees
            .iter()
            .fold(test_degree, |acc, &d| acc.lcm(&d));
        let bound = doc.expect.g1_order.unwrap_or(1) * doc.expect.h_order.unwrap_or(1);
        let sample_degree = sample_degree
            .or(doc.sample_degree)
            .unwrap_or_else(|| default_sample_degree(f.p, base, bound));
        if !sample_degree.is_multiple_of(test_degree) {
            return Err(CatalogError::Invalid(format!(
                "sample degree {sample_degree} is not a multiple of test degree {test_degree}"
            )));
        }
        let mut degrees = f.degrees.clone();
        degrees.extend([test_degree, sample_degree]);
        let ctx = FieldCtx::build(f.p, &degrees)?;

        let mut names = Names {
            params: doc.params.clone(),
            consts: BTreeMap::new(),
            defs: doc
                .defs
                .iter()
                .map(|(k, v)| Ok((k.clone(), parse(v)?)))
                .collect::<Result<_, ExprError>>()?,
        };
        for c in &f.constants {
            let (name, v) = resolve_constant(&ctx, &names, c)?;
            names.consts.insert(name, v);
        }
        let mut curve = build_curve(&ctx, &names, &doc.curve)?;
        curve.name = doc.name.clone();
        let b = Builder {
            ctx: &ctx,
            names,
            curve,
        };

        let mut maps = BTreeMap::new();
        for (name, m) in &doc.maps {
            maps.insert(name.clone(), b.map(name, m)?);
        }
        let g1 = b.group(&doc.g1, &maps, "G1")?;
        if !matches!(g1, GroupSpec::Generators(_)) {
            return Err(CatalogError::Invalid("G1 must be given by generators".into()));
        }
        let g2 = b.group(&doc.g2, &maps, "G2")?;
        if matches!(g2, GroupSpec::TwoPartOfJoin) {
            return Err(CatalogError::Invalid("G2 cannot be a two-part of a join".into()));
        }
        let h = match &doc.h {
            Some(h) => b.group(h, &maps, "H")?,
            None => GroupSpec::Trivial,
        };
        if matches!(h, GroupSpec::Conjugate { .. }) {
            return Err(CatalogError::Invalid("H cannot be a conjugate of G1".into()));
        }
        let p1 = b.place(&doc.p1)?;
        let p2 = match doc.p2.trim() {
            "@generic" => PlaceSpec::Generic,
            s => PlaceSpec::Fixed(b.place(s)?),
        };
        let w1 = b.witness(&doc.w1, "w1")?;
        let w2 = doc.w2.as_ref().map(|w| b.witness(w, "w2")).transpose()?;
        if w2.is_none() && !matches!(g2, GroupSpec::Conjugate { .. } | GroupSpec::SameAsG1) {
            return Err(CatalogError::Invalid(
                "w2 is required unless G2 is a conjugate of G1".into(),
            ));
        }
        let mut cross_checks = Vec::new();
        for c in &doc.cross_checks {
            match (c.rational_places, &c.section) {
                (Some(d), None) => cross_checks.push(CrossCheck::RationalPlaces(d)),
                (None, Some(v)) => cross_checks.push(CrossCheck::Section {
                    coord: var_index(&b.curve.proj_vars, v)?,
                    name: v.clone(),
                }),
                _ => return Err(CatalogError::Invalid("malformed cross check".into())),
            }
        }
        let model_check = doc
            .model_check
            .as_ref()
            .map(|m| ModelCheck::compile(&b.names.scope(&ctx, &[]), &b.curve, m))
            .transpose()?;
        let Builder { names, curve, .. } = b;
        Ok(Scenario {
            generic_probes: doc.generic_probes.unwrap_or(DEFAULT_GENERIC_PROBES),
            test_degree,
            sample_degree,
            curve,
            maps,
            g1,
            g2,
            h,
            p1,
            p2,
            w1,
            w2,
            cross_checks,
            model_check,
            names,
            ctx,
            doc,
        })
    }

    pub fn name(&self) -> &str {
        &self.doc.name
    }

    /// Parses a place using the scenario's parameters and constants.
    pub fn place(&self, src: &str) -> Result<Place, CatalogError> {
        parse_place(&self.ctx, &self.names.scope(&self.ctx, &[]), &self.curve, src)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
        assert_eq!(prime_power(13), Some((13, 1)));
    }

    #[test]
    fn multiplicative_orders() {
        assert_eq!(order_mod(3, 7), Some(6));
        assert_eq!(order_mod(2, 5), Some(4));
        assert_eq!(order_mod(3, 19), Some(18));
        assert_eq!(order_mod(2, 1), Some(1));
        assert_eq!(order_mod(3, 6), None);
    }

    #[test]
    fn sample_degree_rule() {
        assert_eq!(default_sample_degree(2, 2, 24), 8);
        assert_eq!(default_sample_degree(3, 6, 27 * 7), 12);
        assert_eq!(default_sample_degree(7, 2, 6), 2);
        assert_eq!(default_sample_degree(3, 3, 3), 3);
    }
}
