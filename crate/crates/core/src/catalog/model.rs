//! Comparison of the quotient by H with a declared plane model.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;

use super::{CatalogError, ModelCheckDoc};
use crate::autos::{AutoError, FiniteAutoGroup};
use crate::criterion::Condition;
use crate::expr::{compile_str, Node, Scope};
use crate::geometry::{CurveModel, Place};
use crate::gf::{FieldCtx, FieldElem};

#[derive(Clone, Debug)]
pub struct ModelCheck {
    pub coords: Vec<(Node, Node)>,
    pub model: Node,
    pub source: String,
    pub degenerate: bool,
}

impl ModelCheck {
    pub(crate) fn compile(
        consts: &Scope,
        curve: &CurveModel,
        doc: &ModelCheckDoc,
    ) -> Result<ModelCheck, CatalogError> {
        let pscope = Scope {
            vars: &curve.proj_vars,
            ..*consts
        };
        let coords = doc
            .coords
            .iter()
            .map(|[n, d]| Ok((compile_str(n, &pscope)?, compile_str(d, &pscope)?)))
            .collect::<Result<Vec<_>, CatalogError>>()?;
        if coords.len() != doc.model_vars.len() {
            return Err(CatalogError::Invalid(
                "model check needs one coordinate per model variable".into(),
            ));
        }
        let mscope = Scope {
            vars: &doc.model_vars,
            ..*consts
        };
        let model = crate::expr::compile(&crate::expr::parse_equation(&doc.model)?, &mscope)?;
        Ok(ModelCheck {
            coords,
            model,
            source: doc.model.clone(),
            degenerate: doc.degenerate,
        })
    }

    /// Image in the model: `Ok(None)` when some coordinate has a pole,
    /// otherwise `Err(())` when some coordinate is 0/0.
    fn image(&self, ctx: &FieldCtx, place: &Place) -> Result<Option<Vec<FieldElem>>, ()> {
        let Place::Ordinary(p) = place else {
            return Ok(None);
        };
        let mut out = Vec::with_capacity(self.coords.len());
        let mut infinite = false;
        let mut undefined = false;
        for (n, d) in &self.coords {
            let nv = n.eval(ctx, p.coords());
            let dv = d.eval(ctx, p.coords());
            match (nv.is_zero(), dv.is_zero()) {
                (true, true) => undefined = true,
                (false, true) => infinite = true,
                _ => out.push(ctx.div(nv, dv).expect("nonzero denominator")),
            }
        }
        match (infinite, undefined) {
            (true, _) => Ok(None),
            (false, true) => Err(()),
            (false, false) => Ok(Some(out)),
        }
    }
}

/// Checks that the invariant coordinates map `places` onto points of the
/// model, are constant on H-orbits, have fibers of size at most |H| with
/// one of size exactly |H|, and separate the images of P1 and P2.
pub fn quotient_model_check(
    ctx: &FieldCtx,
    check: &ModelCheck,
    h: &FiniteAutoGroup,
    places: &[Place],
    p1: &Place,
    p2: &Place,
) -> Result<Condition, AutoError> {
    let mut off_model = 0usize;
    let mut not_invariant = 0usize;
    let mut undefined = 0usize;
    let mut fibers: BTreeMap<Option<Vec<FieldElem>>, usize> = BTreeMap::new();
    for p in places {
        let Ok(img) = check.image(ctx, p) else {
            undefined += 1;
            continue;
        };
        if let Some(v) = &img {
            if !check.model.eval(ctx, v).is_zero() {
                off_model += 1;
            }
        }
        for e in h.elements() {
            if let Ok(other) = check.image(ctx, &e.apply(ctx, p)?) {
                if other != img {
                    not_invariant += 1;
                    break;
                }
            }
        }
        *fibers.entry(img).or_insert(0) += 1;
    }
    let finite_max = fibers
        .iter()
        .filter(|(k, _)| k.is_some())
        .map(|(_, &n)| n)
        .max()
        .unwrap_or(0);
    let orbit_image = |p: &Place| -> Result<BTreeSet<Option<Vec<FieldElem>>>, AutoError> {
        let mut s = BTreeSet::new();
        for q in h.orbit(ctx, p)? {
            if let Ok(i) = check.image(ctx, &q) {
                s.insert(i);
            }
        }
        Ok(s)
    };
    let i1 = orbit_image(p1)?;
    let i2 = orbit_image(p2)?;
    let separated = i1.len() == 1 && i2.len() == 1 && i1 != i2;
    let pass = off_model == 0
        && not_invariant == 0
        && finite_max == h.order()
        && separated;
    let show = |s: &BTreeSet<Option<Vec<FieldElem>>>| -> Vec<String> {
        s.iter()
            .map(|i| match i {
                None => "inf".to_string(),
                Some(v) => format!(
                    "({})",
                    v.iter().map(|&c| ctx.display(c)).collect::<Vec<_>>().join(",")
                ),
            })
            .collect()
    };
    Ok(Condition::new(
        "quotient",
        "model",
        pass,
        json!({
            "model": check.source,
            "degenerate": check.degenerate,
            "places": places.len(),
            "off_model": off_model,
            "not_invariant": not_invariant,
            "undefined": undefined,
            "max_fiber": finite_max,
            "h_order": h.order(),
            "p1_image": show(&i1),
            "p2_image": show(&i2),
        }),
    ))
}
