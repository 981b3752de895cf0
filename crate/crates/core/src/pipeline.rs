//! End-to-end verification of a compiled scenario.

use std::time::Instant;

use serde_json::{json, Map, Value};

use crate::autos::{
    close_group, conjugate_group, AutoError, Automorphism, FiniteAutoGroup, TestSet,
    DEFAULT_GROUP_CAP,
};
use crate::catalog::{quotient_model_check, CrossCheck, GroupSpec, PlaceSpec, Scenario};
use crate::criterion::{
    check_corollary, check_fact1, check_outer, quotient_fixes, CheckEnv, Condition,
    CriterionError, Witness, DEFAULT_SAMPLE_COUNT,
};
use crate::divisor::Divisor;
use crate::geometry::Place;
use crate::Error;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub cap: usize,
    pub sample_count: usize,
    /// A place for the single-point variant.
    pub outer: Option<String>,
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            cap: DEFAULT_GROUP_CAP,
            sample_count: DEFAULT_SAMPLE_COUNT,
            outer: None,
            timing: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub conditions: Vec<Condition>,
    pub json: Value,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(Condition::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn condition(&self, stage: &str, id: &str) -> Option<&Condition> {
        self.conditions
            .iter()
            .find(|c| c.stage == stage && c.id == id)
    }
}

struct Groups {
    g1: FiniteAutoGroup,
    g2: FiniteAutoGroup,
    h: FiniteAutoGroup,
    /// Maps whose probe images are checked against the curve.
    extra_maps: Vec<Automorphism>,
    w2: Witness,
    xi_inverse: Option<&'static str>,
}

/// `count` places spread evenly over the sample places off the base set.
fn generic_places(base: &[Place], sample: &[Place], count: usize) -> Vec<Place> {
    let off: Vec<&Place> = sample
        .iter()
        .filter(|p| base.binary_search(p).is_err())
        .collect();
    if off.len() <= count {
        return off.into_iter().cloned().collect();
    }
    (0..count).map(|i| off[i * off.len() / count].clone()).collect()
}

fn build_groups(
    s: &Scenario,
    test: &std::sync::Arc<TestSet>,
    sample: &[Place],
    cap: usize,
) -> Result<Groups, Error> {
    let ctx = &s.ctx;
    let GroupSpec::Generators(g1_gens) = &s.g1 else {
        unreachable!("validated when the scenario was compiled");
    };
    let g1 = close_group(ctx, test, g1_gens, cap)?;
    let mut extra_maps = Vec::new();
    let mut xi_inverse = None;
    let mut conj_w2 = None;
    let g2 = match &s.g2 {
        GroupSpec::Conjugate { xi, .. } => {
            let (inv, kind) = xi.inverse(ctx, sample)?;
            xi_inverse = Some(kind.as_str());
            extra_maps.push(xi.clone());
            conj_w2 = Some(Witness::Pullback {
                inner: Box::new(s.w1.clone()),
                map: inv.clone(),
            });
            conjugate_group(ctx, xi, &inv, &g1)?
        }
        GroupSpec::SameAsG1 => {
            conj_w2 = Some(s.w1.clone());
            g1.clone()
        }
        GroupSpec::Generators(gens) => close_group(ctx, test, gens, cap)?,
        GroupSpec::Trivial => FiniteAutoGroup::trivial(test.clone()),
        GroupSpec::TwoPartOfJoin => unreachable!("rejected when the scenario was compiled"),
    };
    let h = match &s.h {
        GroupSpec::Trivial => FiniteAutoGroup::trivial(test.clone()),
        GroupSpec::Generators(gens) => close_group(ctx, test, gens, cap)?,
        GroupSpec::SameAsG1 => g1.clone(),
        GroupSpec::TwoPartOfJoin => {
            let gens: Vec<Automorphism> = g1
                .elements()
                .iter()
                .chain(g2.elements())
                .map(|e| e.map.clone())
                .collect();
            let join = close_group(ctx, test, &gens, cap)?;
            let mut two = Vec::new();
            for i in 0..join.order() {
                if join.element_order(ctx, i)?.is_power_of_two() {
                    two.push(join.elements()[i].map.clone());
                }
            }
            close_group(ctx, test, &two, cap)?
        }
        GroupSpec::Conjugate { .. } => unreachable!("rejected when the scenario was compiled"),
    };
    let w2 = match (&s.w2, conj_w2) {
        (Some(w), _) => w.clone(),
        (None, Some(w)) => w,
        (None, None) => unreachable!("validated when the scenario was compiled"),
    };
    Ok(Groups {
        g1,
        g2,
        h,
        extra_maps,
        w2,
        xi_inverse,
    })
}

fn preserves_curve(s: &Scenario, gr: &Groups, test: &TestSet) -> Result<Condition, Error> {
    let ctx = &s.ctx;
    let mut checked = 0usize;
    let mut off = Vec::new();
    for (name, g) in [("g1", &gr.g1), ("g2", &gr.g2), ("h", &gr.h)] {
        for e in g.elements() {
            for (src, img) in test.places().iter().zip(e.sig.iter()) {
                checked += 1;
                if !s.curve.on_curve(ctx, img)? && off.len() < 8 {
                    off.push(json!([name, e.map.label(), src.display(ctx), img.display(ctx)]));
                }
            }
        }
    }
    for m in &gr.extra_maps {
        for p in test.places() {
            checked += 1;
            let img = m.apply(ctx, p)?;
            if !s.curve.on_curve(ctx, &img)? && off.len() < 8 {
                off.push(json!([m.label(), m.label(), p.display(ctx), img.display(ctx)]));
            }
        }
    }
    Ok(Condition::new(
        "catalog",
        "preserves-curve",
        off.is_empty(),
        json!({"images_checked": checked, "off_curve": off}),
    ))
}

fn cross_check(
    s: &Scenario,
    c: &CrossCheck,
    sample: &[Place],
    lhs: &Divisor<Place>,
    rhs: &Divisor<Place>,
) -> Result<Condition, Error> {
    let ctx = &s.ctx;
    let (id, target) = match c {
        CrossCheck::RationalPlaces(d) => (
            format!("rational-places-{d}"),
            Divisor::from_places(s.curve.enumerate_places(ctx, *d)?),
        ),
        CrossCheck::Section { coord, name } => (
            format!("section-{name}"),
            Divisor::from_places(sample.iter().filter(|p| match p {
                Place::Ordinary(pt) => pt.coords()[*coord].is_zero(),
                Place::Special(_) => false,
            }).cloned()),
        ),
    };
    Ok(Condition::new(
        "fact1",
        &id,
        *lhs == target && *rhs == target,
        json!({"target_degree": target.degree(), "lhs_matches": *lhs == target, "rhs_matches": *rhs == target}),
    ))
}

struct Clock {
    on: bool,
    last: Instant,
    laps: Map<String, Value>,
}

impl Clock {
    fn lap(&mut self, name: &str) {
        if self.on {
            let now = Instant::now();
            let ms = (now - self.last).as_secs_f64() * 1e3;
            self.laps.insert(name.to_string(), json!((ms * 1e3).round() / 1e3));
            self.last = now;
        }
    }
}

pub fn run(s: &Scenario, opts: &RunOptions) -> Result<Report, Error> {
    let ctx = &s.ctx;
    let mut clock = Clock {
        on: opts.timing,
        last: Instant::now(),
        laps: Map::new(),
    };
    let base = s.curve.enumerate_places(ctx, s.test_degree)?;
    let sample = if s.sample_degree == s.test_degree {
        base.clone()
    } else {
        s.curve.enumerate_places(ctx, s.sample_degree)?
    };
    clock.lap("enumerate");

    let p1 = s.p1.clone();
    let p2 = match &s.p2 {
        PlaceSpec::Fixed(p) => p.clone(),
        PlaceSpec::Generic => sample
            .iter()
            .find(|p| base.binary_search(p).is_err())
            .cloned()
            .ok_or_else(|| {
                CriterionError::InvalidInput("no place off the base field in the sample".into())
            })?,
    };
    for (name, p) in [("P1", &p1), ("P2", &p2)] {
        if !s.curve.on_curve(ctx, p)? {
            return Err(CriterionError::InvalidInput(format!(
                "{name} = {} is not on the curve",
                p.display(ctx)
            ))
            .into());
        }
    }
    if p1 == p2 {
        return Err(CriterionError::InvalidInput("P1 and P2 coincide".into()).into());
    }
    let outer = match &opts.outer {
        Some(src) => {
            let q = s.place(src)?;
            if !s.curve.on_curve(ctx, &q)? {
                return Err(CriterionError::InvalidInput(format!(
                    "Q = {} is not on the curve",
                    q.display(ctx)
                ))
                .into());
            }
            Some(q)
        }
        None => None,
    };

    let mut generic = s.generic_probes;
    let mut escalations = 0usize;
    let (test, gr) = loop {
        let mut probes = base.clone();
        probes.extend(generic_places(&base, &sample, generic));
        probes.push(p1.clone());
        probes.push(p2.clone());
        probes.extend(outer.iter().cloned());
        let test = TestSet::new(probes);
        match build_groups(s, &test, &sample, opts.cap) {
            Err(Error::Auto(AutoError::UnfaithfulTestSet)) if generic < sample.len() => {
                generic = (generic * 2).max(1);
                escalations += 1;
            }
            r => break (test, r?),
        }
    };
    clock.lap("groups");

    let env = CheckEnv {
        ctx,
        sample: &sample,
        sample_degree: s.sample_degree,
        seed: opts.seed,
        sample_count: opts.sample_count,
    };
    let mut conditions = vec![preserves_curve(s, &gr, &test)?];
    let axioms = [&gr.g1, &gr.g2, &gr.h]
        .iter()
        .map(|g| g.verify_axioms(ctx, opts.seed))
        .collect::<Result<Vec<bool>, _>>()?;
    conditions.push(Condition::new(
        "catalog",
        "group-axioms",
        axioms.iter().all(|&b| b),
        json!({"g1": axioms[0], "g2": axioms[1], "h": axioms[2]}),
    ));
    let ex = &s.doc.expect;
    if ex.g1_order.is_some() || ex.h_order.is_some() {
        let ok = ex.g1_order.is_none_or(|o| o == gr.g1.order())
            && ex.h_order.is_none_or(|o| o == gr.h.order());
        conditions.push(Condition::new(
            "catalog",
            "orders",
            ok,
            json!({
                "g1": gr.g1.order(), "h": gr.h.order(),
                "expected_g1": ex.g1_order, "expected_h": ex.h_order,
            }),
        ));
    }
    clock.lap("catalog");

    let fact1 = check_fact1(&env, &gr.g1, &gr.g2, &p1, &p2, &s.w1, &gr.w2)?;
    conditions.extend(fact1.conditions.iter().cloned());
    for c in &s.cross_checks {
        conditions.push(cross_check(s, c, &sample, &fact1.lhs, &fact1.rhs)?);
    }
    clock.lap("fact1");

    let cor = check_corollary(
        &env,
        &gr.g1,
        &gr.g2,
        &p1,
        &p2,
        &gr.h,
        fact1.passed(),
        &s.w1,
        &gr.w2,
        opts.cap,
    )?;
    conditions.extend(cor.conditions.iter().cloned());
    if let Some(t) = &cor.theorem {
        conditions.extend(t.conditions.iter().cloned());
    }
    clock.lap("corollary");

    if let Some(m) = &s.model_check {
        conditions.push(quotient_model_check(ctx, m, &gr.h, &sample, &p1, &p2)?);
    }
    if s.doc.fixed_point_checks {
        for (id, g, p) in [("fixes-p1", &gr.g1, &p1), ("fixes-p2", &gr.g2, &p2)] {
            let ok = quotient_fixes(ctx, &gr.h, g, p)?;
            conditions.push(Condition::new("quotient", id, ok, json!({"fixed": ok})));
        }
    }
    if let Some(q) = &outer {
        let h = (!gr.h.is_trivial()).then_some(&gr.h);
        conditions.extend(check_outer(&env, &gr.g1, &gr.g2, h, q, &s.w1, &gr.w2)?);
    }
    if let Some(d) = ex.degree {
        conditions.push(Condition::new(
            "derived",
            "degree",
            fact1.degree == d,
            json!({"degree": fact1.degree, "expected": d}),
        ));
    }
    clock.lap("quotient");

    let passed = conditions.iter().all(Condition::passed);
    let (hat1, hat2) = cor.hat_orders.unzip();
    let json = json!({
        "scenario": s.name(),
        "params": s.doc.params,
        "seed": opts.seed,
        "field": {
            "p": ctx.p(),
            "N": ctx.degree(),
            "modulus": ctx.modulus(),
            "test_degree": s.test_degree,
            "sample_degree": s.sample_degree,
        },
        "places": {
            "test": base.len(),
            "sample": sample.len(),
            "probes": test.len(),
            "probe_escalations": escalations,
            "p1": p1.display(ctx),
            "p2": p2.display(ctx),
        },
        "conditions": conditions,
        "derived": {
            "degree": fact1.degree,
            "group_orders": {
                "g1": gr.g1.order(),
                "g2": gr.g2.order(),
                "h": gr.h.order(),
                "g1_hat": hat1,
                "g2_hat": hat2,
            },
            "xi_inverse": gr.xi_inverse,
        },
        "flags": s.doc.flags,
        "verdict": if passed { "pass" } else { "fail" },
        "timing": if opts.timing { Value::Object(clock.laps) } else { Value::Null },
    });
    Ok(Report { conditions, json })
}
