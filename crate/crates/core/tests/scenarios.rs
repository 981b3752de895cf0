use galois_points::catalog::{
    fermat_quartic, gk, hermitian, perturb, skabelund_ree, skabelund_suzuki, CatalogError,
    Perturbation, ReeConfig, Scenario, ScenarioDoc,
};
use galois_points::pipeline::{run, Report, RunOptions};
use galois_points::Error;
use proptest::prelude::*;

fn verify(doc: ScenarioDoc) -> Report {
    let s = Scenario::from_doc(doc).unwrap();
    run(&s, &RunOptions::default()).unwrap()
}

fn failing(r: &Report) -> Vec<String> {
    r.conditions
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("{}/{}", c.stage, c.id))
        .collect()
}

#[test]
fn gk_q2_h3_passes_with_degree_9() {
    let r = verify(gk(2, 3).unwrap());
    assert!(r.passed(), "{:?}", failing(&r));
    assert_eq!(r.json["derived"]["degree"], 9);
    assert_eq!(r.json["derived"]["group_orders"]["g1"], 8);
    assert_eq!(r.json["derived"]["group_orders"]["g1_hat"], 24);
    assert_eq!(r.condition("fact1", "rational-places-2").map(|c| c.passed()), Some(true));
    let e = &r.condition("corollary", "e").unwrap().evidence;
    assert_eq!(e["hg1"], "Direct");
}

#[test]
fn hermitian_q2_s3_is_degenerate_but_passes() {
    let r = verify(hermitian(2, 3).unwrap());
    assert!(r.passed(), "{:?}", failing(&r));
    assert_eq!(r.json["flags"][0], "degenerate-quotient");
    assert_eq!(r.condition("quotient", "model").unwrap().evidence["max_fiber"], 3);
}

#[test]
fn fermat_p7_passes() {
    let r = verify(fermat_quartic(7, 0).unwrap());
    assert!(r.passed(), "{:?}", failing(&r));
    assert!(r.condition("quotient", "fixes-p1").unwrap().passed());
    assert!(r.condition("quotient", "fixes-p2").unwrap().passed());
}

#[test]
fn fermat_alternate_root_passes() {
    let r = verify(fermat_quartic(13, 1).unwrap());
    assert!(r.passed(), "{:?}", failing(&r));
}

#[test]
fn suzuki_q0_2_h5_passes() {
    let r = verify(skabelund_suzuki(2, 5).unwrap());
    assert!(r.passed(), "{:?}", failing(&r));
    assert_eq!(r.json["derived"]["degree"], 65);
    assert_eq!(r.json["derived"]["xi_inverse"], "involution");
}

#[test]
fn parameter_violations() {
    let v = |r: Result<ScenarioDoc, CatalogError>| matches!(r, Err(CatalogError::ParamViolation(_)));
    assert!(v(gk(2, 5)));
    assert!(v(gk(6, 1)));
    assert!(v(hermitian(3, 3)));
    assert!(v(skabelund_suzuki(3, 1)));
    assert!(v(skabelund_suzuki(2, 3)));
    assert!(v(fermat_quartic(9, 0)));
    assert!(v(fermat_quartic(3, 0)));
    assert!(v(skabelund_ree(2, 1, None)));
    assert!(matches!(
        skabelund_ree(3, 1, None),
        Err(CatalogError::MissingGenerators(_))
    ));
}

#[test]
fn ree_h19_exceeds_the_field_cap() {
    let cfg: ReeConfig = serde_json::from_str(include_str!("../../../scenarios/ree-demo.json")).unwrap();
    let err = Scenario::from_doc(skabelund_ree(3, 19, Some(cfg)).unwrap()).unwrap_err();
    assert_eq!(Error::from(err).kind(), "AmbientTooLarge");
}

#[test]
fn designated_place_off_curve_is_an_error() {
    let mut doc = hermitian(3, 1).unwrap();
    doc.p2 = "(0:1:0)".into();
    let s = Scenario::from_doc(doc).unwrap();
    let err = run(&s, &RunOptions::default()).unwrap_err();
    assert_eq!(err.kind(), "InvalidInput");
}

#[test]
fn perturbations_fail() {
    let cases = [
        (gk(2, 3), Perturbation::B, vec!["fact1/b", "fact1/c"]),
        (gk(2, 3), Perturbation::C, vec!["fact1/c"]),
        (hermitian(3, 1), Perturbation::D, vec!["corollary/d", "corollary/f"]),
        (hermitian(3, 1), Perturbation::E, vec!["corollary/e"]),
        (gk(2, 3), Perturbation::F, vec!["corollary/e", "corollary/f"]),
    ];
    for (doc, k, want) in cases {
        let r = verify(perturb(doc.unwrap(), k).unwrap());
        assert_eq!(r.exit_code(), 1);
        assert_eq!(failing(&r), want, "perturbation {k}");
    }
    assert!(perturb(gk(2, 1).unwrap(), Perturbation::E).is_err());
    assert!("z".parse::<Perturbation>().is_err());
}

#[test]
fn reports_are_deterministic() {
    let a = verify(gk(2, 3).unwrap()).json.to_string();
    let b = verify(gk(2, 3).unwrap()).json.to_string();
    assert_eq!(a, b);
}

#[test]
fn documents_round_trip_through_json() {
    let doc = skabelund_suzuki(2, 5).unwrap();
    let text = serde_json::to_string(&doc).unwrap();
    let back: ScenarioDoc = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_value(&back).unwrap(), serde_json::to_value(&doc).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hermitian_passes_for_every_divisor(q in prop::sample::select(vec![2u64, 3, 4, 5]), pick in 0usize..6) {
        let divisors: Vec<u64> = (1..=q + 1).filter(|s| (q + 1) % s == 0).collect();
        let s = divisors[pick % divisors.len()];
        let r = verify(hermitian(q, s).unwrap());
        prop_assert!(r.passed(), "q={} s={} {:?}", q, s, failing(&r));
        prop_assert_eq!(r.json["derived"]["degree"].as_u64(), Some(q + 1));
    }

    #[test]
    fn seed_does_not_change_verdicts(seed in any::<u64>()) {
        let s = Scenario::from_doc(fermat_quartic(13, 0).unwrap()).unwrap();
        let r = run(&s, &RunOptions { seed, ..RunOptions::default() }).unwrap();
        prop_assert!(r.passed());
        prop_assert_eq!(r.json["seed"].as_u64(), Some(seed));
    }
}
