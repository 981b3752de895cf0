//! Built-in scenario families.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    order_mod, prime_power, CatalogError, ExpectDoc, GroupDoc, MapDoc, ScenarioDoc, WitnessDoc,
};

pub fn builtin_names() -> &'static [&'static str] {
    &["gk", "hermitian", "skabelund-suzuki", "skabelund-ree", "fermat-quartic"]
}

fn to_doc(v: Value) -> ScenarioDoc {
    serde_json::from_value(v).expect("built-in scenario documents are well formed")
}

fn violation(msg: String) -> CatalogError {
    CatalogError::ParamViolation(msg)
}

fn degrees(base: u32, p: u64, h: u64) -> Vec<u32> {
    let e = order_mod(p, h).expect("h is prime to p");
    if e == 1 || base.is_multiple_of(e) {
        vec![base]
    } else {
        vec![base, e]
    }
}

fn h_group(h: u64, diag: Vec<&str>, special: Value) -> Value {
    if h == 1 {
        return Value::Null;
    }
    let n = diag.len();
    let rows: Vec<Vec<&str>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { diag[i] } else { "0" }).collect())
        .collect();
    json!({"generators": [{"linear": rows, "special_action": special, "label": "eta"}]})
}

fn constants(h: u64) -> Vec<String> {
    if h == 1 {
        Vec::new()
    } else {
        vec![format!("zeta: primitive {h}")]
    }
}

/// The Giulietti–Korchmáros curve over GF(q^2) with G1 the stabilizer of
/// the point at infinity in its Sylow p-subgroup and H of order h.
/// Sampling uses GF(q^6), over which the curve is maximal.
pub fn gk(q: u64, h: u64) -> Result<ScenarioDoc, CatalogError> {
    let (p, k) = prime_power(q).ok_or_else(|| violation(format!("q = {q} is not a prime power")))?;
    let n = q * q - q + 1;
    if h == 0 || !n.is_multiple_of(h) {
        return Err(violation(format!("h = {h} does not divide q^2-q+1 = {n}")));
    }
    let mut doc = to_doc(json!({
        "name": "gk",
        "description": "Giulietti-Korchmaros curve",
        "params": {"q": q, "h": h},
        "field": {"p": p, "degrees": degrees(2 * k, p, h), "constants": constants(h)},
        "curve": {
            "proj_vars": ["X", "Y", "Z", "W"],
            "affine_vars": ["x", "y", "z"],
            "equations": [
                "x^q + x - y^(q+1)",
                "y*((x^q + x)^(q-1) - 1) - z^(q^2-q+1)"
            ],
            "homogeneous": [
                "X^q*W + X*W^q - Y^(q+1)",
                "Y*((X^q + X*W^(q-1))^(q-1) - W^(q*(q-1))) - Z^(q^2-q+1)"
            ],
            "at_infinity": ["(1:0:0:0)"],
            "enumerate": [
                {"var": "x"},
                {"var": "y", "power": "q+1", "rhs": "x^q + x"},
                {"var": "z", "power": "q^2-q+1", "rhs": "y*((x^q + x)^(q-1) - 1)"}
            ]
        },
        "test_degree": 2 * k,
        "sample_degree": 6 * k,
        "maps": {
            "xi": {"linear": [["0","0","0","1"],["0","-1","0","0"],["0","0","1","0"],["1","0","0","0"]]}
        },
        "g1": {"generators": [{"family": {
            "params": ["a", "b"],
            "range": 2 * k,
            "condition": "a^q + a - b^(q+1)",
            "linear": [["1","b^q","0","a"],["0","1","0","b"],["0","0","1","0"],["0","0","0","1"]]
        }}]},
        "g2": {"conjugate_of_g1_by": "xi"},
        "p1": "(1:0:0:0)",
        "p2": "(0:0:0:1)",
        "w1": {"num": "Z", "den": "W", "values": {"(1:0:0:0)": "pole"}},
        "cross_checks": [{"rational_places": 2 * k}, {"section": "Z"}],
        "expect": {"g1_order": q * q * q, "h_order": h, "degree": q * q * q + 1}
    }));
    doc.h = h_group_doc(h, vec!["1", "1", "zeta", "1"], json!({}));
    Ok(doc)
}

fn h_group_doc(h: u64, diag: Vec<&str>, special: Value) -> Option<GroupDoc> {
    match h_group(h, diag, special) {
        Value::Null => None,
        v => Some(serde_json::from_value(v).expect("well formed")),
    }
}

/// The Hermitian curve `x^q + x = y^(q+1)` with translations fixing the
/// two points (1:0:0) and (0:0:1), and H of order s acting on y.
pub fn hermitian(q: u64, s: u64) -> Result<ScenarioDoc, CatalogError> {
    let (p, k) = prime_power(q).ok_or_else(|| violation(format!("q = {q} is not a prime power")))?;
    if s == 0 || !(q + 1).is_multiple_of(s) {
        return Err(violation(format!("s = {s} does not divide q+1 = {}", q + 1)));
    }
    let m = (q + 1) / s;
    let mut doc = to_doc(json!({
        "name": "hermitian",
        "description": "Hermitian curve",
        "params": {"q": q, "s": s, "m": m},
        "field": {"p": p, "degrees": [2 * k], "constants": constants(s)},
        "curve": {
            "proj_vars": ["X", "Y", "Z"],
            "affine_vars": ["x", "y"],
            "equations": ["x^q + x - y^(q+1)"],
            "homogeneous": ["X^q*Z + X*Z^q - Y^(q+1)"],
            "at_infinity": ["(1:0:0)"],
            "enumerate": [
                {"var": "y"},
                {"var": "x", "additive": "x^q + x", "rhs": "y^(q+1)"}
            ]
        },
        "test_degree": 2 * k,
        "maps": {
            "swap": {"linear": [["0","0","1"],["0","1","0"],["1","0","0"]]}
        },
        "g1": {"generators": [{"family": {
            "params": ["al"], "range": 2 * k, "condition": "al^q + al",
            "linear": [["1","0","al"],["0","1","0"],["0","0","1"]]
        }}]},
        "g2": {"generators": [{"family": {
            "params": ["al"], "range": 2 * k, "condition": "al^q + al",
            "linear": [["1","0","0"],["0","1","0"],["al","0","1"]]
        }}]},
        "p1": "(1:0:0)",
        "p2": "(0:0:1)",
        "w1": {"num": "Y", "den": "Z", "values": {"(1:0:0)": "pole"}},
        "w2": {"num": "Y", "den": "X", "values": {"(0:0:1)": "pole"}},
        "model_check": {
            "coords": [["X", "Z"], ["Y^s", "Z^s"]],
            "model": "y^m - x^q - x",
            "model_vars": ["x", "y"],
            "degenerate": m == 1
        },
        "expect": {"g1_order": q, "h_order": s, "degree": q + 1},
        "flags": if m == 1 { vec!["degenerate-quotient"] } else { vec![] }
    }));
    doc.h = h_group_doc(s, vec!["1", "zeta", "1"], json!({}));
    Ok(doc)
}

/// The Fermat-type quartic `x^3 + y^4 + 1 = 0` over GF(p) with two
/// Galois points of order 3 and the involution y -> -y. `root` selects
/// the cube root of unity among the roots of `w^2 + w + 1`.
pub fn fermat_quartic(p: u64, root: usize) -> Result<ScenarioDoc, CatalogError> {
    if !crate::gf::is_prime(p) || p == 2 || p == 3 {
        return Err(violation(format!("p = {p} must be a prime other than 2 and 3")));
    }
    if root > 1 {
        return Err(violation("the cube root index is 0 or 1".into()));
    }
    let split = p % 3 == 1;
    let mut flags = Vec::new();
    if !split {
        flags.push("cube-roots-in-quadratic-extension");
    }
    if root == 1 {
        flags.push("alternate-cube-root");
    }
    Ok(to_doc(json!({
        "name": "fermat-quartic",
        "description": "quartic x^3 + y^4 + 1 = 0",
        "params": {"p": p},
        "field": {
            "p": p,
            "degrees": [if split { 1 } else { 2 }],
            "constants": [format!("w: w^2 + w + 1 = 0 @{root}")]
        },
        "curve": {
            "proj_vars": ["X", "Y", "Z"],
            "affine_vars": ["x", "y"],
            "equations": ["x^3 + y^4 + 1"],
            "homogeneous": ["X^3*Z + Y^4 + Z^4"],
            "at_infinity": ["(1:0:0)"],
            "enumerate": [
                {"var": "x"},
                {"var": "y", "power": "4", "rhs": "-x^3 - 1"}
            ]
        },
        "g1": {"generators": [{"linear": [["w","0","0"],["0","1","0"],["0","0","1"]], "label": "sigma"}]},
        "g2": {"generators": [{"linear": [["-w","0","2"],["0","1-w","0"],["1","0","w^2"]], "label": "tau"}]},
        "h": {"generators": [{"linear": [["1","0","0"],["0","-1","0"],["0","0","1"]], "label": "eta"}]},
        "p1": "(1:0:0)",
        "p2": "(-1:0:1)",
        "w1": {"num": "Y", "den": "Z", "values": {"(1:0:0)": "pole"}},
        "w2": {"num": "Y", "den": "X + Z", "values": {"(-1:0:1)": "pole"}},
        "cross_checks": [{"section": "Y"}],
        "model_check": {
            "coords": [["X", "Z"], ["Y^2", "Z^2"]],
            "model": "y^2 + x^3 + 1",
            "model_vars": ["x", "y"]
        },
        "fixed_point_checks": true,
        "expect": {"g1_order": 3, "h_order": 2, "degree": 4},
        "flags": flags
    })))
}

/// The Skabelund cover of the Suzuki curve over GF(q), q = 2 q0^2.
pub fn skabelund_suzuki(q0: u64, h: u64) -> Result<ScenarioDoc, CatalogError> {
    match prime_power(q0) {
        Some((2, _)) => {}
        _ => return Err(violation(format!("q0 = {q0} is not a power of 2"))),
    }
    let q = 2 * q0 * q0;
    let k = q.trailing_zeros();
    let n = q - 2 * q0 + 1;
    if h == 0 || !n.is_multiple_of(h) {
        return Err(violation(format!("h = {h} does not divide q-2q0+1 = {n}")));
    }
    let mut doc = to_doc(json!({
        "name": "skabelund-suzuki",
        "description": "Skabelund cover of the Suzuki curve",
        "params": {"q": q, "q0": q0, "h": h},
        "field": {"p": 2, "degrees": degrees(k, 2, h), "constants": constants(h)},
        "defs": {
            "alpha": "y^(2*q0) + x^(2*q0+1)",
            "beta": "x*y^(2*q0) + alpha^(2*q0)"
        },
        "curve": {
            "proj_vars": ["X", "Y", "Z", "W"],
            "affine_vars": ["x", "y", "z"],
            "equations": [
                "y^q + y - x^q0*(x^q + x)",
                "x^q + x - z^(q-2*q0+1)"
            ],
            "special": [{"tag": "pole_of_x", "degree": 1}],
            "enumerate": [
                {"var": "x"},
                {"var": "y", "additive": "y^q + y", "rhs": "x^q0*(x^q + x)"},
                {"var": "z", "power": "q-2*q0+1", "rhs": "x^q + x"}
            ]
        },
        "test_degree": k,
        "maps": {
            "xi": {
                "rational": ["alpha", "y", "z"],
                "den": "beta",
                "special_action": {"(0:0:0:1)": "pole_of_x", "pole_of_x": "(0:0:0:1)"}
            }
        },
        "g1": {"generators": [{"family": {
            "params": ["a", "b"], "range": k,
            "linear": [["1","0","0","a"],["a^q0","1","0","b"],["0","0","1","0"],["0","0","0","1"]],
            "special_action": {"pole_of_x": "pole_of_x"}
        }}]},
        "g2": {"conjugate_of_g1_by": "xi"},
        "p1": "pole_of_x",
        "p2": "(0:0:0:1)",
        "w1": {"num": "Z", "den": "W", "values": {"pole_of_x": "pole"}},
        "cross_checks": [{"rational_places": k}],
        "expect": {"g1_order": q * q, "h_order": h, "degree": q * q + 1}
    }));
    doc.h = h_group_doc(h, vec!["1", "1", "zeta", "1"], json!({"pole_of_x": "pole_of_x"}));
    Ok(doc)
}

/// Externally supplied group data for the Ree cover.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReeConfig {
    #[serde(default)]
    pub constants: Vec<String>,
    #[serde(default)]
    pub maps: BTreeMap<String, MapDoc>,
    pub g1: GroupDoc,
    pub g2: GroupDoc,
    #[serde(default)]
    pub h: Option<GroupDoc>,
    #[serde(default)]
    pub p1: Option<String>,
    #[serde(default)]
    pub p2: Option<String>,
    pub w1: WitnessDoc,
    #[serde(default)]
    pub w2: Option<WitnessDoc>,
    #[serde(default)]
    pub expect: ExpectDoc,
}

/// The Skabelund cover of the Ree curve over GF(q), q = 3 q0^2. The
/// groups are not built in and must come from `config`.
pub fn skabelund_ree(
    q0: u64,
    h: u64,
    config: Option<ReeConfig>,
) -> Result<ScenarioDoc, CatalogError> {
    match prime_power(q0) {
        Some((3, _)) => {}
        _ => return Err(violation(format!("q0 = {q0} is not a power of 3"))),
    }
    let q = 3 * q0 * q0;
    let (_, k) = prime_power(q).expect("power of 3");
    let n = q - 3 * q0 + 1;
    if h == 0 || !n.is_multiple_of(h) {
        return Err(violation(format!("h = {h} does not divide q-3q0+1 = {n}")));
    }
    let cfg = config.ok_or_else(|| CatalogError::MissingGenerators("skabelund-ree".into()))?;
    let mut consts = constants(h);
    consts.extend(cfg.constants.iter().cloned());
    let mut doc = to_doc(json!({
        "name": "skabelund-ree",
        "description": "Skabelund cover of the Ree curve",
        "params": {"q": q, "q0": q0, "h": h},
        "field": {"p": 3, "degrees": degrees(k, 3, h), "constants": consts},
        "curve": {
            "proj_vars": ["X", "Y", "Z", "T", "W"],
            "affine_vars": ["x", "y", "z", "t"],
            "equations": [
                "y^q - y - x^q0*(x^q - x)",
                "z^q - z - x^(2*q0)*(x^q - x)",
                "x^q - x - t^(q-3*q0+1)"
            ],
            "special": [{"tag": "pole_of_x", "degree": 1}],
            "enumerate": [
                {"var": "x"},
                {"var": "y", "additive": "y^q - y", "rhs": "x^q0*(x^q - x)"},
                {"var": "z", "additive": "z^q - z", "rhs": "x^(2*q0)*(x^q - x)"},
                {"var": "t", "power": "q-3*q0+1", "rhs": "x^q - x"}
            ]
        },
        "test_degree": k,
        "g1": {},
        "g2": {},
        "p1": "pole_of_x",
        "p2": "(0:0:0:0:1)",
        "w1": {"num": "1", "den": "1"},
        "flags": ["externally-supplied-groups"]
    }));
    doc.maps = cfg.maps;
    doc.g1 = cfg.g1;
    doc.g2 = cfg.g2;
    doc.h = cfg.h.or_else(|| {
        h_group_doc(h, vec!["1", "1", "1", "zeta", "1"], json!({"pole_of_x": "pole_of_x"}))
    });
    if let Some(p) = cfg.p1 {
        doc.p1 = p;
    }
    if let Some(p) = cfg.p2 {
        doc.p2 = p;
    }
    doc.w1 = cfg.w1;
    doc.w2 = cfg.w2;
    doc.expect = cfg.expect;
    Ok(doc)
}
