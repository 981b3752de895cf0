//! Serializable scenario descriptions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub params: BTreeMap<String, i64>,
    pub field: FieldDoc,
    /// Named sub-expressions, usable in every expression of the scenario.
    #[serde(default)]
    pub defs: BTreeMap<String, String>,
    pub curve: CurveDoc,
    /// Degree of the base field over which P1 and P2 are checked.
    #[serde(default)]
    pub test_degree: Option<u32>,
    #[serde(default)]
    pub sample_degree: Option<u32>,
    /// Places outside the base field added to the probe set.
    #[serde(default)]
    pub generic_probes: Option<usize>,
    #[serde(default)]
    pub maps: BTreeMap<String, MapDoc>,
    pub g1: GroupDoc,
    pub g2: GroupDoc,
    #[serde(default)]
    pub h: Option<GroupDoc>,
    pub p1: String,
    pub p2: String,
    pub w1: WitnessDoc,
    /// Defaults to `w1 ∘ xi^-1` when G2 is a conjugate of G1.
    #[serde(default)]
    pub w2: Option<WitnessDoc>,
    #[serde(default)]
    pub cross_checks: Vec<CrossCheckDoc>,
    #[serde(default)]
    pub model_check: Option<ModelCheckDoc>,
    #[serde(default)]
    pub fixed_point_checks: bool,
    #[serde(default)]
    pub expect: ExpectDoc,
    #[serde(default)]
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    pub p: u64,
    /// Subfield degrees that must be present; the ambient degree is their
    /// lcm together with the test and sample degrees.
    pub degrees: Vec<u32>,
    /// `"name: primitive n"` or `"name: poly(name) = 0"`, optionally
    /// suffixed by `@k` to pick the k-th root in canonical order.
    #[serde(default)]
    pub constants: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDoc {
    pub proj_vars: Vec<String>,
    pub affine_vars: Vec<String>,
    pub equations: Vec<String>,
    #[serde(default)]
    pub homogeneous: Vec<String>,
    #[serde(default)]
    pub at_infinity: Vec<String>,
    #[serde(default)]
    pub special: Vec<SpecialDoc>,
    pub enumerate: Vec<StepDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialDoc {
    pub tag: String,
    #[serde(default = "one")]
    pub degree: u32,
}

fn one() -> u32 {
    1
}

/// One enumeration step. With neither `additive` nor `power` the variable
/// is free.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    pub var: String,
    /// Additive polynomial in `var`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub additive: Option<String>,
    /// Integer exponent expression.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
}

/// A linear map (matrix rows acting on projective coordinates) or a
/// rational map of the affine chart.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub special_action: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// A matrix family indexed by subfield parameters satisfying a condition.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub params: Vec<String>,
    /// Parameters range over GF(p^range).
    pub range: u32,
    #[serde(default)]
    pub condition: Option<String>,
    pub linear: Vec<Vec<String>>,
    #[serde(default)]
    pub special_action: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GenDoc {
    Named(String),
    Family { family: FamilyDoc },
    Inline(MapDoc),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<GenDoc>,
    /// G2 only: `xi G1 xi^-1` for the named map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate_of_g1_by: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub same_as_g1: bool,
    /// H only: the subgroup generated by the 2-power-order elements of
    /// the group generated by G1 and G2.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub two_part_of_join: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDoc {
    pub num: String,
    pub den: String,
    /// Declared values, `"pole"` or a constant expression, keyed by place.
    #[serde(default)]
    pub values: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossCheckDoc {
    /// Both sides of the divisor identity equal the sum of the places of
    /// this degree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational_places: Option<u32>,
    /// Both sides equal the sum of the sample places where this projective
    /// coordinate vanishes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<String>,
}

/// A plane model of the quotient by H given by invariant coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCheckDoc {
    /// `[num, den]` pairs of homogeneous forms.
    pub coords: Vec<[String; 2]>,
    pub model: String,
    pub model_vars: Vec<String>,
    #[serde(default)]
    pub degenerate: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}
